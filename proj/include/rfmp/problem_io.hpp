#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "rfmp/dictionary.hpp"
#include "rfmp/forward_operator.hpp"

namespace rfmp::io {

// Problem file layout: labeled blocks, each a header line with the block
// name and its dimensions followed by whitespace-separated values, one row
// per line. Blank lines and lines starting with '#' are ignored.
//
//   OPERATOR <l> <N>      l rows of N values
//   METRIC <N> <N>        optional, identity when absent
//   DATA <l>              one row
//   DICTIONARY <K> <N>    K rows, one atom per row
//   INITIAL <N>           optional F_0, one row
//
// Values are written with 17 significant digits so a write/read cycle
// reproduces every double exactly.

/// Raw contents of a problem file after shape validation.
struct ProblemData {
  Eigen::MatrixXd op;                     // l x N
  std::optional<Eigen::MatrixXd> metric;  // N x N
  Eigen::VectorXd data;                   // l
  Eigen::MatrixXd atoms;                  // K x N, one atom per row
  std::optional<Eigen::VectorXd> initial;
};

/// Validated problem objects ready for the solver.
struct Problem {
  ForwardOperator op;
  DataVector y;
  Dictionary dict;
  std::optional<Element> initial;
};

/// Throws ParseError naming the block and row on malformed input or a shape
/// mismatch between blocks.
ProblemData parse_problem(std::istream& in);
ProblemData read_problem_file(const std::filesystem::path& path);

void write_problem(std::ostream& out, const ProblemData& data);
void write_problem_file(const std::filesystem::path& path, const ProblemData& data);

/// Builds the operator and dictionary. Throws ParseError for a metric that
/// is not SPD or a zero atom.
Problem make_problem(const ProblemData& data);
Problem load_problem(const std::filesystem::path& path);

/// Shortest text that reads back as exactly `value` (17 significant digits).
std::string format_double(double value);

void write_solution(std::ostream& out, const Element& x);
Element parse_solution(std::istream& in);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace rfmp::io
