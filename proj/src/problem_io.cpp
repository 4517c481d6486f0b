#include "rfmp/problem_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <vector>

#include "rfmp/errors.hpp"

namespace rfmp::io {

namespace {

struct LineReader {
  std::istream& in;
  int line_no = 0;

  // Next non-blank, non-comment line; false at end of input.
  bool next(std::string& line) {
    while (std::getline(in, line)) {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      return true;
    }
    return false;
  }
};

std::vector<std::string_view> split(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

[[noreturn]] void fail(const std::string& block, int row, const std::string& what) {
  std::string msg = "block " + block;
  if (row > 0) msg += " row " + std::to_string(row);
  throw ParseError(msg + ": " + what);
}

double parse_value(std::string_view tok, const std::string& block, int row) {
  double v = 0.0;
  const char* begin = tok.data();
  if (!tok.empty() && tok.front() == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    fail(block, row, "cannot parse number '" + std::string(tok) + "'");
  }
  if (!std::isfinite(v)) fail(block, row, "non-finite value '" + std::string(tok) + "'");
  return v;
}

Index parse_dim(std::string_view tok, const std::string& block) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || v < 1) {
    fail(block, 0, "invalid dimension '" + std::string(tok) + "'");
  }
  return static_cast<Index>(v);
}

Eigen::MatrixXd read_rows(LineReader& reader, const std::string& block, Index rows,
                          Index cols) {
  Eigen::MatrixXd m(rows, cols);
  std::string line;
  for (Index r = 0; r < rows; ++r) {
    const int row = static_cast<int>(r) + 1;
    if (!reader.next(line)) fail(block, row, "unexpected end of file");
    const auto toks = split(line);
    if (static_cast<Index>(toks.size()) != cols) {
      fail(block, row,
           "expected " + std::to_string(cols) + " values, found " + std::to_string(toks.size()));
    }
    for (Index c = 0; c < cols; ++c) m(r, c) = parse_value(toks[static_cast<std::size_t>(c)], block, row);
  }
  return m;
}

void expect_header_arity(const std::vector<std::string_view>& toks, std::size_t dims,
                         const std::string& block) {
  if (toks.size() != dims + 1) {
    fail(block, 0, "header expects " + std::to_string(dims) + " dimension(s)");
  }
}

}  // namespace

ProblemData parse_problem(std::istream& in) {
  LineReader reader{in};
  ProblemData out;
  std::set<std::string> seen;
  std::string line;
  while (reader.next(line)) {
    const auto toks = split(line);
    const std::string block(toks.front());
    if (!seen.insert(block).second) fail(block, 0, "block appears more than once");

    if (block == "OPERATOR") {
      expect_header_arity(toks, 2, block);
      out.op = read_rows(reader, block, parse_dim(toks[1], block), parse_dim(toks[2], block));
    } else if (block == "METRIC") {
      expect_header_arity(toks, 2, block);
      const Index n = parse_dim(toks[1], block);
      if (parse_dim(toks[2], block) != n) fail(block, 0, "metric must be square");
      out.metric = read_rows(reader, block, n, n);
    } else if (block == "DATA") {
      expect_header_arity(toks, 1, block);
      out.data = read_rows(reader, block, 1, parse_dim(toks[1], block)).row(0).transpose();
    } else if (block == "DICTIONARY") {
      expect_header_arity(toks, 2, block);
      out.atoms = read_rows(reader, block, parse_dim(toks[1], block), parse_dim(toks[2], block));
    } else if (block == "INITIAL") {
      expect_header_arity(toks, 1, block);
      out.initial = read_rows(reader, block, 1, parse_dim(toks[1], block)).row(0).transpose();
    } else {
      throw ParseError("line " + std::to_string(reader.line_no) + ": unknown block '" + block +
                       "'");
    }
  }

  for (const char* required : {"OPERATOR", "DATA", "DICTIONARY"}) {
    if (!seen.count(required)) throw ParseError(std::string("missing block ") + required);
  }
  const Index l = out.op.rows();
  const Index n = out.op.cols();
  if (out.data.size() != l) {
    fail("DATA", 0,
         "data length " + std::to_string(out.data.size()) + ", operator rows " + std::to_string(l));
  }
  if (out.metric && out.metric->rows() != n) {
    fail("METRIC", 0,
         "metric size " + std::to_string(out.metric->rows()) + ", operator columns " +
             std::to_string(n));
  }
  if (out.atoms.cols() != n) {
    fail("DICTIONARY", 0,
         "atom length " + std::to_string(out.atoms.cols()) + ", operator columns " +
             std::to_string(n));
  }
  if (out.initial && out.initial->size() != n) {
    fail("INITIAL", 0,
         "initial length " + std::to_string(out.initial->size()) + ", operator columns " +
             std::to_string(n));
  }
  return out;
}

ProblemData read_problem_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file " + path.string());
  return parse_problem(in);
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

void write_rows(std::ostream& out, const Eigen::MatrixXd& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) {
      if (c > 0) out << ' ';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

}  // namespace

void write_problem(std::ostream& out, const ProblemData& data) {
  out << "# rfmp problem\n";
  out << "OPERATOR " << data.op.rows() << ' ' << data.op.cols() << '\n';
  write_rows(out, data.op);
  if (data.metric) {
    out << "METRIC " << data.metric->rows() << ' ' << data.metric->cols() << '\n';
    write_rows(out, *data.metric);
  }
  out << "DATA " << data.data.size() << '\n';
  write_rows(out, data.data.transpose());
  out << "DICTIONARY " << data.atoms.rows() << ' ' << data.atoms.cols() << '\n';
  write_rows(out, data.atoms);
  if (data.initial) {
    out << "INITIAL " << data.initial->size() << '\n';
    write_rows(out, data.initial->transpose());
  }
}

void write_problem_file(const std::filesystem::path& path, const ProblemData& data) {
  std::ostringstream os;
  write_problem(os, data);
  write_file_atomic(path, os.str());
}

Problem make_problem(const ProblemData& data) {
  auto guarded = [](const char* block, auto&& build) {
    try {
      return build();
    } catch (const ContractError& e) {
      throw ParseError(std::string("block ") + block + ": " + e.what());
    }
  };
  HilbertSpace space = guarded("METRIC", [&] {
    return data.metric ? HilbertSpace(*data.metric) : HilbertSpace(data.op.cols());
  });
  ForwardOperator op = guarded("OPERATOR", [&] { return ForwardOperator(space, data.op); });
  Dictionary dict = guarded("DICTIONARY", [&] {
    return Dictionary::build(op, Eigen::MatrixXd(data.atoms.transpose()));
  });
  return Problem{std::move(op), data.data, std::move(dict), data.initial};
}

Problem load_problem(const std::filesystem::path& path) {
  return make_problem(read_problem_file(path));
}

void write_solution(std::ostream& out, const Element& x) {
  out << "# rfmp solution coefficients\n";
  out << "SOLUTION " << x.size() << '\n';
  for (Index i = 0; i < x.size(); ++i) out << format_double(x(i)) << '\n';
}

Element parse_solution(std::istream& in) {
  LineReader reader{in};
  std::string line;
  if (!reader.next(line)) throw ParseError("empty solution file");
  const auto toks = split(line);
  if (toks.size() != 2 || toks[0] != "SOLUTION") throw ParseError("missing SOLUTION header");
  const Index n = parse_dim(toks[1], "SOLUTION");
  return read_rows(reader, "SOLUTION", n, 1).col(0);
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace rfmp::io
