#include "rfmp/run_log.hpp"

#include <charconv>
#include <istream>
#include <stdexcept>
#include <ostream>
#include <sstream>

#include "rfmp/errors.hpp"
#include "rfmp/problem_io.hpp"

namespace rfmp::io {

namespace {

std::string_view tie_break_name(TieBreak t) {
  return t == TieBreak::LowestIndex ? "lowest-index" : "highest-index";
}

double to_double(const std::string& s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw std::invalid_argument(s);
  return v;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

void write_run_log(std::ostream& out, const RfmpConfig& config,
                   const DictionaryDiagnostics& diag, double initial_energy,
                   const std::vector<IterationRecord>& records, Termination termination) {
  out << "# rfmp run log\n";
  out << "# lambda = " << format_double(config.lambda) << '\n';
  out << "# repetition_cap = " << config.repetition_cap << '\n';
  out << "# max_iterations = " << config.max_iterations << '\n';
  out << "# stop_alpha_tol = " << format_double(config.stop_alpha_tol) << '\n';
  out << "# stop_energy_tol = " << format_double(config.stop_energy_tol) << '\n';
  out << "# tie_break = " << tie_break_name(config.tie_break) << '\n';
  out << "# c1 = " << format_double(diag.c1) << '\n';
  out << "# c1_atom = " << diag.c1_atom << '\n';
  out << "# c2 = " << format_double(diag.c2) << '\n';
  out << "# semi_frame_c = " << format_double(diag.semi_frame_c) << '\n';
  out << "# initial_energy = " << format_double(initial_energy) << '\n';
  out << kRunLogColumns << '\n';
  for (const auto& r : records) {
    out << r.n << ',' << r.atom << ',' << format_double(r.alpha) << ','
        << format_double(r.energy) << ',' << format_double(r.residual_norm) << ','
        << format_double(r.score) << ',' << format_double(r.wall_seconds) << '\n';
  }
  out << "# termination = " << to_string(termination) << '\n';
}

RunLog parse_run_log(std::istream& in) {
  RunLog log;
  std::string line;
  bool columns_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(line.substr(1, eq - 1));
      const std::string value = trim(line.substr(eq + 1));
      if (key == "termination") {
        log.termination = value;
      } else {
        log.header[key] = value;
      }
      continue;
    }
    if (!columns_seen) {
      if (trim(line) != kRunLogColumns) throw ParseError("run log: unexpected column header");
      columns_seen = true;
      continue;
    }
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 7) throw ParseError("run log: malformed record '" + line + "'");
    IterationRecord r;
    try {
      r.n = std::stoll(cells[0]);
      r.atom = std::stoll(cells[1]);
      r.alpha = to_double(cells[2]);
      r.energy = to_double(cells[3]);
      r.residual_norm = to_double(cells[4]);
      r.score = to_double(cells[5]);
      r.wall_seconds = to_double(cells[6]);
    } catch (const std::exception&) {
      throw ParseError("run log: malformed record '" + line + "'");
    }
    log.records.push_back(r);
  }
  return log;
}

}  // namespace rfmp::io
