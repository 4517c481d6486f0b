#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rfmp/dictionary.hpp"
#include "rfmp/solver.hpp"

namespace rfmp::io {

// Comma-separated iteration log. Run settings and dictionary diagnostics go
// in "# key = value" lines before the column header; the termination reason
// is the final comment line.

inline constexpr const char* kRunLogColumns = "n,atom,alpha,energy,residual_norm,score,wall_time_s";

struct RunLog {
  std::map<std::string, std::string> header;
  std::vector<IterationRecord> records;
  std::string termination;
};

void write_run_log(std::ostream& out, const RfmpConfig& config,
                   const DictionaryDiagnostics& diag, double initial_energy,
                   const std::vector<IterationRecord>& records, Termination termination);

RunLog parse_run_log(std::istream& in);

}  // namespace rfmp::io
