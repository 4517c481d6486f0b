#include "rfmp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rfmp/dictionary.hpp"
#include "rfmp/errors.hpp"
#include "rfmp/oracle.hpp"
#include "rfmp/problem_io.hpp"
#include "rfmp/run_log.hpp"
#include "rfmp/solver.hpp"

namespace rfmp::cli {

namespace {

struct RunOptions {
  std::string problem;
  double lambda = 0.0;
  Index cap = 1000;
  Index max_iter = 10000;
  double alpha_tol = 0.0;
  double energy_tol = std::numeric_limits<double>::min();
  std::string tie_break = "lowest";
  std::string out_dir;
};

struct VerifyOptions {
  std::string oracle;
  std::vector<Index> subspace_indices;
  double tol = 1e-6;
};

void add_run_options(CLI::App& cmd, RunOptions& o, bool out_required) {
  cmd.add_option("problem", o.problem, "Problem file")->required()->check(CLI::ExistingFile);
  cmd.add_option("--lambda", o.lambda, "Regularization parameter (>= 0)")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--cap", o.cap, "Maximum selections per atom")->check(CLI::PositiveNumber);
  cmd.add_option("--max-iter", o.max_iter, "Iteration limit")->check(CLI::NonNegativeNumber);
  cmd.add_option("--alpha-tol", o.alpha_tol, "Stop when |alpha| falls below this (0: off)")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--energy-tol", o.energy_tol,
                 "Stop when the energy decrease falls below this (0: off)")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--tie-break", o.tie_break, "Tie-break policy")
      ->check(CLI::IsMember({"lowest", "highest"}));
  auto* out = cmd.add_option("--out", o.out_dir, "Output directory for run_log.csv and solution.txt");
  if (out_required) out->required();
}

RfmpConfig make_config(const RunOptions& o, const io::Problem& problem) {
  RfmpConfig c;
  c.lambda = o.lambda;
  c.repetition_cap = o.cap;
  c.max_iterations = o.max_iter;
  c.stop_alpha_tol = o.alpha_tol;
  c.stop_energy_tol = o.energy_tol;
  c.tie_break = o.tie_break == "highest" ? TieBreak::HighestIndex : TieBreak::LowestIndex;
  c.initial = problem.initial;
  return c;
}

void print_warnings(const io::Problem& problem, std::ostream& err) {
  const auto& dups = problem.dict.duplicates();
  if (!dups.empty()) {
    err << "warning: dictionary contains " << dups.size() << " duplicate atom pair(s), first ("
        << dups.front().first << ", " << dups.front().second << ")\n";
  }
  const Index span = problem.dict.span_dimension();
  if (span < problem.op.dim()) {
    err << "warning: dictionary spans a subspace of dimension " << span << " < "
        << problem.op.dim() << "\n";
  }
}

struct Outcome {
  RfmpConfig config;
  RfmpResult result;
  DictionaryDiagnostics diag;
  double initial_energy = 0.0;
};

// Loads, gates and solves. Throws on every failure path; the caller maps
// exception types to exit codes.
Outcome execute(const RunOptions& o, const io::Problem& problem, std::ostream& err) {
  const RfmpConfig config = make_config(o, problem);
  config.validate();
  const DictionaryDiagnostics diag = diagnostics(problem.dict, config.lambda);
  if (const auto gate = check_c1_positive(diag, config.c1_floor); !gate.passed) {
    throw HypothesisError(gate.message);
  }
  print_warnings(problem, err);
  const RfmpState initial(problem.op, problem.y, problem.dict, config);
  auto result = solve(problem.op, problem.y, problem.dict, config);
  return Outcome{config, std::move(result), diag, initial.energy()};
}

void write_outputs(const RunOptions& o, const Outcome& oc) {
  namespace fs = std::filesystem;
  const fs::path dir(o.out_dir);
  fs::create_directories(dir);

  std::ostringstream log;
  io::write_run_log(log, oc.config, oc.diag, oc.initial_energy, oc.result.state.history(),
                    oc.result.termination);
  io::write_file_atomic(dir / "run_log.csv", log.str());

  std::ostringstream sol;
  io::write_solution(sol, oc.result.state.approx());
  io::write_file_atomic(dir / "solution.txt", sol.str());
}

void print_summary(const Outcome& oc, std::ostream& out) {
  const auto& st = oc.result.state;
  out << "iterations: " << st.iteration() << '\n';
  out << "termination: " << to_string(oc.result.termination) << '\n';
  out << "energy: " << io::format_double(st.energy()) << '\n';
  out << "residual_norm: " << io::format_double(st.residual().norm()) << '\n';
  out << "max_usage: " << st.max_usage() << '\n';
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const HypothesisError& e) {
    err << "error: " << e.what() << '\n';
    return kHypothesisViolation;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const NumericalError& e) {
    err << "error: numerical abort: " << e.what() << '\n';
    return kNumericalAbort;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
}

int solve_command(const RunOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto problem = io::load_problem(o.problem);
    const auto oc = execute(o, problem, err);
    write_outputs(o, oc);
    print_summary(oc, out);
    return static_cast<int>(kSuccess);
  });
}

int diagnose_command(const RunOptions& o, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto problem = io::load_problem(o.problem);
    const auto d = diagnostics(problem.dict, o.lambda);
    out << "lambda: " << io::format_double(d.lambda_used) << '\n';
    out << "atoms: " << problem.dict.size() << '\n';
    out << "c1: " << io::format_double(d.c1) << " (atom " << d.c1_atom << ")\n";
    out << "c2: " << io::format_double(d.c2) << '\n';
    out << "semi_frame_c: " << io::format_double(d.semi_frame_c) << '\n';
    out << "span_dimension: " << problem.dict.span_dimension() << " of " << problem.op.dim()
        << '\n';
    out << "duplicates: " << problem.dict.duplicates().size() << '\n';
    out << "c1_gate: " << check_c1_positive(d).message << '\n';
    return static_cast<int>(kSuccess);
  });
}

struct Check {
  std::string name;
  double value;
  bool pass;
};

int verify_command(const RunOptions& o, const VerifyOptions& v, std::ostream& out,
                   std::ostream& err) {
  return guarded(err, [&] {
    const auto problem = io::load_problem(o.problem);
    std::string oracle = v.oracle.empty() ? (o.lambda > 0.0 ? "tikhonov" : "range") : v.oracle;
    if ((oracle == "tikhonov" || oracle == "subspace") && !(o.lambda > 0.0)) {
      throw ContractError("oracle '" + oracle + "' requires lambda > 0");
    }
    if (oracle == "subspace" && v.subspace_indices.empty()) {
      throw ContractError("oracle 'subspace' requires --subspace-indices");
    }

    const auto oc = execute(o, problem, err);
    if (!o.out_dir.empty()) write_outputs(o, oc);
    print_summary(oc, out);

    const auto& op = problem.op;
    const auto& space = op.space();
    const Element& fn = oc.result.state.approx();
    const double tol = v.tol;
    std::vector<Check> checks;
    auto add = [&](std::string name, double value) {
      checks.push_back({std::move(name), value, value <= tol});
    };

    if (oracle == "tikhonov") {
      const auto ref = oracle::tikhonov_solve(op, problem.y, o.lambda);
      const double scale = space.norm(op.apply_adjoint(problem.y));
      const double res = oracle::normal_equation_residual(op, problem.y, o.lambda, fn);
      add("normal_equation_residual", scale > 0.0 ? res / scale : res);
      add("element_deviation", space.norm(fn - ref.element) / (1.0 + space.norm(ref.element)));
    } else if (oracle == "range") {
      const auto ref = oracle::range_solution(op, problem.y);
      const double ynorm = std::max(problem.y.norm(), std::numeric_limits<double>::min());
      const DataVector py = op.range_projection(problem.y);
      add("image_deviation", (op.apply(fn) - py).norm() / ynorm);
      const Eigen::VectorXd corr =
          problem.dict.images().transpose() * oc.result.state.residual();
      add("residual_correlation", corr.cwiseAbs().maxCoeff() / ynorm);
      if (op.singular_system().rank < op.dim()) {
        out << "element_deviation: skipped (operator has a nontrivial kernel)\n";
      } else {
        add("element_deviation",
            space.norm(fn - ref.element) / (1.0 + space.norm(ref.element)));
      }
    } else if (oracle == "subspace") {
      const auto ref = oracle::subspace_tikhonov(op, problem.y, o.lambda, v.subspace_indices);
      const auto sys = op.singular_system();
      const Eigen::MatrixXd proj = subspace_projector(space, sys, v.subspace_indices);
      const Eigen::MatrixXd outside = problem.dict.atoms() - proj * problem.dict.atoms();
      if (outside.cwiseAbs().maxCoeff() > 1e-8 * (1.0 + problem.dict.atoms().cwiseAbs().maxCoeff())) {
        err << "warning: some atoms do not lie in the chosen subspace\n";
      }
      add("element_deviation", space.norm(fn - ref.element) / (1.0 + space.norm(ref.element)));
      const double scale = space.norm(op.apply_adjoint(problem.y));
      const double res =
          oracle::restricted_normal_equation_residual(op, problem.y, o.lambda, proj, fn);
      add("restricted_normal_equation_residual", scale > 0.0 ? res / scale : res);
      const Eigen::MatrixXd normal = op.normal_matrix();
      const Eigen::MatrixXd comm = proj * normal - normal * proj;
      add("projector_commutator", comm.cwiseAbs().maxCoeff() / (1.0 + normal.cwiseAbs().maxCoeff()));
    } else {
      throw ContractError("unknown oracle '" + oracle + "'");
    }

    out << "oracle: " << oracle << '\n';
    bool all = true;
    for (const auto& c : checks) {
      out << c.name << ": " << io::format_double(c.value) << (c.pass ? " PASS" : " FAIL") << '\n';
      all = all && c.pass;
    }
    out << "result: " << (all ? "PASS" : "FAIL") << " (tol " << io::format_double(tol) << ")\n";
    return static_cast<int>(all ? kSuccess : kVerificationFailed);
  });
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Regularized functional matching pursuit for linear inverse problems", "rfmp"};
  app.require_subcommand(1);

  RunOptions solve_opts;
  auto* solve_cmd = app.add_subcommand("solve", "Run the greedy iteration and write its log");
  add_run_options(*solve_cmd, solve_opts, true);

  RunOptions verify_opts;
  VerifyOptions verify_extra;
  auto* verify_cmd = app.add_subcommand("verify", "Run the iteration and compare with a direct solve");
  add_run_options(*verify_cmd, verify_opts, false);
  verify_cmd->add_option("--oracle", verify_extra.oracle, "Reference solution")
      ->check(CLI::IsMember({"tikhonov", "range", "subspace"}));
  verify_cmd->add_option("--subspace-indices", verify_extra.subspace_indices,
                         "0-based singular indices spanning V")
      ->delimiter(',');
  verify_cmd->add_option("--tol", verify_extra.tol, "Pass threshold for every relative check")
      ->check(CLI::PositiveNumber);

  RunOptions diag_opts;
  auto* diag_cmd = app.add_subcommand("diagnose", "Print dictionary diagnostics");
  diag_cmd->add_option("problem", diag_opts.problem, "Problem file")
      ->required()
      ->check(CLI::ExistingFile);
  diag_cmd->add_option("--lambda", diag_opts.lambda, "Regularization parameter (>= 0)")
      ->check(CLI::NonNegativeNumber);

  std::vector<const char*> argv{"rfmp"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? static_cast<int>(kSuccess) : static_cast<int>(kInvalidInput);
  }

  if (solve_cmd->parsed()) return solve_command(solve_opts, out, err);
  if (verify_cmd->parsed()) return verify_command(verify_opts, verify_extra, out, err);
  return diagnose_command(diag_opts, out, err);
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace rfmp::cli
