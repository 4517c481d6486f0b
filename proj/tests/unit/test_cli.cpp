#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "random_problems.hpp"
#include "rfmp/cli.hpp"
#include "rfmp/problem_io.hpp"
#include "rfmp/run_log.hpp"

using namespace rfmp;
namespace fs = std::filesystem;
namespace rt = rfmp::testing;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = rfmp::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("rfmp_cli_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string write(const TempDir& dir, const std::string& name, const io::ProblemData& d) {
  const auto p = dir.file(name);
  io::write_problem_file(p, d);
  return p;
}

io::ProblemData identity_problem(double y0, double y1) {
  io::ProblemData d;
  d.op = Eigen::MatrixXd::Identity(2, 2);
  d.data = Eigen::Vector2d(y0, y1);
  d.atoms = Eigen::MatrixXd::Identity(2, 2);
  return d;
}

io::ProblemData kernel_atom_problem() {
  io::ProblemData d;
  d.op = Eigen::MatrixXd(2, 2);
  d.op << 1, 0, 0, 0;
  d.data = Eigen::Vector2d(1, 1);
  d.atoms = Eigen::MatrixXd::Identity(2, 2);
  return d;
}

io::RunLog read_log(const std::string& path) {
  std::ifstream in(path);
  return io::parse_run_log(in);
}

Element read_solution(const std::string& path) {
  std::ifstream in(path);
  return io::parse_solution(in);
}

double metric_value(const std::string& out, const std::string& key) {
  const auto pos = out.find(key + ": ");
  REQUIRE(pos != std::string::npos);
  return std::stod(out.substr(pos + key.size() + 2));
}

}  // namespace

TEST_CASE("solve: identity problem with lambda = 0 writes a one-line log") {
  TempDir dir;
  const auto prob = write(dir, "id.txt", identity_problem(1, 0));
  const auto r = invoke({"solve", prob, "--lambda", "0", "--out", dir.file("out")});
  REQUIRE(r.code == cli::kSuccess);
  const auto log = read_log(dir.file("out/run_log.csv"));
  CHECK(log.records.size() == 1);
  CHECK(log.termination == "energy decrease below tolerance");
  CHECK(read_solution(dir.file("out/solution.txt")) == Eigen::Vector2d(1, 0));
}

TEST_CASE("solve: C1 violation exits with code 2 before iterating") {
  TempDir dir;
  const auto prob = write(dir, "kernel.txt", kernel_atom_problem());
  const auto r = invoke({"solve", prob, "--lambda", "0", "--out", dir.file("out")});
  CHECK(r.code == cli::kHypothesisViolation);
  CHECK(r.err.find("condition C1 > 0 violated by atom 1") != std::string::npos);
  CHECK_FALSE(fs::exists(dir.file("out/run_log.csv")));

  const auto ok = invoke({"solve", prob, "--lambda", "0.1", "--out", dir.file("out")});
  CHECK(ok.code == cli::kSuccess);
}

TEST_CASE("invalid input exits with code 3") {
  TempDir dir;
  {
    std::ofstream f(dir.file("bad.txt"));
    f << "OPERATOR 4 2\n1 0\n0 1\n1 1\n2 2\nDATA 5\n1 2 3 4 5\nDICTIONARY 1 2\n1 0\n";
  }
  const auto r = invoke({"solve", dir.file("bad.txt"), "--out", dir.file("o")});
  CHECK(r.code == cli::kInvalidInput);
  CHECK(r.err.find("data length 5, operator rows 4") != std::string::npos);

  {
    std::ofstream f(dir.file("metric.txt"));
    f << "OPERATOR 1 2\n1 0\nMETRIC 2 2\n1 0\n0 -2\nDATA 1\n1\nDICTIONARY 1 2\n1 0\n";
  }
  const auto m = invoke({"diagnose", dir.file("metric.txt")});
  CHECK(m.code == cli::kInvalidInput);
  CHECK(m.err.find("metric not positive definite") != std::string::npos);

  CHECK(invoke({"solve", dir.file("missing.txt"), "--out", dir.file("o")}).code == cli::kInvalidInput);
  CHECK(invoke({"solve", dir.file("bad.txt"), "--lambda", "-1", "--out", "o"}).code ==
        cli::kInvalidInput);
  CHECK(invoke({}).code == cli::kInvalidInput);
  CHECK(invoke({"--help"}).code == cli::kSuccess);
}

TEST_CASE("diagnose prints c1, c2 and the semi-frame estimate") {
  TempDir dir;
  const auto prob = write(dir, "id.txt", identity_problem(1, 2));
  const auto r = invoke({"diagnose", prob, "--lambda", "0"});
  REQUIRE(r.code == cli::kSuccess);
  CHECK(metric_value(r.out, "c1") == 1.0);
  CHECK(metric_value(r.out, "c2") == 1.0);
  CHECK(metric_value(r.out, "semi_frame_c") == doctest::Approx(1.0));
}

TEST_CASE("verify: lambda = 1 identity problem matches the Tikhonov oracle") {
  TempDir dir;
  const auto prob = write(dir, "id.txt", identity_problem(1, 0));
  const auto r = invoke({"verify", prob, "--lambda", "1", "--tol", "1e-12"});
  CHECK(r.code == cli::kSuccess);
  CHECK(metric_value(r.out, "element_deviation") <= 1e-12);
  CHECK(r.out.find("result: PASS") != std::string::npos);
}

TEST_CASE("verify: random 20x50 problem with a spanning dictionary") {
  TempDir dir;
  rt::Rng rng(211);
  io::ProblemData d;
  const auto op = rt::random_operator(rng, 20, 50);
  d.op = op.matrix();
  d.data = rt::gaussian_vector(rng, 20);
  Eigen::MatrixXd atoms(50, 150);
  atoms << rt::h_orthonormal_basis(rng, op.space()), rt::gaussian(rng, 50, 100);
  d.atoms = atoms.transpose();
  const auto prob = write(dir, "rand.txt", d);
  const auto r = invoke({"verify", prob, "--lambda", "1", "--max-iter", "20000", "--alpha-tol",
                      "1e-10", "--tol", "1e-6", "--out", dir.file("out")});
  CHECK(r.code == cli::kSuccess);
  CHECK(r.out.find("result: PASS") != std::string::npos);

  // Energy column is nonincreasing.
  const auto log = read_log(dir.file("out/run_log.csv"));
  double prev = std::stod(log.header.at("initial_energy"));
  for (const auto& rec : log.records) {
    CHECK(rec.energy <= prev);
    prev = rec.energy;
  }
}

TEST_CASE("verify: lambda = 0 with a non-surjective operator skips the element check") {
  TempDir dir;
  rt::Rng rng(223);
  const auto op = rt::rank_deficient_operator(rng, 6, 9, 3);
  io::ProblemData d;
  d.op = op.matrix();
  d.data = rt::gaussian_vector(rng, 6);
  d.atoms = rt::gaussian(rng, 20, 9);
  const auto prob = write(dir, "rd.txt", d);
  const auto r = invoke({"verify", prob, "--lambda", "0", "--alpha-tol", "1e-13"});
  CHECK(r.code == cli::kSuccess);
  CHECK(r.out.find("element_deviation: skipped") != std::string::npos);
  CHECK(metric_value(r.out, "image_deviation") <= 1e-6);

  const auto t = invoke({"verify", prob, "--lambda", "0", "--oracle", "tikhonov"});
  CHECK(t.code == cli::kInvalidInput);
}

TEST_CASE("verify: subspace oracle") {
  TempDir dir;
  rt::Rng rng(227);
  const auto op = rt::random_operator(rng, 6, 10, true);
  const auto sys = op.singular_system();
  io::ProblemData d;
  d.op = op.matrix();
  d.metric = op.space().metric();
  d.data = rt::gaussian_vector(rng, 6);
  Eigen::MatrixXd x(10, 3);
  x << sys.right.col(0), sys.right.col(2), sys.right.col(5);
  d.atoms = (x * rt::gaussian(rng, 3, 9)).transpose();
  const auto prob = write(dir, "sub.txt", d);
  const auto r = invoke({"verify", prob, "--lambda", "0.5", "--oracle", "subspace",
                      "--subspace-indices", "0,2,5", "--alpha-tol", "1e-12"});
  CHECK(r.code == cli::kSuccess);
  CHECK(metric_value(r.out, "projector_commutator") <= 1e-8);
  CHECK(invoke({"verify", prob, "--lambda", "0.5", "--oracle", "subspace"}).code ==
        cli::kInvalidInput);
}

TEST_CASE("verify reports failure when the run is cut short") {
  TempDir dir;
  rt::Rng rng(229);
  io::ProblemData d;
  d.op = rt::gaussian(rng, 5, 8);
  d.data = rt::gaussian_vector(rng, 5);
  d.atoms = rt::gaussian(rng, 20, 8);
  const auto prob = write(dir, "p.txt", d);
  const auto r = invoke({"verify", prob, "--lambda", "0.5", "--max-iter", "2"});
  CHECK(r.code == cli::kVerificationFailed);
  CHECK(r.out.find("result: FAIL") != std::string::npos);
}

TEST_CASE("identical problem and config produce an identical log") {
  TempDir dir;
  rt::Rng rng(233);
  io::ProblemData d;
  d.op = rt::gaussian(rng, 8, 12);
  d.metric = rt::spd_metric(rng, 12);
  d.data = rt::gaussian_vector(rng, 8);
  d.atoms = rt::gaussian(rng, 30, 12);
  d.initial = rt::gaussian_vector(rng, 12);
  const auto prob = write(dir, "p.txt", d);
  REQUIRE(invoke({"solve", prob, "--lambda", "0.3", "--max-iter", "300", "--out", dir.file("a")})
              .code == 0);
  REQUIRE(invoke({"solve", prob, "--lambda", "0.3", "--max-iter", "300", "--out", dir.file("b")})
              .code == 0);
  const auto a = read_log(dir.file("a/run_log.csv"));
  const auto b = read_log(dir.file("b/run_log.csv"));
  CHECK(a.header == b.header);
  CHECK(a.termination == b.termination);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    CHECK(a.records[i].atom == b.records[i].atom);
    CHECK(a.records[i].alpha == b.records[i].alpha);
    CHECK(a.records[i].energy == b.records[i].energy);
    CHECK(a.records[i].residual_norm == b.records[i].residual_norm);
    CHECK(a.records[i].score == b.records[i].score);
  }
  CHECK(read_solution(dir.file("a/solution.txt")) == read_solution(dir.file("b/solution.txt")));
}

TEST_CASE("the executable maps hypothesis violations to exit status 2") {
  TempDir dir;
  const auto prob = write(dir, "kernel.txt", kernel_atom_problem());
  const std::string cmd = std::string(RFMP_CLI_PATH) + " solve " + prob + " --lambda 0 --out " +
                          dir.file("out") + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  CHECK(WEXITSTATUS(status) == 2);
}
