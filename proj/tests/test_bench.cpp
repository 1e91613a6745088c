#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "aasm/bench.hpp"
#include "aasm/linalg.hpp"
#include "support.hpp"

using namespace aasm;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("aasm_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Trace trace_of(std::initializer_list<double> errors) {
  Trace t;
  int k = 0;
  for (double e : errors) t.push_back({k++, e, e, false, 0.0});
  return t;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("iterations_to_tol") {
  CHECK(iterations_to_tol(trace_of({1.0, 1e-3, 1e-9}), 1e-8) == 2);
  CHECK_FALSE(iterations_to_tol(trace_of({1.0, 1e-3, 1e-7}), 1e-8));
  CHECK(iterations_to_tol(trace_of({1.0, 1e-3}), std::numeric_limits<double>::infinity()) == 0);
}

TEST_CASE("configuration keys") {
  ExperimentConfig cfg;
  cfg.set("problem", "poisson");
  CHECK(cfg.problem == ProblemKind::s_laplacian);
  CHECK(cfg.s == 2.0);
  cfg.set("n", "32");
  cfg.set("N", "4");
  cfg.set("overlap", "2");
  cfg.set("level", "one");
  cfg.set("solver", "pcg");
  cfg.set("tau", "0.125");
  cfg.set("max-iter", "7");
  cfg.set("tol", "1e-6");
  CHECK(cfg.n == 32);
  CHECK(cfg.N == 4);
  CHECK(cfg.overlap == 2);
  CHECK(cfg.level == Level::one);
  CHECK(cfg.solver == SolverKind::pcg);
  CHECK(*cfg.tau == 0.125);
  CHECK(cfg.max_iterations == 7);
  CHECK(cfg.tolerance == 1e-6);
  CHECK_NOTHROW(cfg.validate());

  CHECK_THROWS_AS(cfg.set("n", "3x"), std::invalid_argument);
  CHECK_THROWS_AS(cfg.set("tol", "small"), std::invalid_argument);
  CHECK_THROWS_AS(cfg.set("colour", "red"), std::invalid_argument);
  CHECK_THROWS_AS(cfg.set("solver", "gmres"), std::invalid_argument);
}

TEST_CASE("inconsistent configurations are rejected") {
  ExperimentConfig cfg;
  cfg.solver = SolverKind::pcg;  // s = 4
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.overlap = 5;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.N = 7;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.problem = ProblemKind::dual_tv;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.level = Level::one;
  CHECK_NOTHROW(cfg.validate());
  cfg.N = 7;
  cfg.solver = SolverKind::fista;  // no decomposition involved
  CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("configuration file") {
  const auto dir = scratch_dir("config");
  const auto path = dir / "run.cfg";
  std::ofstream(path) << "# obstacle run\nproblem = obstacle\nn=32\nN = 4  # four subdomains per side\n\noverlap=2\n";
  const auto cfg = load_config_file(path.string());
  CHECK(cfg.problem == ProblemKind::obstacle);
  CHECK(cfg.n == 32);
  CHECK(cfg.N == 4);
  CHECK(cfg.overlap == 2);
  std::ofstream(dir / "bad.cfg") << "problem obstacle\n";
  CHECK_THROWS_AS(load_config_file((dir / "bad.cfg").string()), std::invalid_argument);
  CHECK_THROWS(load_config_file((dir / "missing.cfg").string()));
}

TEST_CASE("Poisson reference is the linear solve") {
  ExperimentConfig cfg;
  cfg.set("problem", "poisson");
  cfg.n = 4;
  const auto ref = compute_reference(cfg);
  const auto p = make_problem(cfg);
  CHECK(ref.generator == "direct");
  CHECK(testing::max_abs_diff(ref.u, solve_spd(p.stiffness(), p.load(), 1e-14)) < 1e-10);
  CHECK(ref.energy == doctest::Approx(energy_value(p, ref.u).value));
}

TEST_CASE("reference cache round trip and fingerprint check") {
  const auto dir = scratch_dir("cache");
  ExperimentConfig cfg;
  cfg.problem = ProblemKind::dual_tv;
  cfg.level = Level::one;
  cfg.n = 8;
  cfg.N = 2;
  cfg.overlap = 1;
  cfg.reference_dir = dir.string();

  bool cached = true;
  const auto first = obtain_reference(cfg, &cached);
  CHECK_FALSE(cached);
  CHECK(first.generator == "fista_restart_1e5");
  const auto path = reference_file(cfg);
  REQUIRE(fs::exists(path));
  const auto text = read_file(path);
  CHECK(text.rfind("AASM-REFERENCE\nversion 1\nfingerprint ", 0) == 0);

  const auto second = obtain_reference(cfg, &cached);
  CHECK(cached);
  CHECK(second.u == first.u);
  CHECK(second.energy == first.energy);
  CHECK(second.fingerprint == reference_fingerprint(cfg));

  // decomposition settings do not change the reference
  auto other = cfg;
  other.N = 4;
  CHECK(reference_fingerprint(other) == reference_fingerprint(cfg));
  other.n = 16;
  CHECK(reference_fingerprint(other) != reference_fingerprint(cfg));
  CHECK_THROWS_AS(load_reference(path, reference_fingerprint(other)), std::runtime_error);

  auto pinned = other;
  pinned.reference_path = path;
  CHECK_THROWS_AS(obtain_reference(pinned), std::runtime_error);
}

TEST_CASE("dual TV reference is below every solver iterate") {
  ExperimentConfig cfg;
  cfg.problem = ProblemKind::dual_tv;
  cfg.level = Level::one;
  cfg.n = 8;
  cfg.N = 2;
  cfg.overlap = 1;
  cfg.tolerance = 0.0;
  cfg.max_iterations = 60;
  const auto ref = compute_reference(cfg);
  for (auto solver : {SolverKind::asm_plain, SolverKind::accel_asm, SolverKind::fb, SolverKind::fista,
                      SolverKind::fista_restart}) {
    cfg.solver = solver;
    const auto res = run_experiment(cfg, ref);
    for (const auto& r : res.trace) CHECK(ref.energy <= r.energy + 1e-12);
  }
}

TEST_CASE("every solver writes a well-formed trace") {
  const auto dir = scratch_dir("trace");
  ExperimentConfig cfg;
  cfg.set("problem", "poisson");
  cfg.n = 16;
  cfg.N = 4;
  cfg.overlap = 2;
  cfg.max_iterations = 25;
  cfg.tolerance = 0.0;
  const auto ref = compute_reference(cfg);
  for (auto solver : {SolverKind::asm_plain, SolverKind::accel_asm, SolverKind::fb, SolverKind::fista,
                      SolverKind::fista_restart, SolverKind::pcg}) {
    INFO(to_string(solver));
    cfg.solver = solver;
    cfg.output_path = (dir / (std::string(to_string(solver)) + ".csv")).string();
    const auto res = run_experiment(cfg, ref);
    std::ifstream in(cfg.output_path);
    std::string line;
    std::getline(in, line);
    CHECK(line == kTraceHeader);
    int expected = 0;
    while (std::getline(in, line)) {
      std::stringstream row(line);
      std::string field;
      std::vector<std::string> fields;
      while (std::getline(row, field, ',')) fields.push_back(field);
      REQUIRE(fields.size() == 5);
      CHECK(std::stoi(fields[0]) == expected++);
      CHECK(std::stod(fields[2]) >= -1e-12);
      CHECK((fields[3] == "0" || fields[3] == "1"));
      CHECK(std::stod(fields[4]) >= 0.0);
    }
    CHECK(expected == static_cast<int>(res.trace.size()));
    CHECK(expected >= 2);
  }
}

TEST_CASE("zero iterations give the initial row only") {
  ExperimentConfig cfg;
  cfg.n = 16;
  cfg.N = 4;
  cfg.overlap = 2;
  cfg.max_iterations = 0;
  for (auto solver : {SolverKind::asm_plain, SolverKind::fista}) {
    cfg.solver = solver;
    const auto res = run_experiment(cfg);
    REQUIRE(res.trace.size() == 1);
    CHECK(res.trace[0].iter == 0);
    CHECK(res.trace[0].energy == 0.0);
  }
}

TEST_CASE("repeated runs produce identical energies") {
  ExperimentConfig cfg;
  cfg.problem = ProblemKind::obstacle;
  cfg.n = 16;
  cfg.N = 4;
  cfg.overlap = 2;
  cfg.max_iterations = 15;
  cfg.tolerance = 0.0;
  const auto ref = compute_reference(cfg);
  const auto a = run_experiment(cfg, ref);
  const auto b = run_experiment(cfg, ref);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t k = 0; k < a.trace.size(); ++k) CHECK(a.trace[k].energy == b.trace[k].energy);
  CHECK(a.solution == b.solution);
}

TEST_CASE("scalability table") {
  const auto dir = scratch_dir("table");
  ExperimentConfig cfg;
  cfg.reference_dir = dir.string();
  cfg.max_iterations = 200;
  const auto cells = table_scalability(cfg, {2}, {4}, 1);
  REQUIRE(cells.size() == 1);
  CHECK(cells[0].n == 8);
  CHECK(cells[0].N == 4);
  // a single cell is one run plus iterations_to_tol
  auto single = cfg;
  single.n = 8;
  single.N = 4;
  single.overlap = 1;
  const auto res = run_experiment(single);
  CHECK(cells[0].iterations == iterations_to_tol(res.trace, 1e-8));
  REQUIRE(cells[0].iterations);

  std::ostringstream csv, text;
  write_table_csv(csv, cells, cfg);
  write_table_text(text, cells, cfg);
  CHECK(csv.str().find("level=two") != std::string::npos);
  CHECK(csv.str().find("ratio,H,h,n,N,overlap,iterations\n2,1/4,1/8,8,4,") != std::string::npos);
  CHECK(text.str().find("1/8") != std::string::npos);
}
