#include "aasm/bench.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "aasm/linalg.hpp"

namespace aasm {

SolverKind parse_solver_kind(std::string_view name) {
  if (name == "asm") return SolverKind::asm_plain;
  if (name == "accel_asm" || name == "accel-asm") return SolverKind::accel_asm;
  if (name == "fista") return SolverKind::fista;
  if (name == "fista_restart" || name == "fista-restart") return SolverKind::fista_restart;
  if (name == "fb") return SolverKind::fb;
  if (name == "pcg") return SolverKind::pcg;
  throw std::invalid_argument("unknown solver '" + std::string(name) + "'");
}

std::string_view to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::asm_plain:
      return "asm";
    case SolverKind::accel_asm:
      return "accel_asm";
    case SolverKind::fista:
      return "fista";
    case SolverKind::fista_restart:
      return "fista_restart";
    case SolverKind::fb:
      return "fb";
    case SolverKind::pcg:
      return "pcg";
  }
  return "?";
}

namespace {

bool uses_decomposition(SolverKind k) {
  return k == SolverKind::asm_plain || k == SolverKind::accel_asm || k == SolverKind::pcg;
}

double parse_double(std::string_view key, std::string_view v) {
  const std::string s(v);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size())
    throw std::invalid_argument("config: '" + std::string(key) + "' expects a number, got '" + s + "'");
  return out;
}

long long parse_int(std::string_view key, std::string_view v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw std::invalid_argument("config: '" + std::string(key) + "' expects an integer, got '" + std::string(v) + "'");
  return out;
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (n < 2) throw std::invalid_argument("config: n must be at least 2");
  if (problem == ProblemKind::s_laplacian && !(s > 1.0)) throw std::invalid_argument("config: s must exceed 1");
  if (max_iterations < 0) throw std::invalid_argument("config: max-iter must be nonnegative");
  if (reference_iterations < 1) throw std::invalid_argument("config: ref-iters must be positive");
  if (tau && !(*tau >= 0.0)) throw std::invalid_argument("config: tau must be nonnegative");
  if (uses_decomposition(solver)) {
    mesh().validate();
    if (problem == ProblemKind::dual_tv && level == Level::two)
      throw std::invalid_argument("config: the dual TV problem only has a one-level decomposition");
  }
  if (solver == SolverKind::pcg && !(problem == ProblemKind::s_laplacian && s == 2.0))
    throw std::invalid_argument("config: pcg requires the Poisson problem (s = 2)");
}

void ExperimentConfig::set(std::string_view key, std::string_view value) {
  if (key == "problem") {
    problem = parse_problem_kind(value);
    if (value == "poisson") s = 2.0;
  } else if (key == "s") {
    s = parse_double(key, value);
  } else if (key == "n") {
    n = static_cast<int>(parse_int(key, value));
  } else if (key == "N") {
    N = static_cast<int>(parse_int(key, value));
  } else if (key == "overlap") {
    overlap = static_cast<int>(parse_int(key, value));
  } else if (key == "level") {
    level = parse_level(value);
  } else if (key == "solver") {
    solver = parse_solver_kind(value);
  } else if (key == "tau") {
    tau = parse_double(key, value);
  } else if (key == "max-iter" || key == "max_iter") {
    max_iterations = static_cast<int>(parse_int(key, value));
  } else if (key == "tol") {
    tolerance = parse_double(key, value);
  } else if (key == "ref") {
    reference_path = std::string(value);
  } else if (key == "ref-dir" || key == "ref_dir") {
    reference_dir = std::string(value);
  } else if (key == "out") {
    output_path = std::string(value);
  } else if (key == "seed") {
    seed = static_cast<std::uint64_t>(parse_int(key, value));
  } else if (key == "ref-iters" || key == "ref_iters") {
    reference_iterations = static_cast<int>(parse_int(key, value));
  } else if (key == "ref-step-tol" || key == "ref_step_tol") {
    reference_step_tolerance = parse_double(key, value);
  } else {
    throw std::invalid_argument("config: unknown key '" + std::string(key) + "'");
  }
}

ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv = line;
    if (const auto hash = sv.find('#'); hash != std::string_view::npos) sv = sv.substr(0, hash);
    sv = trim(sv);
    if (sv.empty()) continue;
    const auto eq = sv.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected key=value");
    base.set(trim(sv.substr(0, eq)), trim(sv.substr(eq + 1)));
  }
  return base;
}

Problem make_problem(const ExperimentConfig& cfg) {
  const MeshParams mesh = cfg.mesh();
  switch (cfg.problem) {
    case ProblemKind::s_laplacian:
      return Problem::s_laplacian(mesh, cfg.s, unit_source);
    case ProblemKind::obstacle:
      return Problem::obstacle(mesh, centered_disk_floor, corner_disk_ceiling);
    case ProblemKind::dual_tv:
      return Problem::dual_tv(mesh, centered_disk_source);
  }
  throw std::invalid_argument("make_problem: unknown problem");
}

DecompositionPlan make_plan(const ExperimentConfig& cfg, const Problem& p) {
  DecompositionPlan plan = p.is_p1() ? build_decomposition(cfg.mesh(), p.p1_space(), cfg.level)
                                     : build_decomposition(cfg.mesh(), p.rt0_space(), cfg.level);
  if (cfg.tau) plan.step_size = *cfg.tau;
  return plan;
}

// ---------------------------------------------------------------------------
// References

std::uint64_t reference_fingerprint(const ExperimentConfig& cfg) {
  std::string key = "problem=" + std::string(to_string(cfg.problem)) + ";n=" + std::to_string(cfg.n);
  if (cfg.problem == ProblemKind::s_laplacian) key += ";s=" + format_double(cfg.s);
  const bool direct = cfg.problem == ProblemKind::s_laplacian && cfg.s == 2.0;
  if (!direct)
    key += ";iters=" + std::to_string(cfg.reference_iterations) +
           ";steptol=" + format_double(cfg.reference_step_tolerance);
  key += ";v" + std::to_string(kReferenceVersion);
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : key) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string reference_file(const ExperimentConfig& cfg) {
  if (!cfg.reference_path.empty()) return cfg.reference_path;
  if (cfg.reference_dir.empty()) return {};
  std::ostringstream name;
  name << "ref_" << to_string(cfg.problem);
  if (cfg.problem == ProblemKind::s_laplacian) name << "_s" << cfg.s;
  name << "_n" << cfg.n << "_" << std::hex << std::setw(16) << std::setfill('0') << reference_fingerprint(cfg)
       << ".txt";
  return (std::filesystem::path(cfg.reference_dir) / name.str()).string();
}

ReferenceSolution compute_reference(const ExperimentConfig& cfg) {
  ExperimentConfig full = cfg;
  full.solver = SolverKind::fista_restart;
  full.validate();
  const Problem p = make_problem(cfg);
  ReferenceSolution ref;
  ref.fingerprint = reference_fingerprint(cfg);
  if (p.is_linear()) {
    ref.u = solve_spd(p.stiffness(), p.load(), 1e-14);
    ref.generator = "direct";
  } else {
    const GlobalObjective obj(p);
    const auto res = fista_restart(obj, initial_guess(p), default_local_config(p),
                                   StopRule{cfg.reference_iterations, cfg.reference_step_tolerance});
    ref.u = res.x;
    ref.generator = "fista_restart_1e5";
  }
  ref.energy = energy_value(p, ref.u).value;
  if (!std::isfinite(ref.energy)) throw SolverError("reference solution has non-finite energy");
  return ref;
}

void save_reference(const std::string& path, const ReferenceSolution& ref) {
  if (const auto dir = std::filesystem::path(path).parent_path(); !dir.empty())
    std::filesystem::create_directories(dir);
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write reference file '" + path + "'");
    out << kReferenceMagic << '\n'
        << "version " << kReferenceVersion << '\n'
        << "fingerprint " << std::hex << std::setw(16) << std::setfill('0') << ref.fingerprint << std::dec << '\n'
        << "generator " << ref.generator << '\n'
        << "energy " << format_double(ref.energy) << '\n'
        << "dofs " << ref.u.size() << '\n';
    for (double x : ref.u) out << format_double(x) << '\n';
    if (!out) throw std::runtime_error("failed writing reference file '" + path + "'");
  }
  std::filesystem::rename(tmp, path);
}

ReferenceSolution load_reference(const std::string& path, std::uint64_t expected_fingerprint) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open reference file '" + path + "'");
  auto expect = [&](const std::string& word) {
    std::string w;
    if (!(in >> w) || w != word) throw std::runtime_error(path + ": malformed reference header, expected '" + word + "'");
  };
  std::string magic;
  in >> magic;
  if (magic != kReferenceMagic) throw std::runtime_error(path + ": not a reference file");
  expect("version");
  int version = 0;
  in >> version;
  if (version != kReferenceVersion) throw std::runtime_error(path + ": unsupported reference version");
  ReferenceSolution ref;
  expect("fingerprint");
  in >> std::hex >> ref.fingerprint >> std::dec;
  if (ref.fingerprint != expected_fingerprint)
    throw std::runtime_error(path + ": reference fingerprint does not match the configuration");
  expect("generator");
  in >> ref.generator;
  expect("energy");
  std::string energy;
  in >> energy;
  ref.energy = std::stod(energy);
  expect("dofs");
  std::size_t count = 0;
  in >> count;
  ref.u.resize(count);
  std::string value;
  for (std::size_t i = 0; i < count; ++i) {
    if (!(in >> value)) throw std::runtime_error(path + ": truncated reference file");
    ref.u[i] = std::stod(value);
  }
  return ref;
}

ReferenceSolution obtain_reference(const ExperimentConfig& cfg, bool* from_cache) {
  const std::string path = reference_file(cfg);
  if (!path.empty() && std::filesystem::exists(path)) {
    if (from_cache) *from_cache = true;
    return load_reference(path, reference_fingerprint(cfg));
  }
  if (from_cache) *from_cache = false;
  ReferenceSolution ref = compute_reference(cfg);
  if (!path.empty()) save_reference(path, ref);
  return ref;
}

// ---------------------------------------------------------------------------
// Runs

ExperimentResult run_experiment(const ExperimentConfig& cfg) { return run_experiment(cfg, obtain_reference(cfg)); }

ExperimentResult run_experiment(const ExperimentConfig& cfg, const ReferenceSolution& ref) {
  cfg.validate();
  const Problem p = make_problem(cfg);
  if (ref.u.size() != p.num_dofs()) throw std::invalid_argument("run_experiment: reference has the wrong size");
  ExperimentResult out;
  out.reference_energy = ref.energy;
  SolveOptions opt;
  opt.max_iterations = cfg.max_iterations;
  opt.reference_energy = ref.energy;
  opt.energy_tolerance = cfg.tolerance;

  switch (cfg.solver) {
    case SolverKind::asm_plain:
    case SolverKind::accel_asm: {
      SchwarzSolver solver(p, make_plan(cfg, p));
      auto res = cfg.solver == SolverKind::asm_plain ? solver.asm_solve(initial_guess(p), opt)
                                                     : solver.accel_asm_solve(initial_guess(p), opt);
      out.trace = std::move(res.trace);
      out.solution = std::move(res.solution);
      out.stats = solver.stats();
      break;
    }
    case SolverKind::pcg: {
      auto res = pcg_as(p, make_plan(cfg, p), initial_guess(p), 1e-15, cfg.max_iterations, ref.energy,
                        cfg.tolerance);
      out.trace = std::move(res.trace);
      out.solution = std::move(res.solution);
      break;
    }
    case SolverKind::fb:
    case SolverKind::fista:
    case SolverKind::fista_restart: {
      const auto start = std::chrono::steady_clock::now();
      auto record = [&](int iter, std::span<const double> u, bool restarted) {
        const double e = energy_value(p, u).value;
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        out.trace.push_back({iter, e, e - ref.energy, restarted, secs});
        return !(cfg.tolerance > 0.0 && e - ref.energy < cfg.tolerance);
      };
      Vector u0 = initial_guess(p);
      if (!record(0, u0, false) || cfg.max_iterations == 0) {
        out.solution = std::move(u0);
        break;
      }
      const Acceleration acc = cfg.solver == SolverKind::fb      ? Acceleration::none
                               : cfg.solver == SolverKind::fista ? Acceleration::momentum
                                                                 : Acceleration::adaptive_restart;
      const GlobalObjective obj(p);
      auto res = proximal_gradient(obj, std::move(u0), acc, default_local_config(p), StopRule{cfg.max_iterations, 0.0},
                                   [&](const IterationView& it) { return record(it.iteration, it.u, it.restarted); });
      out.solution = std::move(res.x);
      break;
    }
  }
  if (!cfg.output_path.empty()) write_trace_csv(cfg.output_path, out.trace);
  return out;
}

void write_trace_csv(std::ostream& os, const Trace& trace) {
  os << kTraceHeader << '\n';
  char buf[160];
  for (const auto& r : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%d,%.6f\n", r.iter, r.energy, r.energy_error, r.restarted ? 1 : 0,
                  r.wall_seconds);
    os << buf;
  }
}

void write_trace_csv(const std::string& path, const Trace& trace) {
  if (const auto dir = std::filesystem::path(path).parent_path(); !dir.empty())
    std::filesystem::create_directories(dir);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace file '" + path + "'");
  write_trace_csv(out, trace);
  if (!out) throw std::runtime_error("failed writing trace file '" + path + "'");
}

std::optional<int> iterations_to_tol(const Trace& trace, double tol) {
  for (const auto& r : trace)
    if (r.energy_error < tol) return r.iter;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Scalability tables

std::vector<ScalabilityCell> table_scalability(const ExperimentConfig& base, const std::vector<int>& ratios,
                                               const std::vector<int>& coarse_counts, int overlap) {
  constexpr double kTableTolerance = 1e-8;
  std::vector<ScalabilityCell> cells;
  for (int ratio : ratios)
    for (int N : coarse_counts) {
      ExperimentConfig cfg = base;
      cfg.N = N;
      cfg.n = ratio * N;
      cfg.overlap = overlap;
      cfg.tolerance = kTableTolerance;
      cfg.reference_path.clear();
      cfg.output_path.clear();
      const auto res = run_experiment(cfg);
      cells.push_back({ratio, N, cfg.n, iterations_to_tol(res.trace, kTableTolerance)});
    }
  return cells;
}

void write_table_csv(std::ostream& os, const std::vector<ScalabilityCell>& cells, const ExperimentConfig& base) {
  os << "# problem=" << to_string(base.problem) << " solver=" << to_string(base.solver)
     << " level=" << to_string(base.level) << " tol=1e-8\n";
  os << "ratio,H,h,n,N,overlap,iterations\n";
  for (const auto& c : cells) {
    os << c.ratio << ",1/" << c.N << ",1/" << c.n << ',' << c.n << ',' << c.N << ',' << base.overlap << ',';
    if (c.iterations) os << *c.iterations;
    os << '\n';
  }
}

void write_table_text(std::ostream& os, const std::vector<ScalabilityCell>& cells, const ExperimentConfig& base) {
  os << "problem " << to_string(base.problem) << ", " << to_string(base.solver) << ", " << to_string(base.level)
     << "-level, overlap " << base.overlap << "h\n";
  os << std::setw(6) << "H/h" << std::setw(8) << "H" << std::setw(8) << "h" << std::setw(8) << "#iter" << '\n';
  for (const auto& c : cells) {
    os << std::setw(6) << c.ratio << std::setw(8) << ("1/" + std::to_string(c.N)) << std::setw(8)
       << ("1/" + std::to_string(c.n)) << std::setw(8) << (c.iterations ? std::to_string(*c.iterations) : "-")
       << '\n';
  }
}

}  // namespace aasm
