#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "aasm/decomposition.hpp"
#include "aasm/problems.hpp"
#include "aasm/schwarz.hpp"

namespace aasm {

enum class SolverKind { asm_plain, accel_asm, fista, fista_restart, fb, pcg };

SolverKind parse_solver_kind(std::string_view name);
std::string_view to_string(SolverKind kind);

struct ExperimentConfig {
  ProblemKind problem = ProblemKind::s_laplacian;
  double s = 4.0;
  int n = 64;
  int N = 8;
  int overlap = 4;
  Level level = Level::two;
  SolverKind solver = SolverKind::accel_asm;
  std::optional<double> tau;
  int max_iterations = 100;
  /// Energy-error stop E(u) - E(u*) < tolerance; <= 0 runs all iterations.
  double tolerance = 1e-8;
  /// Reference cache file; when empty a file under reference_dir is used,
  /// and with both empty the reference is computed in memory.
  std::string reference_path;
  std::string reference_dir;
  std::string output_path;
  std::uint64_t seed = 0;  // reserved
  int reference_iterations = 100000;
  /// Early exit of the reference run once the successive-iterate metric
  /// falls below this value (<= 0: always run reference_iterations).
  double reference_step_tolerance = 1e-30;

  MeshParams mesh() const { return {n, N, overlap}; }
  /// Throws std::invalid_argument on an inconsistent configuration.
  void validate() const;
  /// Applies one key=value setting (keys as the CLI flags without dashes).
  void set(std::string_view key, std::string_view value);
};

/// Reads a flat key=value file ('#' comments) on top of `base`.
ExperimentConfig load_config_file(const std::string& path, ExperimentConfig base = {});

Problem make_problem(const ExperimentConfig& cfg);
DecompositionPlan make_plan(const ExperimentConfig& cfg, const Problem& p);

struct ReferenceSolution {
  std::uint64_t fingerprint = 0;
  Vector u;
  double energy = 0.0;
  std::string generator;
};

inline constexpr std::string_view kReferenceMagic = "AASM-REFERENCE";
inline constexpr int kReferenceVersion = 1;

/// Hash of the configuration subset the reference depends on.
std::uint64_t reference_fingerprint(const ExperimentConfig& cfg);
std::string reference_file(const ExperimentConfig& cfg);

/// Direct solve for the linear problem, otherwise FISTA with adaptive
/// restart on the full problem.
ReferenceSolution compute_reference(const ExperimentConfig& cfg);
void save_reference(const std::string& path, const ReferenceSolution& ref);
/// Throws std::runtime_error when the stored fingerprint differs.
ReferenceSolution load_reference(const std::string& path, std::uint64_t expected_fingerprint);
/// Loads the cached reference or computes and stores it.
ReferenceSolution obtain_reference(const ExperimentConfig& cfg, bool* from_cache = nullptr);

struct ExperimentResult {
  Trace trace;
  Vector solution;
  double reference_energy = 0.0;
  SchwarzStats stats;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);
ExperimentResult run_experiment(const ExperimentConfig& cfg, const ReferenceSolution& ref);

inline constexpr std::string_view kTraceHeader = "iter,energy,energy_error,restarted,wall_s";
void write_trace_csv(std::ostream& os, const Trace& trace);
void write_trace_csv(const std::string& path, const Trace& trace);

/// Smallest iteration index whose energy error is below tol.
std::optional<int> iterations_to_tol(const Trace& trace, double tol);

struct ScalabilityCell {
  int ratio;  // H/h
  int N;
  int n;
  std::optional<int> iterations;
};

/// Iterations to reach the energy error 1e-8 over every (H/h, N) pair.
std::vector<ScalabilityCell> table_scalability(const ExperimentConfig& base, const std::vector<int>& ratios,
                                               const std::vector<int>& coarse_counts, int overlap);
void write_table_csv(std::ostream& os, const std::vector<ScalabilityCell>& cells, const ExperimentConfig& base);
void write_table_text(std::ostream& os, const std::vector<ScalabilityCell>& cells, const ExperimentConfig& base);

}  // namespace aasm
