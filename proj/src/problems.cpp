#include "aasm/problems.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "aasm/linalg.hpp"

namespace aasm {

ProblemKind parse_problem_kind(std::string_view name) {
  if (name == "slap" || name == "s_laplacian" || name == "s-laplacian" || name == "poisson")
    return ProblemKind::s_laplacian;
  if (name == "obstacle") return ProblemKind::obstacle;
  if (name == "dualtv" || name == "dual_tv" || name == "dual-tv") return ProblemKind::dual_tv;
  throw std::invalid_argument("unknown problem '" + std::string(name) + "'");
}

std::string_view to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::s_laplacian:
      return "slap";
    case ProblemKind::obstacle:
      return "obstacle";
    case ProblemKind::dual_tv:
      return "dualtv";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// EnergyModel

EnergyModel EnergyModel::power(double s, double h, std::size_t num_free, std::vector<PowerElement> elements,
                               Vector load) {
  if (!(s > 1.0)) throw std::invalid_argument("power energy needs s > 1");
  if (load.size() != num_free) throw std::invalid_argument("power energy: load length mismatch");
  EnergyModel m;
  m.kind_ = Kind::power;
  m.s_ = s;
  m.metric_scale_ = h * h;
  m.num_free_ = num_free;
  m.power_ = std::move(elements);
  m.load_ = std::move(load);
  return m;
}

EnergyModel EnergyModel::divergence(std::size_t num_free, std::vector<DivergenceElement> elements) {
  EnergyModel m;
  m.kind_ = Kind::divergence;
  m.num_free_ = num_free;
  m.divergence_ = std::move(elements);
  m.load_.assign(num_free, 0.0);
  return m;
}

void EnergyModel::set_frozen(std::span<const double> values) {
  if (values.size() != num_frozen()) throw std::invalid_argument("EnergyModel: frozen value count mismatch");
  std::copy(values.begin(), values.end(), frozen_.begin() + 1);
}

namespace {

struct PowerLaw {
  double s;

  // |g|^s / s and |g|^(s-2) from q = |g|^2
  double energy(double q) const {
    if (s == 2.0) return 0.5 * q;
    if (s == 4.0) return 0.25 * q * q;
    return std::pow(q, 0.5 * s) / s;
  }
  double weight(double q) const {
    if (s == 2.0) return 1.0;
    if (s == 4.0) return q;
    return std::pow(std::max(q, 1e-24), 0.5 * (s - 2.0));
  }
};

}  // namespace

double EnergyModel::value(std::span<const double> x) const {
  if (x.size() != num_free_) throw std::invalid_argument("EnergyModel::value: length mismatch");
  const std::size_t nf = num_free_;
  auto at = [&](int slot) { return static_cast<std::size_t>(slot) < nf ? x[slot] : frozen_[slot - nf]; };
  double e = 0.0;
  if (kind_ == Kind::power) {
    const PowerLaw law{s_};
    for (const auto& el : power_) {
      double gx = 0.0, gy = 0.0;
      for (int a = 0; a < 3; ++a) {
        const double z = at(el.slot[a]);
        gx += z * el.grad[a][0];
        gy += z * el.grad[a][1];
      }
      e += el.area * law.energy(gx * gx + gy * gy);
    }
  } else {
    for (const auto& el : divergence_) {
      double r = el.offset;
      for (int a = 0; a < 4; ++a) r += el.sign[a] * at(el.slot[a]);
      e += 0.5 * r * r;
    }
  }
  for (std::size_t i = 0; i < nf; ++i) e -= load_[i] * x[i];
  return e;
}

double EnergyModel::value_and_gradient(std::span<const double> x, std::span<double> grad) const {
  if (x.size() != num_free_ || grad.size() != num_free_)
    throw std::invalid_argument("EnergyModel::value_and_gradient: length mismatch");
  const std::size_t nf = num_free_;
  auto at = [&](int slot) { return static_cast<std::size_t>(slot) < nf ? x[slot] : frozen_[slot - nf]; };
  for (std::size_t i = 0; i < nf; ++i) grad[i] = -load_[i];
  double e = 0.0;
  if (kind_ == Kind::power) {
    const PowerLaw law{s_};
    for (const auto& el : power_) {
      double gx = 0.0, gy = 0.0;
      for (int a = 0; a < 3; ++a) {
        const double z = at(el.slot[a]);
        gx += z * el.grad[a][0];
        gy += z * el.grad[a][1];
      }
      const double q = gx * gx + gy * gy;
      e += el.area * law.energy(q);
      const double w = el.area * law.weight(q);
      for (int a = 0; a < 3; ++a) {
        const auto slot = static_cast<std::size_t>(el.slot[a]);
        if (slot < nf) grad[slot] += w * (gx * el.grad[a][0] + gy * el.grad[a][1]);
      }
    }
  } else {
    for (const auto& el : divergence_) {
      double r = el.offset;
      for (int a = 0; a < 4; ++a) r += el.sign[a] * at(el.slot[a]);
      e += 0.5 * r * r;
      for (int a = 0; a < 4; ++a) {
        const auto slot = static_cast<std::size_t>(el.slot[a]);
        if (slot < nf) grad[slot] += el.sign[a] * r;
      }
    }
  }
  for (std::size_t i = 0; i < nf; ++i) e -= load_[i] * x[i];
  return e;
}

double EnergyModel::step_metric(std::span<const double> dx) const {
  if (dx.size() != num_free_) throw std::invalid_argument("EnergyModel::step_metric: length mismatch");
  if (kind_ == Kind::power) return metric_scale_ * norm_sq(dx);
  double s = 0.0;
  for (const auto& el : divergence_) {
    double r = 0.0;
    for (int a = 0; a < 4; ++a)
      if (static_cast<std::size_t>(el.slot[a]) < num_free_) r += el.sign[a] * dx[el.slot[a]];
    s += r * r;
  }
  return s;
}

EnergyModel EnergyModel::patch(std::span<const int> free_dofs, std::vector<int>& frozen_dofs) const {
  if (num_frozen() != 0) throw std::logic_error("EnergyModel::patch: only global models can be restricted");
  const std::size_t nf_local = free_dofs.size();
  std::vector<int> local(num_free_, -1);
  for (std::size_t a = 0; a < nf_local; ++a) {
    const int g = free_dofs[a];
    if (g < 0 || static_cast<std::size_t>(g) >= num_free_) throw std::out_of_range("patch: DOF out of range");
    local[g] = static_cast<int>(a);
  }
  frozen_dofs.clear();
  std::unordered_map<int, int> frozen_slot;
  auto remap = [&](int slot) -> int {
    if (static_cast<std::size_t>(slot) >= num_free_) return static_cast<int>(nf_local);  // boundary
    if (local[slot] >= 0) return local[slot];
    auto [it, inserted] = frozen_slot.try_emplace(slot, static_cast<int>(nf_local + 1 + frozen_dofs.size()));
    if (inserted) frozen_dofs.push_back(slot);
    return it->second;
  };
  auto touches = [&](const auto& slots) {
    return std::any_of(slots.begin(), slots.end(), [&](int s) {
      return static_cast<std::size_t>(s) < num_free_ && local[s] >= 0;
    });
  };

  EnergyModel m;
  m.kind_ = kind_;
  m.s_ = s_;
  m.metric_scale_ = metric_scale_;
  m.num_free_ = nf_local;
  m.load_.resize(nf_local);
  for (std::size_t a = 0; a < nf_local; ++a) m.load_[a] = load_[free_dofs[a]];
  if (kind_ == Kind::power) {
    for (const auto& el : power_) {
      if (!touches(el.slot)) continue;
      PowerElement e = el;
      for (auto& s : e.slot) s = remap(s);
      m.power_.push_back(e);
    }
  } else {
    for (const auto& el : divergence_) {
      if (!touches(el.slot)) continue;
      DivergenceElement e = el;
      for (auto& s : e.slot) s = remap(s);
      m.divergence_.push_back(e);
    }
  }
  m.frozen_.assign(frozen_dofs.size() + 1, 0.0);
  return m;
}

// ---------------------------------------------------------------------------
// Problem

namespace {

std::vector<PowerElement> p1_elements(const P1Space& space) {
  const int boundary = static_cast<int>(space.num_dofs());
  std::vector<PowerElement> out;
  out.reserve(space.triangles().size());
  for (const auto& t : space.triangles()) {
    PowerElement e{};
    for (int a = 0; a < 3; ++a) {
      const int dof = space.node_dof(t.nodes[a]);
      e.slot[a] = dof >= 0 ? dof : boundary;
      e.grad[a] = t.basis_gradients[a];
    }
    e.area = t.area;
    out.push_back(e);
  }
  return out;
}

// int f phi_i with f sampled at triangle centroids (exact vertex-average rule
// for the piecewise-constant representative).
Vector p1_load(const P1Space& space, const ScalarField& f) {
  Vector load(space.num_dofs(), 0.0);
  for (const auto& t : space.triangles()) {
    double cx = 0.0, cy = 0.0;
    for (int a = 0; a < 3; ++a) {
      const Vec2 p = space.node_coords(t.nodes[a]);
      cx += p[0] / 3.0;
      cy += p[1] / 3.0;
    }
    const double share = f(cx, cy) * t.area / 3.0;
    for (int a = 0; a < 3; ++a) {
      const int dof = space.node_dof(t.nodes[a]);
      if (dof >= 0) load[dof] += share;
    }
  }
  return load;
}

void check_fine_mesh(const MeshParams& mesh) {
  if (mesh.cells_per_side < 2) throw std::invalid_argument("problem: need at least 2 cells per side");
}

}  // namespace

Problem Problem::s_laplacian(const MeshParams& mesh, double s, const ScalarField& f) {
  check_fine_mesh(mesh);
  if (!(s > 1.0)) throw std::invalid_argument("s-Laplacian needs s > 1");
  Problem p;
  p.kind_ = ProblemKind::s_laplacian;
  p.s_ = s;
  p.mesh_ = mesh;
  auto space = std::make_shared<P1Space>(mesh.cells_per_side, MeshLevel::fine);
  p.model_ = EnergyModel::power(s, mesh.h(), space->num_dofs(), p1_elements(*space), p1_load(*space, f));
  p.stiffness_ = std::make_shared<SparseMatrix>(assemble_stiffness(*space));
  p.p1_ = std::move(space);
  return p;
}

Problem Problem::obstacle(const MeshParams& mesh, const ScalarField& lower, const ScalarField& upper) {
  check_fine_mesh(mesh);
  Problem p;
  p.kind_ = ProblemKind::obstacle;
  p.s_ = 2.0;
  p.mesh_ = mesh;
  auto space = std::make_shared<P1Space>(mesh.cells_per_side, MeshLevel::fine);
  p.model_ = EnergyModel::power(2.0, mesh.h(), space->num_dofs(), p1_elements(*space),
                                Vector(space->num_dofs(), 0.0));
  p.lower_ = nodal_interpolate(lower, *space);
  p.upper_ = nodal_interpolate(upper, *space);
  for (std::size_t i = 0; i < p.lower_.size(); ++i)
    if (p.lower_[i] > p.upper_[i]) throw std::invalid_argument("obstacle: lower obstacle exceeds upper obstacle");
  p.stiffness_ = std::make_shared<SparseMatrix>(assemble_stiffness(*space));
  p.p1_ = std::move(space);
  return p;
}

Problem Problem::dual_tv(const MeshParams& mesh, const ScalarField& f) {
  check_fine_mesh(mesh);
  Problem p;
  p.kind_ = ProblemKind::dual_tv;
  p.s_ = 2.0;
  p.mesh_ = mesh;
  auto space = std::make_shared<RT0Space>(mesh.cells_per_side);
  const int boundary = static_cast<int>(space->num_dofs());
  const auto edges = space->edges();
  const double h = space->h();
  std::vector<DivergenceElement> elements;
  elements.reserve(space->num_cells());
  for (std::size_t c = 0; c < space->num_cells(); ++c) {
    const auto& cell = space->cells()[c];
    DivergenceElement e{};
    for (int a = 0; a < 4; ++a) {
      const int dof = edges[cell.edges[a]].dof;
      e.slot[a] = dof >= 0 ? dof : boundary;
      e.sign[a] = RT0Space::kOutwardSign[a];
    }
    const Vec2 x = space->cell_center(static_cast<int>(c));
    e.offset = h * f(x[0], x[1]);
    elements.push_back(e);
  }
  p.model_ = EnergyModel::divergence(space->num_dofs(), std::move(elements));
  p.lower_.assign(space->num_dofs(), -1.0);
  p.upper_.assign(space->num_dofs(), 1.0);
  p.rt0_ = std::move(space);
  return p;
}

const P1Space& Problem::p1_space() const {
  if (!p1_) throw std::logic_error("problem is not posed on a P1 space");
  return *p1_;
}

const RT0Space& Problem::rt0_space() const {
  if (!rt0_) throw std::logic_error("problem is not posed on an RT0 space");
  return *rt0_;
}

const SparseMatrix& Problem::stiffness() const {
  if (!stiffness_) throw std::logic_error("stiffness matrix is only available for P1 problems");
  return *stiffness_;
}

double unit_source(double, double) { return 1.0; }

double centered_disk_floor(double x, double y) {
  const double dx = x - 0.5, dy = y - 0.5;
  return dx * dx + dy * dy <= 1.0 / 256.0 ? 1.0 : 0.0;
}

double corner_disk_ceiling(double x, double y) {
  const double dx = x - 0.25, dy = y - 0.25;
  return dx * dx + dy * dy <= 1.0 / 256.0 ? 0.0 : 1.0;
}

double centered_disk_source(double x, double y) {
  const double dx = x - 0.5, dy = y - 0.5;
  return dx * dx + dy * dy <= 1.0 / 16.0 ? 1.0 : 0.0;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

void check_length(const Problem& p, std::span<const double> u, const char* what) {
  if (u.size() != p.num_dofs()) throw std::invalid_argument(std::string(what) + ": vector does not match the problem space");
}

}  // namespace

bool is_feasible(const Problem& p, std::span<const double> u) {
  check_length(p, u, "is_feasible");
  if (!p.has_bounds()) return true;
  const auto lo = p.lower();
  const auto hi = p.upper();
  for (std::size_t i = 0; i < u.size(); ++i)
    if (u[i] < lo[i] - kFeasibilityTolerance || u[i] > hi[i] + kFeasibilityTolerance) return false;
  return true;
}

EnergyValue energy_value(const Problem& p, std::span<const double> u) {
  check_length(p, u, "energy_value");
  if (!is_feasible(p, u)) return {std::numeric_limits<double>::infinity()};
  return {p.model().value(u)};
}

Vector grad_F(const Problem& p, std::span<const double> u) {
  check_length(p, u, "grad_F");
  Vector g(u.size());
  p.model().value_and_gradient(u, g);
  return g;
}

void project_onto_domain(const Problem& p, std::span<double> u) {
  if (!p.has_bounds()) return;
  const auto lo = p.lower();
  const auto hi = p.upper();
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::clamp(u[i], lo[i], hi[i]);
}

Vector prox_G(const Problem& p, std::span<const double> u) {
  check_length(p, u, "prox_G");
  Vector out(u.begin(), u.end());
  project_onto_domain(p, out);
  return out;
}

Vector initial_guess(const Problem& p) {
  if (p.kind() == ProblemKind::obstacle) return Vector(p.lower().begin(), p.lower().end());
  return Vector(p.num_dofs(), 0.0);
}

LocalSolverConfig default_local_config(const Problem& p) {
  LocalSolverConfig cfg;
  if (p.kind() == ProblemKind::dual_tv) {
    cfg.backtracking = false;
    cfg.fixed_step = 1.0 / 8.0;
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Local problems

LocalProblem::LocalProblem(const Problem& p, std::span<const int> dofs)
    : dofs_(dofs.begin(), dofs.end()), frozen_dofs_(), model_(p.model().patch(dofs_, frozen_dofs_)) {
  if (p.has_bounds()) {
    lower_.reserve(dofs_.size());
    upper_.reserve(dofs_.size());
    for (int g : dofs_) {
      lower_.push_back(p.lower()[g]);
      upper_.push_back(p.upper()[g]);
    }
  }
  base_.assign(dofs_.size(), 0.0);
  frozen_values_.assign(frozen_dofs_.size(), 0.0);
}

void LocalProblem::set_base(std::span<const double> u) {
  for (std::size_t a = 0; a < dofs_.size(); ++a) base_[a] = u[dofs_[a]];
  for (std::size_t k = 0; k < frozen_dofs_.size(); ++k) frozen_values_[k] = u[frozen_dofs_[k]];
  model_.set_frozen(frozen_values_);
}

void LocalProblem::project(std::span<double> y) const {
  if (lower_.empty()) return;
  for (std::size_t a = 0; a < y.size(); ++a) y[a] = std::clamp(y[a], lower_[a], upper_[a]);
}

LocalSolution solve_local(LocalProblem& local, std::span<const double> base, const LocalSolverConfig& cfg) {
  local.set_base(base);
  Vector y0(local.base().begin(), local.base().end());
  const double e0 = local.value(y0);
  auto res = fista_restart(local, y0, cfg, StopRule{cfg.max_iterations, cfg.stop_tolerance});
  LocalSolution out;
  out.iterations = res.iterations;
  out.converged = res.converged;
  out.w.resize(y0.size());
  if (!(local.value(res.x) <= e0)) {
    std::fill(out.w.begin(), out.w.end(), 0.0);
    return out;
  }
  for (std::size_t a = 0; a < y0.size(); ++a) out.w[a] = res.x[a] - y0[a];
  return out;
}

Vector local_energy_min(const Problem& p, std::span<const double> base, const SubspaceMap& map,
                        const LocalSolverConfig& cfg) {
  check_length(p, base, "local_energy_min");
  if (p.is_linear()) {
    const auto& a = p.stiffness();
    Vector r = a.multiply(base);
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = p.load()[i] - r[i];
    const Vector rhs = restrict_to(r, map);
    if (norm_sq(rhs) == 0.0) return Vector(map.size(), 0.0);
    return solve_spd(a.principal_submatrix(map.dofs), rhs, 1e-12);
  }
  LocalProblem local(p, map.dofs);
  auto sol = solve_local(local, base, cfg);
  return std::move(sol.w);
}

}  // namespace aasm
