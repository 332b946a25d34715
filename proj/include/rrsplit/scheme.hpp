#pragma once

// Loosely coupled Robin-Robin time stepping for the coupled
// parabolic/parabolic (k = 1) and parabolic/hyperbolic (k = 2) problems.
//
// Each step solves the solid part once with Robin data from the previous fluid
// state, then the fluid part once with the new solid velocity, and finally
// updates the interface multiplier coefficient-wise:
//
//   lambda^{n+1} = lambda^n - alpha (u^{n+1} - d_t^{k-1} w^{n+1} + g_D)
//
// The multiplier lives in the P1 trace space of the matched interface, so the
// interface L2 projections reduce to identities on nodal coefficients.

#include "rrsplit/cases.hpp"
#include "rrsplit/fem.hpp"
#include "rrsplit/mesh.hpp"
#include "rrsplit/sparse.hpp"

#include <cmath>
#include <functional>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rrsplit {

struct SchemeParams {
  int k = 1;
  double dt = 0.1;
  double alpha = 1.0;
  double nu_f = 1.0;
  double nu_s = 1.0;
  double T = 0.25;

  Index n_steps() const { return static_cast<Index>(std::llround(T / dt)); }

  void validate() const {
    if (k != 1 && k != 2) throw std::invalid_argument("k must be 1 or 2");
    if (!(dt > 0.0) || !(alpha > 0.0) || !(nu_f > 0.0) || !(nu_s > 0.0) || !(T > 0.0)) {
      throw std::invalid_argument("dt, alpha, nu_f, nu_s and T must be positive");
    }
    if (std::abs(static_cast<double>(n_steps()) * dt - T) > 1e-12) {
      throw std::invalid_argument("T must be an integer multiple of dt");
    }
  }
};

/// Volume forcing and interface data; empty functions mean zero.
struct SourceData {
  SpaceTimeFn f_f, f_s;
  SpaceTimeFn g_D;  // q - u on the interface
  SpaceTimeFn g_N;  // nu_s grad w . n_s + nu_f grad u . n_f on the interface

  static SourceData from_case(const ManufacturedCase& c) { return {c.f_f, c.f_s, c.g_D, c.g_N}; }
};

struct SchemeState {
  Index step_index = 0;
  Field u;  // fluid
  Field w;  // solid displacement (k = 2) or temperature (k = 1)
  Field q;  // solid velocity; equals w when k = 1
  TraceField lambda;
};

/// Matrices shared by all steppers on one mesh.
struct Operators {
  DofMap dofs_f, dofs_s;
  CsrMatrix mass_f, stiffness_f, mass_s, stiffness_s;
  CsrMatrix interface_mass;                   // trace space
  CsrMatrix interface_mass_f, interface_mass_s;  // embedded in each dof space

  Index n_trace() const { return interface_mass.rows(); }
};

inline Operators build_operators(const CoupledMesh& mesh) {
  Operators op;
  op.dofs_f = make_dof_map(mesh, Subdomain::fluid);
  op.dofs_s = make_dof_map(mesh, Subdomain::solid);
  op.mass_f = assemble_mass(mesh, op.dofs_f);
  op.stiffness_f = assemble_stiffness(mesh, op.dofs_f);
  op.mass_s = assemble_mass(mesh, op.dofs_s);
  op.stiffness_s = assemble_stiffness(mesh, op.dofs_s);
  op.interface_mass = assemble_interface_mass(mesh);
  op.interface_mass_f = interface_mass_on_dofs(op.interface_mass, op.dofs_f);
  op.interface_mass_s = interface_mass_on_dofs(op.interface_mass, op.dofs_s);
  return op;
}

inline SchemeState zero_state(const Operators& op) {
  return {0,
          {Subdomain::fluid, Vector::Zero(op.dofs_f.size())},
          {Subdomain::solid, Vector::Zero(op.dofs_s.size())},
          {Subdomain::solid, Vector::Zero(op.dofs_s.size())},
          {Vector::Zero(op.n_trace())}};
}

// Time-difference helpers.

inline Vector ddt(const Vector& v_new, const Vector& v_old, double dt) {
  if (v_new.size() != v_old.size()) throw std::invalid_argument("ddt: length mismatch");
  return (v_new - v_old) / dt;
}

inline Vector avg(const Vector& v_new, const Vector& v_old) {
  if (v_new.size() != v_old.size()) throw std::invalid_argument("avg: length mismatch");
  return 0.5 * (v_new + v_old);
}

inline Vector ddt2(const Vector& v_next, const Vector& v_cur, const Vector& v_prev, double dt) {
  if (v_next.size() != v_cur.size() || v_cur.size() != v_prev.size()) {
    throw std::invalid_argument("ddt2: length mismatch");
  }
  return (v_next - 2.0 * v_cur + v_prev) / (dt * dt);
}

namespace detail {

inline Vector trace_of(const DofMap& dofs, const Vector& v) {
  Vector t = Vector::Zero(static_cast<Index>(dofs.interface_dofs.size()));
  for (std::size_t k = 0; k < dofs.interface_dofs.size(); ++k) {
    const Index d = dofs.interface_dofs[k];
    if (d != no_dof) t[static_cast<Index>(k)] = v[d];
  }
  return t;
}

inline Vector scatter(const DofMap& dofs, const Vector& trace) {
  Vector out = Vector::Zero(dofs.size());
  scatter_trace_add(dofs, trace, out);
  return out;
}

inline CsrMatrix combine(std::initializer_list<std::pair<double, const CsrMatrix*>> terms) {
  std::vector<Triplet> trip;
  Index n = 0;
  for (const auto& [scale, m] : terms) {
    n = m->rows();
    m->append_to(trip, scale);
  }
  return from_triplets(n, n, std::move(trip));
}

inline double sq_norm(const CsrMatrix& m, const Vector& v) { return v.dot(spmv(m, v)); }

}  // namespace detail

/// Interface data evaluated at one time level, in trace coordinates.
struct InterfaceData {
  Vector g_D;       // nodal values
  Vector g_N_load;  // <g_N, phi_k>
};

inline InterfaceData interface_data(const CoupledMesh& mesh, const Operators& op,
                                    const SourceData& src, double t) {
  InterfaceData d{Vector::Zero(op.n_trace()), Vector::Zero(op.n_trace())};
  if (src.g_D) d.g_D = interpolate_trace(mesh, src.g_D, t).values;
  if (src.g_N) d.g_N_load = assemble_interface_load(mesh, src.g_N, t);
  return d;
}

/// Right-hand side pieces of the solid equation that do not involve the
/// interface coupling: inertia, the explicit half of the stiffness for k = 2,
/// and volume plus flux-data loads.
inline Vector solid_inertia_rhs(const SchemeParams& p, const CoupledMesh& mesh, const Operators& op,
                                const SchemeState& s, const SourceData& src, double t_next,
                                const InterfaceData& data) {
  const double dt = p.dt;
  Vector rhs;
  if (p.k == 1) {
    rhs = spmv(op.mass_s, s.w.values) / dt;
    if (src.f_s) rhs += assemble_load(mesh, op.dofs_s, src.f_s, t_next);
  } else {
    rhs = spmv(op.mass_s, s.w.values) * (2.0 / (dt * dt)) + spmv(op.mass_s, s.q.values) * (2.0 / dt) -
          spmv(op.stiffness_s, s.w.values) * (0.5 * p.nu_s);
    if (src.f_s) {
      rhs += 0.5 * (assemble_load(mesh, op.dofs_s, src.f_s, t_next) +
                    assemble_load(mesh, op.dofs_s, src.f_s, t_next - dt));
    }
  }
  rhs += detail::scatter(op.dofs_s, data.g_N_load);
  return rhs;
}

/// q^{n+1} from w^{n+1}: identical for k = 1, midpoint relation for k = 2.
inline Vector solid_velocity(const SchemeParams& p, const Vector& w_next, const SchemeState& s) {
  if (p.k == 1) return w_next;
  return (2.0 / p.dt) * (w_next - s.w.values) - s.q.values;
}

/// d_t^{k-1} w^{n+1} on the interface.
inline Vector kinematic_trace(const SchemeParams& p, const Operators& op, const Vector& w_next,
                              const SchemeState& s) {
  if (p.k == 1) return detail::trace_of(op.dofs_s, w_next);
  return detail::trace_of(op.dofs_s, ddt(w_next, s.w.values, p.dt));
}

struct SolidUpdate {
  Field w;
  Field q;
};

struct FluidUpdate {
  Field u;
  TraceField lambda;
};

/// The partitioned stepper. System matrices are factored once.
class RobinRobinSolver {
 public:
  RobinRobinSolver(SchemeParams params, const CoupledMesh& mesh, const Operators& ops)
      : p_(params), mesh_(&mesh), op_(&ops) {
    p_.validate();
    const double dt = p_.dt;
    if (p_.k == 1) {
      solid_ = std::make_unique<Factorization>(
          detail::combine({{1.0 / dt, &ops.mass_s}, {p_.nu_s, &ops.stiffness_s},
                           {p_.alpha, &ops.interface_mass_s}}),
          Factorization::Kind::spd);
    } else {
      solid_ = std::make_unique<Factorization>(
          detail::combine({{2.0 / (dt * dt), &ops.mass_s}, {0.5 * p_.nu_s, &ops.stiffness_s},
                           {p_.alpha / dt, &ops.interface_mass_s}}),
          Factorization::Kind::spd);
    }
    fluid_ = std::make_unique<Factorization>(
        detail::combine({{1.0 / dt, &ops.mass_f}, {p_.nu_f, &ops.stiffness_f},
                         {p_.alpha, &ops.interface_mass_f}}),
        Factorization::Kind::spd);
  }

  const SchemeParams& params() const { return p_; }

  /// Robin solve on the solid part using u^n and lambda^n.
  SolidUpdate solid_step(const SchemeState& s, const SourceData& src, double t_next) const {
    const auto data = interface_data(*mesh_, *op_, src, t_next);
    return solid_step(s, src, t_next, data);
  }

  /// Robin solve on the fluid part with the new solid state, then the
  /// multiplier update.
  FluidUpdate fluid_step(const SchemeState& s, const SolidUpdate& solid, const SourceData& src,
                         double t_next) const {
    const auto data = interface_data(*mesh_, *op_, src, t_next);
    return fluid_step(s, solid, src, t_next, data);
  }

  SchemeState advance(const SchemeState& s, const SourceData& src) const {
    const double t_next = static_cast<double>(s.step_index + 1) * p_.dt;
    const auto data = interface_data(*mesh_, *op_, src, t_next);
    auto solid = solid_step(s, src, t_next, data);
    auto fluid = fluid_step(s, solid, src, t_next, data);
    return {s.step_index + 1, std::move(fluid.u), std::move(solid.w), std::move(solid.q),
            std::move(fluid.lambda)};
  }

 private:
  SolidUpdate solid_step(const SchemeState& s, const SourceData& src, double t_next,
                         const InterfaceData& data) const {
    const auto& op = *op_;
    Vector rhs = solid_inertia_rhs(p_, *mesh_, op, s, src, t_next, data);
    if (p_.k == 2) rhs += spmv(op.interface_mass_s, s.w.values) * (p_.alpha / p_.dt);
    const Vector u_tr = detail::trace_of(op.dofs_f, s.u.values);
    const Vector robin = p_.alpha * spmv(op.interface_mass, Vector(u_tr + data.g_D)) -
                         spmv(op.interface_mass, s.lambda.values);
    rhs += detail::scatter(op.dofs_s, robin);
    Vector w = solid_->solve_or_throw(rhs, "solid step");
    Vector q = solid_velocity(p_, w, s);
    return {{Subdomain::solid, std::move(w)}, {Subdomain::solid, std::move(q)}};
  }

  FluidUpdate fluid_step(const SchemeState& s, const SolidUpdate& solid, const SourceData& src,
                         double t_next, const InterfaceData& data) const {
    const auto& op = *op_;
    const Vector kin = kinematic_trace(p_, op, solid.w.values, s);
    Vector rhs = spmv(op.mass_f, s.u.values) / p_.dt;
    if (src.f_f) rhs += assemble_load(*mesh_, op.dofs_f, src.f_f, t_next);
    const Vector robin = spmv(op.interface_mass, s.lambda.values) +
                         p_.alpha * spmv(op.interface_mass, Vector(kin - data.g_D));
    rhs += detail::scatter(op.dofs_f, robin);
    Vector u = fluid_->solve_or_throw(rhs, "fluid step");
    Vector lambda = s.lambda.values - p_.alpha * (detail::trace_of(op.dofs_f, u) - kin + data.g_D);
    return {{Subdomain::fluid, std::move(u)}, {std::move(lambda)}};
  }

  SchemeParams p_;
  const CoupledMesh* mesh_;
  const Operators* op_;
  std::unique_ptr<Factorization> solid_, fluid_;
};

/// Strongly coupled implicit step: one saddle system in (u, w, lambda) with
/// <d_t^{k-1} w - u, mu> = <g_D, mu> on the interior interface nodes. The two
/// multiplier entries at the outer endpoints are carried over unchanged.
class MonolithicSolver {
 public:
  MonolithicSolver(SchemeParams params, const CoupledMesh& mesh, const Operators& ops)
      : p_(params), mesh_(&mesh), op_(&ops) {
    p_.validate();
    const double dt = p_.dt;
    for (Index k = 0; k < ops.n_trace(); ++k) {
      if (ops.dofs_f.interface_dofs[k] != no_dof && ops.dofs_s.interface_dofs[k] != no_dof) {
        interior_.push_back(k);
      }
    }
    const Index nf = ops.dofs_f.size();
    const Index ns = ops.dofs_s.size();
    const Index nm = static_cast<Index>(interior_.size());

    std::vector<Triplet> trip;
    ops.mass_f.append_to(trip, 1.0 / dt);
    ops.stiffness_f.append_to(trip, p_.nu_f);
    if (p_.k == 1) {
      ops.mass_s.append_to(trip, 1.0 / dt, nf, nf);
      ops.stiffness_s.append_to(trip, p_.nu_s, nf, nf);
    } else {
      ops.mass_s.append_to(trip, 2.0 / (dt * dt), nf, nf);
      ops.stiffness_s.append_to(trip, 0.5 * p_.nu_s, nf, nf);
    }
    const double kin_scale = p_.k == 1 ? 1.0 : 1.0 / dt;
    for (Index a = 0; a < nm; ++a) {
      const Index ka = interior_[a];
      const Index row = nf + ns + a;
      for (Index k = 0; k < ops.n_trace(); ++k) {
        const double m = ops.interface_mass.at(ka, k);
        if (m == 0.0) continue;
        const Index df = ops.dofs_f.interface_dofs[k];
        const Index ds = ops.dofs_s.interface_dofs[k];
        if (df != no_dof) {
          trip.push_back({df, row, -m});   // fluid: -<lambda, v>
          trip.push_back({row, df, -m});   // constraint: -<u, mu>
        }
        if (ds != no_dof) {
          trip.push_back({nf + ds, row, m});             // solid: +<lambda, z>
          trip.push_back({row, nf + ds, kin_scale * m});  // constraint: <d_t^{k-1} w, mu>
        }
      }
    }
    system_ = std::make_unique<Factorization>(from_triplets(nf + ns + nm, nf + ns + nm, std::move(trip)),
                                              Factorization::Kind::general);
  }

  SchemeState advance(const SchemeState& s, const SourceData& src) const {
    const auto& op = *op_;
    const double dt = p_.dt;
    const double t_next = static_cast<double>(s.step_index + 1) * dt;
    const auto data = interface_data(*mesh_, op, src, t_next);
    const Index nf = op.dofs_f.size();
    const Index ns = op.dofs_s.size();
    const Index nm = static_cast<Index>(interior_.size());

    // endpoint multiplier values enter as known data
    Vector lambda_fixed = s.lambda.values;
    for (Index k : interior_) lambda_fixed[k] = 0.0;
    const Vector fixed_load = spmv(op.interface_mass, lambda_fixed);

    Vector rhs(nf + ns + nm);
    Vector rf = spmv(op.mass_f, s.u.values) / dt + detail::scatter(op.dofs_f, fixed_load);
    if (src.f_f) rf += assemble_load(*mesh_, op.dofs_f, src.f_f, t_next);
    Vector rs = solid_inertia_rhs(p_, *mesh_, op, s, src, t_next, data) -
                detail::scatter(op.dofs_s, fixed_load);
    Vector gd = spmv(op.interface_mass, data.g_D);
    if (p_.k == 2) gd += spmv(op.interface_mass, detail::trace_of(op.dofs_s, s.w.values)) / dt;
    rhs << rf, rs, Vector::NullaryExpr(nm, [&](Index a) { return gd[interior_[a]]; });

    const Vector x = system_->solve_or_throw(rhs, "monolithic step");
    SchemeState out;
    out.step_index = s.step_index + 1;
    out.u = {Subdomain::fluid, x.head(nf)};
    out.w = {Subdomain::solid, x.segment(nf, ns)};
    out.q = {Subdomain::solid, solid_velocity(p_, out.w.values, s)};
    out.lambda = s.lambda;
    for (Index a = 0; a < nm; ++a) out.lambda.values[interior_[a]] = x[nf + ns + a];
    return out;
  }

 private:
  SchemeParams p_;
  const CoupledMesh* mesh_;
  const Operators* op_;
  std::vector<Index> interior_;
  std::unique_ptr<Factorization> system_;
};

// Discrete energy bookkeeping: Z^{n+1} + S^{n+1} = Z^n for zero sources.

inline double energy_Z(const SchemeParams& p, const Operators& op, const SchemeState& s) {
  const Vector u_tr = detail::trace_of(op.dofs_f, s.u.values);
  return 0.5 * detail::sq_norm(op.mass_s, s.q.values) + 0.5 * detail::sq_norm(op.mass_f, s.u.values) +
         0.5 * (p.k - 1) * p.nu_s * detail::sq_norm(op.stiffness_s, s.w.values) +
         0.5 * p.dt * p.alpha * detail::sq_norm(op.interface_mass, u_tr) +
         0.5 * p.dt / p.alpha * detail::sq_norm(op.interface_mass, s.lambda.values);
}

inline double energy_S(const SchemeParams& p, const Operators& op, const SchemeState& prev,
                       const SchemeState& next) {
  const Vector q_mid = p.k == 1 ? next.q.values : avg(next.q.values, prev.q.values);
  const Vector jump = detail::trace_of(op.dofs_s, q_mid) - detail::trace_of(op.dofs_f, prev.u.values);
  return p.nu_f * p.dt * detail::sq_norm(op.stiffness_f, next.u.values) +
         (2 - p.k) * p.nu_s * p.dt * detail::sq_norm(op.stiffness_s, next.w.values) +
         0.5 * (2 - p.k) * detail::sq_norm(op.mass_s, Vector(next.q.values - prev.q.values)) +
         0.5 * detail::sq_norm(op.mass_f, Vector(next.u.values - prev.u.values)) +
         0.5 * p.dt * p.alpha * detail::sq_norm(op.interface_mass, jump);
}

struct EnergyLedger {
  std::vector<double> Z;  // per time level, Z[0] = Z^0
  std::vector<double> S;  // per step, S[n] = S^{n+1}

  /// max_n |Z^n + sum_{m<n} S^{m+1} - Z^0| / max(Z^0, floor)
  double max_relative_defect(double floor = 1e-300) const {
    if (Z.empty()) return 0.0;
    double cum = 0.0;
    double worst = 0.0;
    for (std::size_t n = 1; n < Z.size(); ++n) {
      cum += S[n - 1];
      worst = std::max(worst, std::abs(Z[n] + cum - Z[0]));
    }
    return worst / std::max(Z[0], floor);
  }
};

/// Residuals of the two per-step scheme identities on a computed step.
struct StepIdentityCheck {
  double multiplier = 0.0;  // max |alpha (u - d_t^{k-1} w + g_D) + lambda^{n+1} - lambda^n|
  double velocity = 0.0;    // max |q^{n+1/k} - d_t^{k-1} w^{n+1}| over solid dofs
};

inline StepIdentityCheck check_step_identities(const SchemeParams& p, const Operators& op,
                                               const SchemeState& prev, const SchemeState& next,
                                               const Vector& g_D) {
  StepIdentityCheck c;
  const Vector kin = kinematic_trace(p, op, next.w.values, prev);
  const Vector r = p.alpha * (detail::trace_of(op.dofs_f, next.u.values) - kin + g_D) +
                   next.lambda.values - prev.lambda.values;
  c.multiplier = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
  const Vector v = p.k == 1 ? Vector(next.q.values - next.w.values)
                            : Vector(avg(next.q.values, prev.q.values) - ddt(next.w.values, prev.w.values, p.dt));
  c.velocity = v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
  return c;
}

enum class Stepper { robin_robin, monolithic };

struct RunOptions {
  Stepper stepper = Stepper::robin_robin;
  bool record_energy = true;
  // called after every step with the new state and its time
  std::function<void(const SchemeState&, double)> on_step;
};

struct RunResult {
  SchemeState final;
  EnergyLedger ledger;
};

inline RunResult run(const SchemeParams& p, const CoupledMesh& mesh, const Operators& op,
                     const SourceData& src, SchemeState initial, const RunOptions& opts = {}) {
  p.validate();
  if (p.k == 1 && (initial.q.values - initial.w.values).cwiseAbs().maxCoeff() > 0.0) {
    throw std::invalid_argument("run: k = 1 requires q0 = w0");
  }
  std::optional<RobinRobinSolver> rr;
  std::optional<MonolithicSolver> mono;
  if (opts.stepper == Stepper::robin_robin) {
    rr.emplace(p, mesh, op);
  } else {
    mono.emplace(p, mesh, op);
  }
  RunResult out;
  out.final = std::move(initial);
  out.final.step_index = 0;
  if (opts.record_energy) out.ledger.Z.push_back(energy_Z(p, op, out.final));
  for (Index n = 0; n < p.n_steps(); ++n) {
    SchemeState next = rr ? rr->advance(out.final, src) : mono->advance(out.final, src);
    if (opts.record_energy) {
      out.ledger.S.push_back(energy_S(p, op, out.final, next));
      out.ledger.Z.push_back(energy_Z(p, op, next));
    }
    out.final = std::move(next);
    if (opts.on_step) opts.on_step(out.final, static_cast<double>(out.final.step_index) * p.dt);
  }
  return out;
}

/// Nodal interpolation of nu_f grad(u) . n_f at t = 0.
inline TraceField lambda0_from_exact(const ManufacturedCase& c, const CoupledMesh& mesh) {
  return interpolate_trace(mesh, c.l_consistent, 0.0);
}

/// Initial state interpolated from a case's exact fields at t = 0.
inline SchemeState initial_state_from_case(const ManufacturedCase& c, const CoupledMesh& mesh,
                                           const Operators& op) {
  SchemeState s;
  s.u = interpolate(mesh, op.dofs_f, c.exact_u, 0.0);
  s.w = interpolate(mesh, op.dofs_s, c.exact_w, 0.0);
  s.q = c.k == 1 ? s.w : interpolate(mesh, op.dofs_s, c.exact_q, 0.0);
  s.lambda = lambda0_from_exact(c, mesh);
  return s;
}

/// Plain-text checkpoint: step index, then one line per coefficient vector.
inline void write_checkpoint(std::ostream& os, const SchemeState& s) {
  os << std::setprecision(17) << "step " << s.step_index << "\n";
  auto line = [&](const char* name, const Vector& v) {
    os << name << ' ' << v.size();
    for (Index i = 0; i < v.size(); ++i) os << ' ' << v[i];
    os << "\n";
  };
  line("u", s.u.values);
  line("w", s.w.values);
  line("q", s.q.values);
  line("lambda", s.lambda.values);
}

/// Columns n, Z, S, Z_plus_cumS (S of the step ending at level n; 0 at n = 0).
inline void write_energy_csv(std::ostream& os, const EnergyLedger& ledger) {
  os << "n,Z,S,Z_plus_cumS\n" << std::setprecision(17);
  double cum = 0.0;
  for (std::size_t n = 0; n < ledger.Z.size(); ++n) {
    const double s = n == 0 ? 0.0 : ledger.S[n - 1];
    cum += s;
    os << n << ',' << ledger.Z[n] << ',' << s << ',' << ledger.Z[n] + cum << "\n";
  }
}

}  // namespace rrsplit
