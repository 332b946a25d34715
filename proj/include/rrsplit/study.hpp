#pragma once

// Convergence studies, energy audits and report writers.

#include "rrsplit/cases.hpp"
#include "rrsplit/cutoff.hpp"
#include "rrsplit/fem.hpp"
#include "rrsplit/mesh.hpp"
#include "rrsplit/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rrsplit {

enum class Norm { l2_u, l2_w, l2_q, grad_u, grad_w };

inline const char* column_name(Norm n) {
  switch (n) {
    case Norm::l2_u: return "U";
    case Norm::l2_w: return "W";
    case Norm::l2_q: return "Q";
    case Norm::grad_u: return "GradU";
    case Norm::grad_w: return "GradW";
  }
  return "?";
}

inline Norm parse_norm(const std::string& s) {
  for (Norm n : {Norm::l2_u, Norm::l2_w, Norm::l2_q, Norm::grad_u, Norm::grad_w}) {
    if (s == column_name(n)) return n;
  }
  throw std::invalid_argument("unknown norm '" + s + "' (expected U, W, Q, GradU or GradW)");
}

enum class MeshPolicy {
  h_equals_dt,     // uniform_split_mesh(1/dt)
  slanted_levels,  // slanted_interface_mesh(log2(1/dt) - 2)
};

struct StudyConfig {
  std::string case_name;
  std::vector<double> dt_list;
  double final_time = 0.25;
  double alpha = 1.0;
  double nu_f = 1.0;
  double nu_s = 1.0;
  MeshPolicy mesh_policy = MeshPolicy::h_equals_dt;
  std::vector<Norm> norms{Norm::l2_u, Norm::l2_w};
  Stepper stepper = Stepper::robin_robin;
  int k = 0;  // 0 takes the case's k

  void validate() const;
};

/// Norms listed in CSV column order.
inline std::vector<Norm> canonical_order(std::vector<Norm> norms) {
  std::sort(norms.begin(), norms.end());
  norms.erase(std::unique(norms.begin(), norms.end()), norms.end());
  return norms;
}

/// Nonnegative integer m with 2^-m == dt, if there is one.
inline std::optional<int> dyadic_exponent(double dt) {
  if (!(dt > 0.0) || dt > 1.0) return std::nullopt;
  const int m = static_cast<int>(std::lround(-std::log2(dt)));
  if (std::ldexp(1.0, -m) != dt) return std::nullopt;
  return m;
}

/// Halvings of dt_max down to dt_min, both snapped to powers of two.
inline std::vector<double> dyadic_range(double dt_max, double dt_min) {
  if (!(dt_min > 0.0) || !(dt_max >= dt_min)) throw std::invalid_argument("need 0 < dt_min <= dt_max");
  std::vector<double> out;
  double dt = std::ldexp(1.0, static_cast<int>(std::floor(std::log2(dt_max))));
  while (dt >= dt_min * (1.0 - 1e-12)) {
    out.push_back(dt);
    dt *= 0.5;
  }
  return out;
}

inline void StudyConfig::validate() const {
  const auto c = get_case(case_name, nu_f, nu_s);
  if (k != 0 && k != c.k) {
    throw std::invalid_argument("k = " + std::to_string(k) + " does not match case '" + case_name +
                                "' (k = " + std::to_string(c.k) + ")");
  }
  if (dt_list.empty()) throw std::invalid_argument("dt list is empty");
  for (std::size_t i = 0; i < dt_list.size(); ++i) {
    const double dt = dt_list[i];
    if (i > 0 && !(dt < dt_list[i - 1])) throw std::invalid_argument("dt list must be strictly decreasing");
    const auto m = dyadic_exponent(dt);
    if (!m) throw std::invalid_argument("dt = " + std::to_string(dt) + " is not a power of two");
    const double steps = final_time / dt;
    if (std::abs(steps - std::round(steps)) > 1e-9 || std::round(steps) < 1.0) {
      throw std::invalid_argument("final time is not an integer multiple of dt = " + std::to_string(dt));
    }
    if (mesh_policy == MeshPolicy::h_equals_dt && *m < 1) {
      throw std::invalid_argument("h = dt meshes need dt <= 1/2");
    }
    if (mesh_policy == MeshPolicy::slanted_levels && (*m < 2 || *m - 2 > max_slanted_level)) {
      throw std::invalid_argument("slanted meshes need dt in [2^-12, 1/4]");
    }
  }
  if (mesh_policy == MeshPolicy::h_equals_dt && c.geometry.kind != InterfaceGeometry::Kind::horizontal) {
    throw std::invalid_argument("case '" + case_name + "' needs the slanted mesh family");
  }
  if (mesh_policy == MeshPolicy::slanted_levels && c.geometry.kind != InterfaceGeometry::Kind::slanted) {
    throw std::invalid_argument("case '" + case_name + "' needs the uniform mesh family");
  }
  if (!(alpha > 0.0) || !(final_time > 0.0)) throw std::invalid_argument("alpha and final time must be positive");
  if (norms.empty()) throw std::invalid_argument("no norms requested");
}

/// Mesh policy matching a case's interface geometry.
inline MeshPolicy default_mesh_policy(const ManufacturedCase& c) {
  return c.geometry.kind == InterfaceGeometry::Kind::slanted ? MeshPolicy::slanted_levels
                                                             : MeshPolicy::h_equals_dt;
}

inline CoupledMesh study_mesh(MeshPolicy policy, double dt) {
  const int m = dyadic_exponent(dt).value();
  if (policy == MeshPolicy::h_equals_dt) return uniform_split_mesh(Index{1} << m);
  return slanted_interface_mesh(m - 2);
}

struct ConvergenceRow {
  double dt = 0.0;
  std::vector<double> errors;                // per norm, in table order
  std::vector<std::optional<double>> rates;  // undefined on the first row and for nonpositive errors
  bool failed = false;
  std::string failure;
  bool negligible = false;  // every error below 1e-12
};

struct ConvergenceTable {
  std::string case_name;
  std::vector<Norm> norms;
  std::vector<ConvergenceRow> rows;

  std::size_t column(Norm n) const {
    const auto it = std::find(norms.begin(), norms.end(), n);
    if (it == norms.end()) throw std::out_of_range(std::string("norm not in table: ") + column_name(n));
    return static_cast<std::size_t>(it - norms.begin());
  }
  double error(std::size_t row, Norm n) const { return rows.at(row).errors.at(column(n)); }
  std::optional<double> rate(std::size_t row, Norm n) const { return rows.at(row).rates.at(column(n)); }
};

inline constexpr double negligible_error = 1e-12;

/// log2(e[i-1] / e[i]); undefined for i = 0 and when either error is not positive.
inline std::vector<std::optional<double>> rates(const std::vector<double>& errors) {
  std::vector<std::optional<double>> out(errors.size());
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (errors[i - 1] > 0.0 && errors[i] > 0.0) out[i] = std::log2(errors[i - 1] / errors[i]);
  }
  return out;
}

/// Fills the rate columns from adjacent rows. A failed row has no rates and
/// breaks the chain for the row after it.
inline void compute_rates(ConvergenceTable& table) {
  for (std::size_t j = 0; j < table.norms.size(); ++j) {
    std::vector<double> col;
    for (const auto& r : table.rows) col.push_back(r.failed ? 0.0 : r.errors[j]);
    const auto rj = rates(col);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      table.rows[i].rates.resize(table.norms.size());
      table.rows[i].rates[j] = rj[i];
    }
  }
}

/// One row of a study: a full run at one step size.
inline ConvergenceRow run_study_row(const StudyConfig& cfg, const ManufacturedCase& c,
                                    const std::vector<Norm>& norms, double dt) {
  ConvergenceRow row;
  row.dt = dt;
  const CoupledMesh mesh = study_mesh(cfg.mesh_policy, dt);
  const Operators op = build_operators(mesh);
  const SchemeParams p{c.k, dt, cfg.alpha, cfg.nu_f, cfg.nu_s, cfg.final_time};

  const bool want_grad = std::find(norms.begin(), norms.end(), Norm::grad_u) != norms.end() ||
                         std::find(norms.begin(), norms.end(), Norm::grad_w) != norms.end();
  double acc_u = 0.0, acc_w = 0.0;
  RunOptions opts;
  opts.stepper = cfg.stepper;
  opts.record_energy = false;
  if (want_grad) {
    opts.on_step = [&](const SchemeState& s, double t) {
      const double eu = h1_semi_error(mesh, op.dofs_f, s.u, c.grad_u, t);
      const double ew = h1_semi_error(mesh, op.dofs_s, s.w, c.grad_w, t);
      acc_u += dt * eu * eu;
      acc_w += dt * ew * ew;
    };
  }
  const auto result = run(p, mesh, op, SourceData::from_case(c), initial_state_from_case(c, mesh, op), opts);
  const double T = cfg.final_time;
  for (Norm n : norms) {
    double e = 0.0;
    switch (n) {
      case Norm::l2_u: e = l2_error(mesh, op.dofs_f, result.final.u, c.exact_u, T); break;
      case Norm::l2_w: e = l2_error(mesh, op.dofs_s, result.final.w, c.exact_w, T); break;
      case Norm::l2_q: e = l2_error(mesh, op.dofs_s, result.final.q, c.exact_q, T); break;
      case Norm::grad_u: e = std::sqrt(acc_u); break;
      case Norm::grad_w: e = std::sqrt(acc_w); break;
    }
    if (!std::isfinite(e)) throw std::runtime_error("non-finite error norm");
    row.errors.push_back(e);
  }
  row.negligible = std::all_of(row.errors.begin(), row.errors.end(),
                               [](double e) { return e < negligible_error; });
  return row;
}

inline ConvergenceTable run_study(const StudyConfig& cfg) {
  cfg.validate();
  const auto c = get_case(cfg.case_name, cfg.nu_f, cfg.nu_s);
  ConvergenceTable table;
  table.case_name = cfg.case_name;
  table.norms = canonical_order(cfg.norms);
  for (double dt : cfg.dt_list) {
    try {
      table.rows.push_back(run_study_row(cfg, c, table.norms, dt));
    } catch (const std::exception& e) {
      ConvergenceRow row;
      row.dt = dt;
      row.errors.assign(table.norms.size(), 0.0);
      row.failed = true;
      row.failure = e.what();
      table.rows.push_back(std::move(row));
    }
  }
  compute_rates(table);
  return table;
}

namespace detail {

inline std::string format6(double v) {
  std::ostringstream os;
  os << std::setprecision(6) << v;
  return os.str();
}

}  // namespace detail

/// CSV with columns dt,err<X>,rate<X> per norm. Undefined rates are written
/// as NA, failed rows as "failed" in every error column.
inline void write_convergence_csv(std::ostream& os, const ConvergenceTable& table) {
  os << "dt";
  for (Norm n : table.norms) os << ",err" << column_name(n) << ",rate" << column_name(n);
  os << "\n";
  for (const auto& r : table.rows) {
    os << detail::format6(r.dt);
    for (std::size_t j = 0; j < table.norms.size(); ++j) {
      os << ',' << (r.failed ? std::string("failed") : detail::format6(r.errors[j])) << ','
         << (r.rates[j] ? detail::format6(*r.rates[j]) : std::string("NA"));
    }
    os << "\n";
  }
}

/// Human-readable notes for failed and negligible rows.
inline void write_table_notes(std::ostream& os, const ConvergenceTable& table) {
  for (const auto& r : table.rows) {
    if (r.failed) os << "dt=" << detail::format6(r.dt) << " failed: " << r.failure << "\n";
    if (r.negligible) os << "dt=" << detail::format6(r.dt) << " errors below 1e-12, rates undefined\n";
  }
}

/// Log-log error plot of a convergence CSV, for gnuplot.
inline void write_gnuplot_script(std::ostream& os, const ConvergenceTable& table, const std::string& csv_path) {
  os << "set datafile separator ','\n"
     << "set logscale xy\n"
     << "set key left top\n"
     << "set xlabel 'dt'\n"
     << "set ylabel 'error'\n"
     << "set title '" << table.case_name << "'\n"
     << "plot ";
  for (std::size_t j = 0; j < table.norms.size(); ++j) {
    if (j) os << ", \\\n     ";
    os << "'" << csv_path << "' using 1:" << 2 * j + 2 << " skip 1 with linespoints title '"
       << column_name(table.norms[j]) << "'";
  }
  os << "\n";
}

// Energy audit.

struct EnergyAuditConfig {
  int k = 1;
  double alpha = 1.0;
  double dt = 0.05;
  Index steps = 20;
  Index mesh_n = 8;
  double nu_f = 1.0;
  double nu_s = 1.0;
  std::uint64_t seed = 1;
};

struct EnergyAuditReport {
  EnergyAuditConfig config;
  double z0 = 0.0;
  double defect = 0.0;  // relative
  bool pass = false;
  EnergyLedger ledger;
};

inline constexpr double energy_tolerance = 1e-10;

/// Uniform(-1, 1) coefficients for every unknown; q = w when k = 1.
inline SchemeState random_state(const Operators& op, int k, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  auto fill = [&](Index n) { return Vector(Vector::NullaryExpr(n, [&](Index) { return dist(gen); })); };
  SchemeState s = zero_state(op);
  s.u.values = fill(op.dofs_f.size());
  s.w.values = fill(op.dofs_s.size());
  s.q.values = k == 1 ? s.w.values : fill(op.dofs_s.size());
  s.lambda.values = fill(op.n_trace());
  return s;
}

inline EnergyAuditReport energy_audit(const EnergyAuditConfig& cfg,
                                      std::optional<SchemeState> initial = std::nullopt) {
  EnergyAuditReport rep;
  rep.config = cfg;
  const CoupledMesh mesh = uniform_split_mesh(cfg.mesh_n);
  const Operators op = build_operators(mesh);
  const SchemeParams p{cfg.k, cfg.dt, cfg.alpha, cfg.nu_f, cfg.nu_s, cfg.dt * static_cast<double>(cfg.steps)};
  SchemeState s0 = initial ? std::move(*initial) : random_state(op, cfg.k, cfg.seed);
  const auto result = run(p, mesh, op, SourceData{}, std::move(s0));
  rep.ledger = result.ledger;
  rep.z0 = rep.ledger.Z.front();
  rep.defect = rep.z0 > 0.0 ? rep.ledger.max_relative_defect() : 0.0;
  rep.pass = rep.defect <= energy_tolerance;
  return rep;
}

inline void write_energy_audit_csv(std::ostream& os, const std::vector<EnergyAuditReport>& reports) {
  os << "k,alpha,dt,steps,Z0,defect,pass\n";
  for (const auto& r : reports) {
    os << r.config.k << ',' << detail::format6(r.config.alpha) << ',' << detail::format6(r.config.dt) << ','
       << r.config.steps << ',' << detail::format6(r.z0) << ',' << detail::format6(r.defect) << ','
       << (r.pass ? 1 : 0) << "\n";
  }
}

inline void cutoff_report(std::ostream& os, const std::vector<double>& dts) {
  cutoff::write_cutoff_csv(os, dts);
}

}  // namespace rrsplit
