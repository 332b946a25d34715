// Acceptance checks. Prints one PASS/FAIL line per criterion followed by the
// measured values; exits nonzero if any criterion fails.

#include "rrsplit/rrsplit.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

using namespace rrsplit;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

bool in_range(std::optional<double> v, double lo, double hi) { return v && *v >= lo && *v <= hi; }

std::string rate_str(std::optional<double> r) { return r ? fmt(*r) : std::string("NA"); }

// 1. Z^N + sum S = Z^0 with random data and zero sources.
Outcome energy_identity() {
  Outcome o{true, ""};
  double worst = 0.0;
  for (int k : {1, 2}) {
    for (double alpha : {0.1, 1.0, 10.0}) {
      for (double dt : {0.5, 0.05}) {
        EnergyAuditConfig cfg;
        cfg.k = k;
        cfg.alpha = alpha;
        cfg.dt = dt;
        cfg.steps = 20;
        cfg.mesh_n = 8;
        cfg.seed = 20240601u + static_cast<unsigned>(k);
        const auto rep = energy_audit(cfg);
        worst = std::max(worst, rep.defect);
        o.pass = o.pass && rep.pass && rep.z0 > 0.0;
      }
    }
  }
  o.detail = "max relative defect " + fmt(worst) + " (tol 1e-10) over 12 configurations";
  return o;
}

// 2. Multiplier update identity and the k = 2 midpoint relation after every step.
Outcome scheme_identities() {
  double con = 0.0, strong = 0.0;
  for (const char* name : {"pp_uniform", "ph_uniform", "pp_slanted"}) {
    const auto c = get_case(name);
    const auto mesh = c.geometry.kind == InterfaceGeometry::Kind::slanted ? slanted_interface_mesh(1)
                                                                          : uniform_split_mesh(16);
    const auto op = build_operators(mesh);
    for (double alpha : {0.1, 1.0, 10.0}) {
      const SchemeParams p{c.k, 1.0 / 16.0, alpha, 1.0, 1.0, 0.25};
      const auto src = SourceData::from_case(c);
      const RobinRobinSolver rr(p, mesh, op);
      SchemeState s = initial_state_from_case(c, mesh, op);
      for (Index n = 0; n < p.n_steps(); ++n) {
        const auto next = rr.advance(s, src);
        const auto gd = interface_data(mesh, op, src, static_cast<double>(n + 1) * p.dt).g_D;
        const auto id = check_step_identities(p, op, s, next, gd);
        const double scale = std::max(1.0, next.q.values.cwiseAbs().maxCoeff());
        con = std::max(con, id.multiplier);
        strong = std::max(strong, id.velocity / scale);
        s = next;
      }
    }
  }
  // random data, zero sources, both k
  for (int k : {1, 2}) {
    const auto mesh = uniform_split_mesh(8);
    const auto op = build_operators(mesh);
    const SchemeParams p{k, 0.05, 1.0, 1.0, 1.0, 0.5};
    const RobinRobinSolver rr(p, mesh, op);
    SchemeState s = random_state(op, k, 7);
    for (Index n = 0; n < p.n_steps(); ++n) {
      const auto next = rr.advance(s, SourceData{});
      const auto id = check_step_identities(p, op, s, next, Vector::Zero(op.n_trace()));
      con = std::max(con, id.multiplier);
      strong = std::max(strong, id.velocity / std::max(1.0, next.q.values.cwiseAbs().maxCoeff()));
      s = next;
    }
  }
  const bool pass = con <= 1e-12 && strong <= default_solve_tolerance;
  return {pass, "multiplier identity " + fmt(con) + " (tol 1e-12), midpoint relation " + fmt(strong) +
                    " (tol 1e-12)"};
}

std::vector<double> dyadic(int first, int last) {
  std::vector<double> out;
  for (int m = first; m <= last; ++m) out.push_back(std::ldexp(1.0, -m));
  return out;
}

std::string table_str(const ConvergenceTable& t) {
  std::ostringstream os;
  write_convergence_csv(os, t);
  std::string s = os.str(), out;
  std::istringstream is(s);
  std::string line;
  while (std::getline(is, line)) out += "\n      " + line;
  return out;
}

// 3. k = 2 uniform case against the reference table.
Outcome hyperbolic_uniform() {
  StudyConfig cfg;
  cfg.case_name = "ph_uniform";
  cfg.dt_list = dyadic(2, 6);
  cfg.norms = {Norm::l2_u, Norm::l2_q};
  const auto t = run_study(cfg);
  // reference L2 errors at dt = 2^-2 .. 2^-6
  const double ref_u[] = {4.48e-06, 1.01e-06, 5.19e-07, 3.76e-07, 2.25e-07};
  const double ref_q[] = {9.48e-06, 2.45e-06, 1.22e-06, 6.67e-07, 3.62e-07};
  bool pass = true;
  double worst_factor = 1.0;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.rows[i].failed) return {false, "row failed: " + t.rows[i].failure};
    for (auto [norm, ref] : {std::pair{Norm::l2_u, ref_u[i]}, std::pair{Norm::l2_q, ref_q[i]}}) {
      const double e = t.error(i, norm);
      const double f = std::max(e / ref, ref / e);
      worst_factor = std::max(worst_factor, f);
      pass = pass && f <= 5.0;
    }
  }
  const auto last = t.rows.size() - 1;
  const auto ru = t.rate(last, Norm::l2_u), rq = t.rate(last, Norm::l2_q);
  pass = pass && in_range(ru, 0.7, 1.2) && in_range(rq, 0.7, 1.2);
  return {pass, "finest rates U " + rate_str(ru) + ", Q " + rate_str(rq) + " (range [0.7, 1.2]); worst error factor vs reference " +
                    fmt(worst_factor) + " (limit 5)" + table_str(t)};
}

// 4. Conforming k = 1 case.
Outcome conforming_rates() {
  StudyConfig cfg;
  cfg.case_name = "pp_conforming";
  cfg.dt_list = dyadic(3, 7);
  const auto t = run_study(cfg);
  bool pass = true;
  std::string rates;
  // rates between the three finest step sizes
  for (std::size_t i = t.rows.size() - 2; i < t.rows.size(); ++i) {
    if (t.rows[i].failed || t.rows[i - 1].failed) return {false, "row failed"};
    for (Norm n : {Norm::l2_u, Norm::l2_w}) {
      const auto r = t.rate(i, n);
      pass = pass && in_range(r, 0.85, 1.15);
      rates += std::string(" ") + column_name(n) + "=" + rate_str(r);
    }
  }
  return {pass, "rates among the three finest levels:" + rates + " (range [0.85, 1.15])" + table_str(t)};
}

// 5. Slanted interface.
Outcome slanted_rates() {
  StudyConfig cfg;
  cfg.case_name = "pp_slanted";
  cfg.mesh_policy = MeshPolicy::slanted_levels;
  cfg.dt_list = dyadic(2, 8);
  cfg.norms = {Norm::l2_u, Norm::l2_w, Norm::grad_u, Norm::grad_w};
  const auto t = run_study(cfg);
  const auto last = t.rows.size() - 1;
  if (t.rows[last].failed || t.rows[last - 1].failed) return {false, "row failed"};
  bool pass = true;
  std::string d;
  for (Norm n : {Norm::l2_u, Norm::l2_w}) {
    const auto r = t.rate(last, n);
    pass = pass && in_range(r, 0.8, 1.1);
    d += std::string(" ") + column_name(n) + "=" + rate_str(r);
  }
  d += " (range [0.8, 1.1]);";
  for (Norm n : {Norm::grad_u, Norm::grad_w}) {
    const auto r = t.rate(last, n);
    pass = pass && in_range(r, 0.6, 1.0);
    d += std::string(" ") + column_name(n) + "=" + rate_str(r);
  }
  d += " (range [0.6, 1.0])";
  return {pass, "finest rates" + d + table_str(t)};
}

// 6. Cut-off function.
Outcome cutoff_checks() {
  bool pass = true;
  double worst_ratio = 0.0;
  for (int m = 2; m <= 10; ++m) {
    const double dt = std::ldexp(1.0, -m);
    const cutoff::CutoffConfig cfg{dt};
    pass = pass && cutoff::trace_not_one_measure(cfg) == 2.0 * dt;
    const auto rep = cutoff::verify_assumptions(cfg);
    pass = pass && rep.all_pass();
    worst_ratio = std::max(worst_ratio, rep.growth.measured);
  }
  const double slope = cutoff::measured_log_slope(std::ldexp(1.0, -9), std::ldexp(1.0, -10));
  const double target = cutoff::log_coefficient(std::ldexp(1.0, -10));
  const bool slope_ok = std::abs(slope - target) <= 0.15 * target;
  pass = pass && worst_ratio <= 4.0 && slope_ok;
  return {pass, "trace measure 2 dt on all levels, max growth ratio " + fmt(worst_ratio) +
                    " (limit 4), log slope " + fmt(slope) + " vs " + fmt(target) + " (15%)"};
}

// 7. Residual oracle for every registered case.
Outcome residual_checks() {
  std::vector<Point> pts;
  for (int i = 1; i < 20; ++i)
    for (int j = 1; j < 20; ++j) pts.push_back({i / 20.0, j / 20.0});
  bool pass = true;
  std::string d;
  for (const auto& name : case_names()) {
    double worst = 0.0;
    for (double t : {0.0, 0.125, 0.25}) worst = std::max(worst, residual_oracle(get_case(name), pts, t));
    pass = pass && worst < 1e-5;
    d += " " + name + "=" + fmt(worst);
  }
  return {pass, "max residual" + d + " (limit 1e-5)"};
}

// 8. Robin-Robin against the monolithic oracle.
Outcome oracle_comparison() {
  const auto c = get_case("pp_conforming");
  std::vector<double> diffs;
  for (int m : {5, 6, 7}) {
    const double dt = std::ldexp(1.0, -m);
    const auto mesh = uniform_split_mesh(Index{1} << m);
    const auto op = build_operators(mesh);
    const SchemeParams p{1, dt, 1.0, 1.0, 1.0, 0.25};
    RunOptions ro;
    ro.record_energy = false;
    const auto a = run(p, mesh, op, SourceData::from_case(c), initial_state_from_case(c, mesh, op), ro);
    ro.stepper = Stepper::monolithic;
    const auto b = run(p, mesh, op, SourceData::from_case(c), initial_state_from_case(c, mesh, op), ro);
    auto zero = [](const Point&, double) { return 0.0; };
    const double du = l2_error(mesh, op.dofs_f, {Subdomain::fluid, a.final.u.values - b.final.u.values}, zero, 0.0);
    const double dw = l2_error(mesh, op.dofs_s, {Subdomain::solid, a.final.w.values - b.final.w.values}, zero, 0.0);
    diffs.push_back(std::hypot(du, dw));
  }
  bool pass = true;
  std::string d = "differences";
  for (double x : diffs) d += " " + fmt(x);
  d += "; ratios";
  for (std::size_t i = 1; i < diffs.size(); ++i) {
    const double r = diffs[i - 1] / diffs[i];
    pass = pass && r >= 1.6 && r <= 2.6;
    d += " " + fmt(r);
  }
  return {pass, d + " (range [1.6, 2.6])"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"1 energy identity", energy_identity},
      {"2 scheme identities", scheme_identities},
      {"3 k=2 uniform case", hyperbolic_uniform},
      {"4 conforming k=1 rates", conforming_rates},
      {"5 slanted interface rates", slanted_rates},
      {"6 cut-off function", cutoff_checks},
      {"7 residual oracle", residual_checks},
      {"8 Robin-Robin vs monolithic", oracle_comparison},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << name << " [" << fmt(secs) << " s]\n    " << o.detail
              << std::endl;
    failures += o.pass ? 0 : 1;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
  return failures == 0 ? 0 : 1;
}
