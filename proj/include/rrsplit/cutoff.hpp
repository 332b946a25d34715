#pragma once

// Piecewise cut-off function on [0,1]^2 that equals one on most of the top
// edge x2 = 1, vanishes on the other three edges, and has
// ||grad phi||^2 = O(1 + log(1/dt)).
//
// Regions (x = (x1, x2), D = 1 - (1 - dt) x2):
//   K5 = [0, 1/2] x [0, 1/2]          phi = 4 x1 x2 (1 - dt)
//   K4 = [1/2, 1] x [0, 1/2]          phi = 4 x2 (1 - x1)(1 - dt)
//   K1 = {x2 >= 1/2, x1 <= min(D, 1/2)}      phi = x1 / D
//   K3 = {x2 >= 1/2, 1 - x1 <= min(D, 1/2)}  phi = (1 - x1) / D
//   K2 = the rest of the upper half   phi = 1
// Shared boundary points go to the first match in K1, K3, K4, K5, K2.

#include "rrsplit/fem.hpp"
#include "rrsplit/mesh.hpp"
#include "rrsplit/quadrature.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rrsplit::cutoff {

struct CutoffConfig {
  double dt = 0.25;

  bool admissible() const { return dt > 0.0 && dt < 0.5; }
};

enum class Region { K1, K2, K3, K4, K5 };

inline const char* to_string(Region r) {
  constexpr std::array<const char*, 5> names{"K1", "K2", "K3", "K4", "K5"};
  return names[static_cast<int>(r)];
}

inline Region classify(const Point& x, const CutoffConfig& cfg) {
  if (x.x < 0.0 || x.x > 1.0 || x.y < 0.0 || x.y > 1.0) {
    throw std::out_of_range("cutoff::classify: point outside the unit square");
  }
  const double d = 1.0 - (1.0 - cfg.dt) * x.y;
  if (x.y >= 0.5) {
    if (x.x <= 0.5 && x.x <= d) return Region::K1;
    if (x.x >= 0.5 && 1.0 - x.x <= d) return Region::K3;
  }
  if (x.y <= 0.5) return x.x >= 0.5 ? Region::K4 : Region::K5;
  return Region::K2;
}

/// Branch formula of a region, without clamping.
inline double branch_value(Region r, const Point& x, const CutoffConfig& cfg) {
  const double d = 1.0 - (1.0 - cfg.dt) * x.y;
  switch (r) {
    case Region::K1: return x.x / d;
    case Region::K2: return 1.0;
    case Region::K3: return (1.0 - x.x) / d;
    case Region::K4: return 4.0 * x.y * (1.0 - x.x) * (1.0 - cfg.dt);
    case Region::K5: return 4.0 * x.x * x.y * (1.0 - cfg.dt);
  }
  return 0.0;
}

inline Gradient branch_gradient(Region r, const Point& x, const CutoffConfig& cfg) {
  const double c = 1.0 - cfg.dt;
  const double d = 1.0 - c * x.y;
  switch (r) {
    case Region::K1: return {1.0 / d, x.x * c / (d * d)};
    case Region::K2: return {0.0, 0.0};
    case Region::K3: return {-1.0 / d, (1.0 - x.x) * c / (d * d)};
    case Region::K4: return {-4.0 * x.y * c, 4.0 * (1.0 - x.x) * c};
    case Region::K5: return {4.0 * x.y * c, 4.0 * x.x * c};
  }
  return {0.0, 0.0};
}

inline double raw_phi(const Point& x, const CutoffConfig& cfg) {
  return branch_value(classify(x, cfg), x, cfg);
}

/// phi clamped to [0, 1].
inline double phi(const Point& x, const CutoffConfig& cfg) {
  return std::clamp(raw_phi(x, cfg), 0.0, 1.0);
}

/// Gradient of the clamped function; zero where the clamp is active.
inline Gradient grad_phi(const Point& x, const CutoffConfig& cfg) {
  const Region r = classify(x, cfg);
  const double v = branch_value(r, x, cfg);
  if (v < 0.0 || v > 1.0) return {0.0, 0.0};
  return branch_gradient(r, x, cfg);
}

/// |{x in Sigma : phi(x) != 1}| from the region intersections with x2 = 1.
inline double trace_not_one_measure(const CutoffConfig& cfg) {
  const double d = cfg.dt;  // D at x2 = 1
  const double k1 = std::min(d, 0.5);
  const double k3 = std::min(d, 0.5);
  return k1 + k3;
}

/// Integral of |grad phi|^2 by region-wise tensor Gauss rules. In the K1/K3
/// strips the x2 direction is split geometrically in D toward the top edge,
/// where the integrand grows like 1/D^2.
inline double grad_energy(const CutoffConfig& cfg, int quadrature_level = 3) {
  if (!cfg.admissible()) throw std::invalid_argument("grad_energy requires 0 < dt < 1/2");
  if (quadrature_level < 0) throw std::invalid_argument("quadrature_level must be nonnegative");
  const auto outer = quadrature::gauss_legendre(4 + quadrature_level);
  const auto inner = quadrature::gauss_legendre(3);
  const double c = 1.0 - cfg.dt;

  auto sq = [](const Gradient& g) { return g[0] * g[0] + g[1] * g[1]; };
  // integrates over x2 in [y0, y1], x1 in [lo(x2), hi(x2)]
  auto strip = [&](double y0, double y1, auto lo, auto hi) {
    double sum = 0.0;
    for (const auto& qy : outer) {
      const double y = y0 + qy.s * (y1 - y0);
      const double a = lo(y);
      const double b = hi(y);
      for (const auto& qx : inner) {
        const Point p{a + qx.s * (b - a), y};
        sum += qy.weight * (y1 - y0) * qx.weight * (b - a) * sq(grad_phi(p, cfg));
      }
    }
    return sum;
  };
  auto constant = [](double v) { return [v](double) { return v; }; };
  auto d_of = [c](double y) { return 1.0 - c * y; };

  double total = 0.0;
  // lower half: polynomial integrands, split at x1 = 1/2
  total += strip(0.0, 0.5, constant(0.0), constant(0.5));
  total += strip(0.0, 0.5, constant(0.5), constant(1.0));

  // upper half below x2*, where D >= 1/2 and K1/K3 fill the halves
  const double y_star = std::min(1.0, 0.5 / c);
  total += strip(0.5, y_star, constant(0.0), constant(0.5));
  total += strip(0.5, y_star, constant(0.5), constant(1.0));

  // upper strips above x2*: geometric pieces in D from 1/2 down to dt
  const int pieces = 8 << quadrature_level;
  const double ratio = std::pow(cfg.dt / 0.5, 1.0 / pieces);
  double d_hi = 0.5;
  for (int j = 0; j < pieces; ++j) {
    const double d_lo = j + 1 == pieces ? cfg.dt : d_hi * ratio;
    const double y0 = (1.0 - d_hi) / c;
    const double y1 = (1.0 - d_lo) / c;
    total += strip(y0, y1, constant(0.0), d_of);
    total += strip(y0, y1, [&](double y) { return 1.0 - d_of(y); }, constant(1.0));
    d_hi = d_lo;
  }
  return total;
}

/// The closed form stated for this construction.
inline double grad_energy_closed_form(double dt) {
  const double c = 1.0 - dt;
  return (2.0 / c + 2.0 * c / 3.0) * std::log(1.0 / (2.0 * dt)) + 2.0 * c / 3.0 + 2.0 / (3.0 * c);
}

/// Coefficient of log(1/(2 dt)) in the closed form.
inline double log_coefficient(double dt) {
  const double c = 1.0 - dt;
  return 2.0 / c + 2.0 * c / 3.0;
}

/// Slope of grad_energy against log(1/dt) between two step sizes.
inline double measured_log_slope(double dt_coarse, double dt_fine) {
  const double e0 = grad_energy({dt_coarse});
  const double e1 = grad_energy({dt_fine});
  return (e1 - e0) / std::log(dt_coarse / dt_fine);
}

/// Largest jump of phi across the x2 = 1/2 seam, sampled at n points.
inline double seam_jump(const CutoffConfig& cfg, int n = 1001) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x1 = static_cast<double>(i) / (n - 1);
    const Point p{x1, 0.5};
    const Region upper = x1 <= 0.5 ? Region::K1 : Region::K3;
    const Region lower = x1 <= 0.5 ? Region::K5 : Region::K4;
    worst = std::max(worst, std::abs(branch_value(upper, p, cfg) - branch_value(lower, p, cfg)));
  }
  return worst;
}

/// Area of the sampled set where the unclamped branches exceed 1.
inline double overshoot_measure(const CutoffConfig& cfg, int n = 400) {
  int count = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const Point p{(i + 0.5) / n, (j + 0.5) / n};
      if (raw_phi(p, cfg) > 1.0) ++count;
    }
  }
  return static_cast<double>(count) / (static_cast<double>(n) * n);
}

struct AssumptionCheck {
  bool pass = false;
  double measured = 0.0;
  std::string detail;
};

struct CutoffReport {
  double dt = 0.0;
  bool precondition = false;  // 0 < dt < 1/2
  AssumptionCheck range;      // (i) 0 <= phi <= 1
  AssumptionCheck boundary;   // (ii) phi = 0 on the three edges off Sigma
  AssumptionCheck trace;      // (iii) |{phi != 1} on Sigma| = C dt
  AssumptionCheck growth;     // (iv) ||grad phi||^2 <= C (1 + log(1/dt))

  bool all_pass() const {
    return precondition && range.pass && boundary.pass && trace.pass && growth.pass;
  }
};

inline constexpr double growth_bound = 4.0;

inline CutoffReport verify_assumptions(const CutoffConfig& cfg, int samples = 201) {
  CutoffReport r;
  r.dt = cfg.dt;
  r.precondition = cfg.admissible();
  if (!r.precondition) {
    const std::string why = "precondition violated: dt must lie in (0, 1/2)";
    r.range.detail = r.boundary.detail = r.trace.detail = r.growth.detail = why;
    return r;
  }

  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < samples; ++i) {
    for (int j = 0; j < samples; ++j) {
      const double v = phi({static_cast<double>(i) / (samples - 1), static_cast<double>(j) / (samples - 1)}, cfg);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  r.range = {lo >= 0.0 && hi <= 1.0, hi, "sampled min " + std::to_string(lo) + ", max " + std::to_string(hi)};

  double edge = 0.0;
  for (int i = 0; i < 10 * samples; ++i) {
    const double s = static_cast<double>(i) / (10 * samples - 1);
    edge = std::max({edge, std::abs(phi({0.0, s}, cfg)), std::abs(phi({1.0, s}, cfg)),
                     std::abs(phi({s, 0.0}, cfg))});
  }
  r.boundary = {edge < 1e-12, edge, "max |phi| on left/right/bottom edges"};

  const double m = trace_not_one_measure(cfg);
  r.trace = {std::abs(m - 2.0 * cfg.dt) <= 1e-15, m / cfg.dt, "measure / dt"};

  const double e = grad_energy(cfg);
  const double ratio = e / (1.0 + std::log(1.0 / cfg.dt));
  r.growth = {ratio <= growth_bound, ratio, "grad energy / (1 + log(1/dt))"};
  return r;
}

/// CSV rows: dt, measured energy, closed form, growth ratio, trace measure, pass flag.
inline void write_cutoff_csv(std::ostream& os, const std::vector<double>& dts) {
  os << "dt,grad_energy,closed_form,growth_ratio,trace_measure,all_pass\n";
  os << std::setprecision(6);
  for (double dt : dts) {
    const CutoffConfig cfg{dt};
    const auto rep = verify_assumptions(cfg);
    if (!rep.precondition) {
      os << dt << ",nan,nan,nan,nan,0\n";
      continue;
    }
    os << dt << ',' << grad_energy(cfg) << ',' << grad_energy_closed_form(dt) << ','
       << rep.growth.measured << ',' << trace_not_one_measure(cfg) << ',' << (rep.all_pass() ? 1 : 0)
       << "\n";
  }
}

}  // namespace rrsplit::cutoff
