#pragma once

// Manufactured solutions for the coupled problem. Volume forcing and
// interface data are hand-differentiated closed forms; residual_oracle checks
// them against finite differences of the exact fields.

#include "rrsplit/fem.hpp"
#include "rrsplit/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace rrsplit {

struct ManufacturedCase {
  std::string name;
  int k = 1;
  InterfaceGeometry geometry;
  double nu_f = 1.0;
  double nu_s = 1.0;
  double alpha = 1.0;

  SpaceTimeFn exact_u, exact_w, exact_q;
  SpaceTimeGradFn grad_u, grad_w;
  SpaceTimeFn exact_l;       // multiplier as stated with the case
  SpaceTimeFn l_consistent;  // nu_f grad(u) . n_f from exact_u

  SpaceTimeFn f_f, f_s;  // f_f = u_t - nu_f lap u, f_s = q_t - nu_s lap w
  SpaceTimeFn g_D;       // q - u on the interface
  SpaceTimeFn g_N;       // nu_s grad w . n_s + nu_f grad u . n_f on the interface
};

inline const std::vector<std::string>& case_names() {
  static const std::vector<std::string> names{"pp_uniform", "ph_uniform", "pp_slanted",
                                              "pp_conforming", "zero"};
  return names;
}

namespace detail {

// Attaches the interface data shared by every case: g_D from q and u,
// g_N and l_consistent from the closed-form gradients.
inline void attach_interface_data(ManufacturedCase& c) {
  const Point nf = c.geometry.normal_fluid();
  c.g_D = [u = c.exact_u, q = c.exact_q](const Point& x, double t) { return q(x, t) - u(x, t); };
  c.g_N = [gu = c.grad_u, gw = c.grad_w, nf, nu_f = c.nu_f, nu_s = c.nu_s](const Point& x,
                                                                           double t) {
    const Gradient a = gu(x, t);
    const Gradient b = gw(x, t);
    return nu_f * (a[0] * nf.x + a[1] * nf.y) - nu_s * (b[0] * nf.x + b[1] * nf.y);
  };
  c.l_consistent = [gu = c.grad_u, nf, nu_f = c.nu_f](const Point& x, double t) {
    const Gradient a = gu(x, t);
    return nu_f * (a[0] * nf.x + a[1] * nf.y);
  };
}

// x(1-x)y(1-y) family with amplitude c e^t
struct PolyBubble {
  double amp;
  double operator()(const Point& p, double t) const {
    return amp * std::exp(t) * p.x * (1.0 - p.x) * p.y * (1.0 - p.y);
  }
  Gradient grad(const Point& p, double t) const {
    const double e = amp * std::exp(t);
    return {e * (1.0 - 2.0 * p.x) * p.y * (1.0 - p.y), e * p.x * (1.0 - p.x) * (1.0 - 2.0 * p.y)};
  }
  // u_t - nu lap u
  double heat_residual(const Point& p, double t, double nu) const {
    const double e = amp * std::exp(t);
    return e * (p.x * (1.0 - p.x) * p.y * (1.0 - p.y) +
                2.0 * nu * (p.x * (1.0 - p.x) + p.y * (1.0 - p.y)));
  }
};

// sin(pi x) sin(pi y) e^{-rate t}
struct SineMode {
  double rate;
  double operator()(const Point& p, double t) const {
    using std::numbers::pi;
    return std::exp(-rate * t) * std::sin(pi * p.x) * std::sin(pi * p.y);
  }
  Gradient grad(const Point& p, double t) const {
    using std::numbers::pi;
    const double e = pi * std::exp(-rate * t);
    return {e * std::cos(pi * p.x) * std::sin(pi * p.y), e * std::sin(pi * p.x) * std::cos(pi * p.y)};
  }
  double heat_residual(const Point& p, double t, double nu) const {
    using std::numbers::pi;
    return (2.0 * pi * pi * nu - rate) * (*this)(p, t);
  }
};

}  // namespace detail

/// Looks up a registered manufactured case by name. The forcing and flux
/// data are built for the given diffusion coefficients.
inline ManufacturedCase get_case(const std::string& name, double nu_f = 1.0, double nu_s = 1.0) {
  using std::numbers::pi;
  if (!(nu_f > 0.0) || !(nu_s > 0.0)) throw std::invalid_argument("get_case: nu_f and nu_s must be positive");
  ManufacturedCase c;
  c.name = name;
  c.nu_f = nu_f;
  c.nu_s = nu_s;
  if (name == "pp_uniform") {
    c.k = 1;
    c.geometry = InterfaceGeometry::horizontal(0.75);
    const detail::SineMode u{2.0 * pi * pi};
    const detail::SineMode w{2.0 * pi};
    c.exact_u = u;
    c.exact_w = w;
    c.exact_q = w;
    c.grad_u = [u](const Point& p, double t) { return u.grad(p, t); };
    c.grad_w = [w](const Point& p, double t) { return w.grad(p, t); };
    c.f_f = [u, nu = c.nu_f](const Point& p, double t) { return u.heat_residual(p, t, nu); };
    c.f_s = [w, nu = c.nu_s](const Point& p, double t) { return w.heat_residual(p, t, nu); };
    c.exact_l = [](const Point& p, double t) {
      return pi * std::exp(-2.0 * pi * t) * std::sin(pi * p.x) * std::cos(pi * p.y);
    };
  } else if (name == "ph_uniform" || name == "pp_slanted") {
    const bool slanted = name == "pp_slanted";
    c.k = slanted ? 1 : 2;
    c.geometry = slanted ? InterfaceGeometry::slanted(0.5, 0.25) : InterfaceGeometry::horizontal(0.75);
    // q = w_t = w for the k = 2 case, q = w for k = 1
    const detail::PolyBubble u{1e-3};
    c.exact_u = u;
    c.exact_w = u;
    c.exact_q = u;
    c.grad_u = [u](const Point& p, double t) { return u.grad(p, t); };
    c.grad_w = c.grad_u;
    c.f_f = [u, nu = c.nu_f](const Point& p, double t) { return u.heat_residual(p, t, nu); };
    c.f_s = [u, nu = c.nu_s](const Point& p, double t) { return u.heat_residual(p, t, nu); };
    if (slanted) {
      c.exact_l = [](const Point& p, double t) {
        return 1e-3 / std::sqrt(5.0) * std::exp(t) *
               (2.0 * p.x * (1.0 - p.x) * (1.0 - 2.0 * p.y) - (1.0 - 2.0 * p.x) * p.y * (1.0 - p.y));
      };
    } else {
      c.exact_l = [](const Point& p, double t) {
        return 1e-3 * std::exp(t) * p.x * (1.0 - p.x) * (1.0 - 2.0 * p.y);
      };
    }
  } else if (name == "pp_conforming") {
    c.k = 1;
    c.geometry = InterfaceGeometry::horizontal(0.75);
    const detail::SineMode u{1.0};
    c.exact_u = u;
    c.exact_w = u;
    c.exact_q = u;
    c.grad_u = [u](const Point& p, double t) { return u.grad(p, t); };
    c.grad_w = c.grad_u;
    c.f_f = [u, nu = c.nu_f](const Point& p, double t) { return u.heat_residual(p, t, nu); };
    c.f_s = [u, nu = c.nu_s](const Point& p, double t) { return u.heat_residual(p, t, nu); };
    c.exact_l = [](const Point& p, double t) {
      return pi * std::exp(-t) * std::sin(pi * p.x) * std::cos(pi * p.y);
    };
  } else if (name == "zero") {
    c.k = 1;
    c.geometry = InterfaceGeometry::horizontal(0.75);
    const SpaceTimeFn zero = [](const Point&, double) { return 0.0; };
    c.exact_u = c.exact_w = c.exact_q = c.exact_l = c.f_f = c.f_s = zero;
    c.grad_u = c.grad_w = [](const Point&, double) { return Gradient{0.0, 0.0}; };
  } else {
    throw std::invalid_argument("unknown manufactured case '" + name + "'");
  }
  // the stated multipliers are fluxes for unit nu_f
  c.exact_l = [l = c.exact_l, nu_f](const Point& p, double t) { return nu_f * l(p, t); };
  detail::attach_interface_data(c);
  return c;
}

/// Volume forcing (f_f, f_s) of a case.
inline std::pair<SpaceTimeFn, SpaceTimeFn> synthesize_forcing(const ManufacturedCase& c) {
  return {c.f_f, c.f_s};
}

struct MultiplierValue {
  double stated;      // the case's closed-form l
  double consistent;  // nu_f grad(u) . n_f
};

inline MultiplierValue exact_multiplier(const ManufacturedCase& c, const Point& x, double t) {
  return {c.exact_l(x, t), c.l_consistent(x, t)};
}

/// Breakdown of the finite-difference residuals of a case.
struct ResidualReport {
  double fluid = 0.0;       // max |u_t - nu_f lap u - f_f|
  double solid = 0.0;       // max |q_t - nu_s lap w - f_s|
  double kinematic = 0.0;   // max |q - u - g_D| on the interface
  double dynamic = 0.0;     // max |flux sum - g_N| on the interface
  double time_relation = 0.0;  // max |q - d_t^{k-1} w|

  double max() const { return std::max({fluid, solid, kinematic, dynamic, time_relation}); }
};

/// Central finite differences (space 1e-4, time 1e-5) of the exact fields at
/// the sample points; each point is also projected vertically onto the
/// interface to sample the two interface conditions.
inline ResidualReport residual_report(const ManufacturedCase& c, const std::vector<Point>& points,
                                      double t) {
  constexpr double hx = 1e-4;
  constexpr double ht = 1e-5;
  auto dt = [&](const SpaceTimeFn& f, const Point& p) {
    return (f(p, t + ht) - f(p, t - ht)) / (2.0 * ht);
  };
  auto lap = [&](const SpaceTimeFn& f, const Point& p) {
    const double c0 = f(p, t);
    return (f({p.x + hx, p.y}, t) + f({p.x - hx, p.y}, t) + f({p.x, p.y + hx}, t) +
            f({p.x, p.y - hx}, t) - 4.0 * c0) /
           (hx * hx);
  };
  auto grad = [&](const SpaceTimeFn& f, const Point& p) {
    return Gradient{(f({p.x + hx, p.y}, t) - f({p.x - hx, p.y}, t)) / (2.0 * hx),
                    (f({p.x, p.y + hx}, t) - f({p.x, p.y - hx}, t)) / (2.0 * hx)};
  };
  const Point nf = c.geometry.normal_fluid();

  ResidualReport r;
  for (const Point& p : points) {
    if (c.geometry.offset(p) < 0.0) {
      r.fluid = std::max(r.fluid, std::abs(dt(c.exact_u, p) - c.nu_f * lap(c.exact_u, p) - c.f_f(p, t)));
    } else {
      r.solid = std::max(r.solid, std::abs(dt(c.exact_q, p) - c.nu_s * lap(c.exact_w, p) - c.f_s(p, t)));
    }
    const double rel = c.k == 1 ? c.exact_w(p, t) : dt(c.exact_w, p);
    r.time_relation = std::max(r.time_relation, std::abs(c.exact_q(p, t) - rel));

    const Point s{p.x, c.geometry.y_at(p.x)};
    r.kinematic = std::max(r.kinematic, std::abs(c.exact_q(s, t) - c.exact_u(s, t) - c.g_D(s, t)));
    const Gradient gu = grad(c.exact_u, s);
    const Gradient gw = grad(c.exact_w, s);
    const double flux = c.nu_f * (gu[0] * nf.x + gu[1] * nf.y) - c.nu_s * (gw[0] * nf.x + gw[1] * nf.y);
    r.dynamic = std::max(r.dynamic, std::abs(flux - c.g_N(s, t)));
  }
  return r;
}

inline double residual_oracle(const ManufacturedCase& c, const std::vector<Point>& points, double t) {
  return residual_report(c, points, t).max();
}

}  // namespace rrsplit
