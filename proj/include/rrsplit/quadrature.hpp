#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace rrsplit::quadrature {

struct TrianglePoint {
  std::array<double, 3> bary;
  double weight;  // fraction of the triangle area
};

/// Interior 3-point rule, exact for degree 2.
inline const std::array<TrianglePoint, 3>& triangle_degree2() {
  static const std::array<TrianglePoint, 3> rule{{
      {{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}, 1.0 / 3.0},
      {{1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0}, 1.0 / 3.0},
      {{1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0}, 1.0 / 3.0},
  }};
  return rule;
}

/// Dunavant 6-point rule, exact for degree 4.
inline const std::array<TrianglePoint, 6>& triangle_degree4() {
  constexpr double a = 0.445948490915965;
  constexpr double b = 0.108103018168070;
  constexpr double c = 0.091576213509771;
  constexpr double d = 0.816847572980459;
  constexpr double wa = 0.223381589678011;
  constexpr double wc = 0.109951743655322;
  static const std::array<TrianglePoint, 6> rule{{
      {{a, a, b}, wa},
      {{a, b, a}, wa},
      {{b, a, a}, wa},
      {{c, c, d}, wc},
      {{c, d, c}, wc},
      {{d, c, c}, wc},
  }};
  return rule;
}

struct LinePoint {
  double s;  // position in [0, 1]
  double weight;
};

/// n-point Gauss-Legendre rule mapped to [0, 1]; exact for degree 2n-1.
inline std::vector<LinePoint> gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one point");
  std::vector<LinePoint> out(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    out[static_cast<std::size_t>(i)] = {0.5 * (1.0 - x), 0.5 * w};
    out[static_cast<std::size_t>(n - 1 - i)] = {0.5 * (1.0 + x), 0.5 * w};
  }
  return out;
}

}  // namespace rrsplit::quadrature
