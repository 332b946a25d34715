#pragma once

// Triangulations of the unit square split by a straight interface into a
// lower fluid part and an upper solid part, with node-matched traces.

#include "rrsplit/sparse.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rrsplit {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class Subdomain { fluid, solid };

inline const char* to_string(Subdomain s) { return s == Subdomain::fluid ? "fluid" : "solid"; }

/// Straight interface x2 = slope * x1 + intercept. Horizontal lines have zero slope.
struct InterfaceGeometry {
  enum class Kind { horizontal, slanted };

  Kind kind = Kind::horizontal;
  double slope = 0.0;
  double intercept = 0.75;

  static InterfaceGeometry horizontal(double y0) {
    if (!(y0 > 0.0 && y0 < 1.0)) throw std::invalid_argument("horizontal interface needs y0 in (0,1)");
    return {Kind::horizontal, 0.0, y0};
  }

  static InterfaceGeometry slanted(double slope, double intercept) {
    const double left = intercept;
    const double right = slope + intercept;
    if (!(left > 0.0 && left < 1.0 && right > 0.0 && right < 1.0)) {
      throw std::invalid_argument("slanted interface must cross both vertical sides of the square");
    }
    return {Kind::slanted, slope, intercept};
  }

  double y_at(double x) const { return slope * x + intercept; }

  /// Vertical offset of p from the line; positive above (solid side).
  double offset(const Point& p) const { return p.y - y_at(p.x); }

  /// Unit normal on the interface pointing out of the fluid region.
  Point normal_fluid() const {
    const double s = std::hypot(slope, 1.0);
    return {-slope / s, 1.0 / s};
  }

  /// Length of the line clipped to the unit square.
  double length() const { return std::hypot(1.0, slope); }
};

struct CoupledMesh {
  InterfaceGeometry geometry;
  std::vector<Point> nodes;
  std::vector<std::array<Index, 3>> triangles_f;
  std::vector<std::array<Index, 3>> triangles_s;
  std::vector<Index> dirichlet_f;  // sorted node ids on the outer boundary of each part
  std::vector<Index> dirichlet_s;
  std::vector<Index> interface_nodes;  // ordered by increasing x
  std::vector<std::array<Index, 2>> interface_segments;
  double h_max = 0.0;

  const std::vector<std::array<Index, 3>>& triangles(Subdomain s) const {
    return s == Subdomain::fluid ? triangles_f : triangles_s;
  }
  const std::vector<Index>& dirichlet(Subdomain s) const {
    return s == Subdomain::fluid ? dirichlet_f : dirichlet_s;
  }
};

inline double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

namespace detail {

inline double longest_edge(const CoupledMesh& m) {
  double h = 0.0;
  for (const auto* tris : {&m.triangles_f, &m.triangles_s}) {
    for (const auto& t : *tris) {
      for (int e = 0; e < 3; ++e) {
        const Point& p = m.nodes[t[e]];
        const Point& q = m.nodes[t[(e + 1) % 3]];
        h = std::max(h, std::hypot(p.x - q.x, p.y - q.y));
      }
    }
  }
  return h;
}

inline bool on_square_boundary(const Point& p) {
  constexpr double eps = 1e-14;
  return p.x <= eps || p.x >= 1.0 - eps || p.y <= eps || p.y >= 1.0 - eps;
}

// Column-structured grid: columns at x_i = i/nx; each column holds rows_f + 1
// fluid nodes from y=0 up to the interface and rows_s solid nodes above it.
// `y_of(i, j)` gives the height of row j (0..rows_f+rows_s) in column i.
template <class YOf>
CoupledMesh column_grid(InterfaceGeometry geom, Index nx, Index rows_f, Index rows_s, YOf y_of,
                        bool shortest_diagonal) {
  CoupledMesh m;
  m.geometry = geom;
  const Index ny = rows_f + rows_s;
  auto id = [&](Index i, Index j) { return i * (ny + 1) + j; };
  m.nodes.resize(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (Index i = 0; i <= nx; ++i) {
    const double x = static_cast<double>(i) / static_cast<double>(nx);
    for (Index j = 0; j <= ny; ++j) {
      m.nodes[id(i, j)] = {x, j == rows_f ? geom.y_at(x) : y_of(i, j)};
    }
  }

  auto dist2 = [&](Index a, Index b) {
    const Point& p = m.nodes[a];
    const Point& q = m.nodes[b];
    return (p.x - q.x) * (p.x - q.x) + (p.y - q.y) * (p.y - q.y);
  };
  for (Index i = 0; i < nx; ++i) {
    for (Index j = 0; j < ny; ++j) {
      const Index a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), d = id(i, j + 1);
      auto& target = j < rows_f ? m.triangles_f : m.triangles_s;
      if (shortest_diagonal && dist2(b, d) < dist2(a, c)) {
        target.push_back({a, b, d});
        target.push_back({b, c, d});
      } else {
        target.push_back({a, b, c});
        target.push_back({a, c, d});
      }
    }
  }

  for (Index i = 0; i <= nx; ++i) m.interface_nodes.push_back(id(i, rows_f));
  for (Index i = 0; i < nx; ++i) m.interface_segments.push_back({id(i, rows_f), id(i + 1, rows_f)});

  for (Index i = 0; i <= nx; ++i) {
    for (Index j = 0; j <= ny; ++j) {
      if (!on_square_boundary(m.nodes[id(i, j)])) continue;
      if (j <= rows_f) m.dirichlet_f.push_back(id(i, j));
      if (j >= rows_f) m.dirichlet_s.push_back(id(i, j));
    }
  }
  std::sort(m.dirichlet_f.begin(), m.dirichlet_f.end());
  std::sort(m.dirichlet_s.begin(), m.dirichlet_s.end());
  m.h_max = longest_edge(m);
  return m;
}

}  // namespace detail

/// Structured right-triangle mesh with the interface at y = 3/4. Row spacing
/// is (3/4)/ceil(3n/4) below and (1/4)/ceil(n/4) above so a grid row always
/// falls on the interface.
inline CoupledMesh uniform_split_mesh(Index n) {
  if (n < 2) throw std::invalid_argument("uniform_split_mesh: n must be at least 2");
  const Index rows_f = (3 * n + 3) / 4;
  const Index rows_s = (n + 3) / 4;
  const double y0 = 0.75;
  auto y_of = [&](Index, Index j) {
    if (j <= rows_f) return y0 * static_cast<double>(j) / static_cast<double>(rows_f);
    return y0 + (1.0 - y0) * static_cast<double>(j - rows_f) / static_cast<double>(rows_s);
  };
  return detail::column_grid(InterfaceGeometry::horizontal(y0), n, rows_f, rows_s, y_of, false);
}

inline constexpr Index max_slanted_level = 10;

/// Mapped column grid aligned with x2 = x1/2 + 1/4: 2^(level+2) columns, and
/// the same number of rows stretched between the line and each outer edge.
inline CoupledMesh slanted_interface_mesh(Index level) {
  if (level < 0 || level > max_slanted_level) {
    throw std::invalid_argument("slanted_interface_mesh: level must lie in [0, 10]");
  }
  const auto geom = InterfaceGeometry::slanted(0.5, 0.25);
  const Index nx = Index{4} << level;
  const Index rows = nx;
  auto y_of = [&](Index i, Index j) {
    const double x = static_cast<double>(i) / static_cast<double>(nx);
    const double ys = geom.y_at(x);
    if (j <= rows) return ys * static_cast<double>(j) / static_cast<double>(rows);
    return ys + (1.0 - ys) * static_cast<double>(j - rows) / static_cast<double>(rows);
  };
  return detail::column_grid(geom, nx, rows, rows, y_of, true);
}

/// Checks the structural invariants of a coupled mesh; empty result means valid.
inline std::vector<std::string> validate(const CoupledMesh& m) {
  std::vector<std::string> out;
  const auto n_nodes = static_cast<Index>(m.nodes.size());
  double area = 0.0;
  std::array<std::set<Index>, 2> used;
  for (auto sub : {Subdomain::fluid, Subdomain::solid}) {
    const auto& tris = m.triangles(sub);
    for (std::size_t t = 0; t < tris.size(); ++t) {
      const auto& tri = tris[t];
      if (std::any_of(tri.begin(), tri.end(), [&](Index v) { return v < 0 || v >= n_nodes; })) {
        out.push_back(std::string(to_string(sub)) + " triangle " + std::to_string(t) +
                      " references a missing node");
        continue;
      }
      const double a = signed_area(m.nodes[tri[0]], m.nodes[tri[1]], m.nodes[tri[2]]);
      if (!(a > 0.0)) {
        out.push_back(std::string(to_string(sub)) + " triangle " + std::to_string(t) +
                      " has nonpositive area " + std::to_string(a));
      }
      area += a;
      used[static_cast<int>(sub)].insert(tri.begin(), tri.end());
    }
  }
  if (std::abs(area - 1.0) > 1e-12) {
    std::ostringstream s;
    s << std::setprecision(17) << "triangle areas sum to " << area << ", expected 1";
    out.push_back(s.str());
  }

  const std::set<Index> df(m.dirichlet_f.begin(), m.dirichlet_f.end());
  const std::set<Index> ds(m.dirichlet_s.begin(), m.dirichlet_s.end());
  for (std::size_t k = 0; k < m.interface_nodes.size(); ++k) {
    const Index v = m.interface_nodes[k];
    if (v < 0 || v >= n_nodes) {
      out.push_back("interface node " + std::to_string(k) + " out of range");
      continue;
    }
    const Point& p = m.nodes[v];
    if (std::abs(m.geometry.offset(p)) > 1e-12) {
      out.push_back("interface node " + std::to_string(v) + " is off the interface line");
    }
    if (!used[0].count(v) || !used[1].count(v)) {
      out.push_back("interface node " + std::to_string(v) + " is not shared by both triangulations");
    }
    if (k > 0 && !(p.x > m.nodes[m.interface_nodes[k - 1]].x)) {
      out.push_back("interface nodes not ordered by increasing x at " + std::to_string(v));
    }
    const bool endpoint = p.x <= 1e-14 || p.x >= 1.0 - 1e-14;
    const bool in_dirichlet = df.count(v) || ds.count(v);
    if (endpoint && !(df.count(v) && ds.count(v))) {
      out.push_back("interface endpoint " + std::to_string(v) + " missing from a Dirichlet set");
    }
    if (!endpoint && in_dirichlet) {
      out.push_back("interior interface node " + std::to_string(v) + " marked Dirichlet");
    }
  }
  double seg_len = 0.0;
  for (const auto& s : m.interface_segments) {
    const Point& p = m.nodes[s[0]];
    const Point& q = m.nodes[s[1]];
    seg_len += std::hypot(p.x - q.x, p.y - q.y);
  }
  if (std::abs(seg_len - m.geometry.length()) > 1e-12) {
    out.push_back("interface segments do not cover the interface");
  }
  return out;
}

/// Plain-text dump: one record per line, index followed by its fields.
inline void write_mesh(std::ostream& os, const CoupledMesh& m) {
  os << std::setprecision(17);
  os << "# nodes " << m.nodes.size() << "\n";
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    os << i << ' ' << m.nodes[i].x << ' ' << m.nodes[i].y << "\n";
  }
  auto tris = [&](const char* name, const auto& list) {
    os << "# " << name << ' ' << list.size() << "\n";
    for (std::size_t i = 0; i < list.size(); ++i) {
      os << i << ' ' << list[i][0] << ' ' << list[i][1] << ' ' << list[i][2] << "\n";
    }
  };
  tris("triangles_f", m.triangles_f);
  tris("triangles_s", m.triangles_s);
  os << "# interface_nodes " << m.interface_nodes.size() << "\n";
  for (std::size_t i = 0; i < m.interface_nodes.size(); ++i) {
    os << i << ' ' << m.interface_nodes[i] << "\n";
  }
  os << "# h_max " << m.h_max << "\n";
}

}  // namespace rrsplit
