#pragma once

// Conforming P1 finite elements on each part of a CoupledMesh. Dirichlet
// nodes on the outer boundary are eliminated; interface nodes are free on both
// sides and share the trace numbering of mesh.interface_nodes.

#include "rrsplit/mesh.hpp"
#include "rrsplit/quadrature.hpp"
#include "rrsplit/sparse.hpp"

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace rrsplit {

using Gradient = std::array<double, 2>;
using SpaceTimeFn = std::function<double(const Point&, double)>;
using SpaceTimeGradFn = std::function<Gradient(const Point&, double)>;

inline constexpr Index no_dof = -1;

struct DofMap {
  Subdomain subdomain = Subdomain::fluid;
  std::vector<Index> node_to_dof;    // no_dof for Dirichlet nodes and nodes of the other part
  std::vector<Index> dof_to_node;
  std::vector<Index> interface_dofs;  // per interface node in trace order; no_dof at the endpoints

  Index size() const { return static_cast<Index>(dof_to_node.size()); }
};

/// Numbers the free nodes of one part in increasing node order. With
/// `eliminate_dirichlet = false` every node of the part gets a dof.
inline DofMap make_dof_map(const CoupledMesh& mesh, Subdomain sub, bool eliminate_dirichlet = true) {
  DofMap d;
  d.subdomain = sub;
  const auto n = mesh.nodes.size();
  std::vector<char> in_part(n, 0);
  for (const auto& t : mesh.triangles(sub)) {
    for (Index v : t) in_part[static_cast<std::size_t>(v)] = 1;
  }
  if (eliminate_dirichlet) {
    for (Index v : mesh.dirichlet(sub)) in_part[static_cast<std::size_t>(v)] = 0;
  }
  d.node_to_dof.assign(n, no_dof);
  for (std::size_t v = 0; v < n; ++v) {
    if (!in_part[v]) continue;
    d.node_to_dof[v] = d.size();
    d.dof_to_node.push_back(static_cast<Index>(v));
  }
  d.interface_dofs.reserve(mesh.interface_nodes.size());
  for (Index v : mesh.interface_nodes) d.interface_dofs.push_back(d.node_to_dof[v]);
  return d;
}

/// Coefficients of a P1 function over the dofs of one part.
struct Field {
  Subdomain subdomain = Subdomain::fluid;
  Vector values;
};

/// Coefficients of a P1 function on the interface, one per interface node.
struct TraceField {
  Vector values;
};

namespace detail {

struct ElementGeometry {
  double area;
  std::array<Gradient, 3> grad;  // gradients of the barycentric coordinates
};

inline ElementGeometry element_geometry(const CoupledMesh& mesh, const std::array<Index, 3>& t) {
  const Point& a = mesh.nodes[t[0]];
  const Point& b = mesh.nodes[t[1]];
  const Point& c = mesh.nodes[t[2]];
  const double area = signed_area(a, b, c);
  const double s = 1.0 / (2.0 * area);
  return {area,
          {{{(b.y - c.y) * s, (c.x - b.x) * s},
            {(c.y - a.y) * s, (a.x - c.x) * s},
            {(a.y - b.y) * s, (b.x - a.x) * s}}}};
}

inline Point map_point(const CoupledMesh& mesh, const std::array<Index, 3>& t,
                       const std::array<double, 3>& bary) {
  Point p;
  for (int i = 0; i < 3; ++i) {
    p.x += bary[i] * mesh.nodes[t[i]].x;
    p.y += bary[i] * mesh.nodes[t[i]].y;
  }
  return p;
}

template <class ElementMatrix>
CsrMatrix assemble(const CoupledMesh& mesh, const DofMap& dofs, ElementMatrix&& local) {
  std::vector<Triplet> trip;
  trip.reserve(mesh.triangles(dofs.subdomain).size() * 9);
  for (const auto& t : mesh.triangles(dofs.subdomain)) {
    const auto geo = element_geometry(mesh, t);
    for (int i = 0; i < 3; ++i) {
      const Index di = dofs.node_to_dof[t[i]];
      if (di == no_dof) continue;
      for (int j = 0; j < 3; ++j) {
        const Index dj = dofs.node_to_dof[t[j]];
        if (dj == no_dof) continue;
        trip.push_back({di, dj, local(geo, i, j)});
      }
    }
  }
  return from_triplets(dofs.size(), dofs.size(), std::move(trip));
}

inline double nodal_value(const DofMap& dofs, const Field& f, Index node) {
  const Index d = dofs.node_to_dof[node];
  return d == no_dof ? 0.0 : f.values[d];
}

}  // namespace detail

inline CsrMatrix assemble_mass(const CoupledMesh& mesh, const DofMap& dofs) {
  return detail::assemble(mesh, dofs, [](const detail::ElementGeometry& g, int i, int j) {
    return g.area * (i == j ? 2.0 : 1.0) / 12.0;
  });
}

inline CsrMatrix assemble_stiffness(const CoupledMesh& mesh, const DofMap& dofs) {
  return detail::assemble(mesh, dofs, [](const detail::ElementGeometry& g, int i, int j) {
    return g.area * (g.grad[i][0] * g.grad[j][0] + g.grad[i][1] * g.grad[j][1]);
  });
}

inline CsrMatrix assemble_mass(const CoupledMesh& mesh, Subdomain sub) {
  return assemble_mass(mesh, make_dof_map(mesh, sub));
}

inline CsrMatrix assemble_stiffness(const CoupledMesh& mesh, Subdomain sub) {
  return assemble_stiffness(mesh, make_dof_map(mesh, sub));
}

/// L2(Sigma) mass matrix of the P1 trace space, indexed by trace position.
inline CsrMatrix assemble_interface_mass(const CoupledMesh& mesh) {
  const auto n = static_cast<Index>(mesh.interface_nodes.size());
  std::vector<Index> position(mesh.nodes.size(), no_dof);
  for (Index k = 0; k < n; ++k) position[mesh.interface_nodes[k]] = k;
  std::vector<Triplet> trip;
  for (const auto& seg : mesh.interface_segments) {
    const Point& p = mesh.nodes[seg[0]];
    const Point& q = mesh.nodes[seg[1]];
    const double len = std::hypot(p.x - q.x, p.y - q.y);
    const std::array<Index, 2> k{position[seg[0]], position[seg[1]]};
    if (k[0] == no_dof || k[1] == no_dof) throw std::invalid_argument("segment off the interface");
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) trip.push_back({k[i], k[j], len * (i == j ? 2.0 : 1.0) / 6.0});
    }
  }
  return from_triplets(n, n, std::move(trip));
}

/// Embeds the interface mass matrix into the dof space of one part
/// (rows/columns of Dirichlet endpoints are dropped).
inline CsrMatrix interface_mass_on_dofs(const CsrMatrix& interface_mass, const DofMap& dofs) {
  std::vector<Triplet> trip;
  const auto off = interface_mass.row_offsets();
  const auto col = interface_mass.col_indices();
  const auto val = interface_mass.values();
  for (Index i = 0; i < interface_mass.rows(); ++i) {
    const Index di = dofs.interface_dofs[i];
    if (di == no_dof) continue;
    for (Index p = off[i]; p < off[i + 1]; ++p) {
      const Index dj = dofs.interface_dofs[col[p]];
      if (dj != no_dof) trip.push_back({di, dj, val[p]});
    }
  }
  return from_triplets(dofs.size(), dofs.size(), std::move(trip));
}

/// Adds trace coefficients into the interface dofs of a dof vector.
inline void scatter_trace_add(const DofMap& dofs, const Vector& trace, Vector& out) {
  for (std::size_t k = 0; k < dofs.interface_dofs.size(); ++k) {
    const Index d = dofs.interface_dofs[k];
    if (d != no_dof) out[d] += trace[static_cast<Index>(k)];
  }
}

/// Nodal restriction of a field to the interface; Dirichlet endpoints give 0.
inline TraceField trace_restrict(const DofMap& dofs, const Field& field) {
  if (field.subdomain != dofs.subdomain || field.values.size() != dofs.size()) {
    throw std::invalid_argument("trace_restrict: field does not match the dof map");
  }
  TraceField t{Vector::Zero(static_cast<Index>(dofs.interface_dofs.size()))};
  for (std::size_t k = 0; k < dofs.interface_dofs.size(); ++k) {
    const Index d = dofs.interface_dofs[k];
    if (d != no_dof) t.values[static_cast<Index>(k)] = field.values[d];
  }
  return t;
}

/// (f(., t), phi_i) for every free basis function, degree-2 exact quadrature.
template <class F>
Vector assemble_load(const CoupledMesh& mesh, const DofMap& dofs, F&& f, double t) {
  Vector b = Vector::Zero(dofs.size());
  for (const auto& tri : mesh.triangles(dofs.subdomain)) {
    const double area = signed_area(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]);
    for (const auto& qp : quadrature::triangle_degree2()) {
      const double fw = f(detail::map_point(mesh, tri, qp.bary), t) * qp.weight * area;
      for (int i = 0; i < 3; ++i) {
        const Index d = dofs.node_to_dof[tri[i]];
        if (d != no_dof) b[d] += fw * qp.bary[i];
      }
    }
  }
  return b;
}

/// <g(., t), phi_k>_Sigma for every interface node, 3-point Gauss per segment.
template <class G>
Vector assemble_interface_load(const CoupledMesh& mesh, G&& g, double t) {
  const auto n = static_cast<Index>(mesh.interface_nodes.size());
  Vector b = Vector::Zero(n);
  static const auto rule = quadrature::gauss_legendre(3);
  std::vector<Index> position(mesh.nodes.size(), no_dof);
  for (Index k = 0; k < n; ++k) position[mesh.interface_nodes[k]] = k;
  for (const auto& seg : mesh.interface_segments) {
    const Point& p = mesh.nodes[seg[0]];
    const Point& q = mesh.nodes[seg[1]];
    const double len = std::hypot(p.x - q.x, p.y - q.y);
    for (const auto& qp : rule) {
      const Point x{p.x + qp.s * (q.x - p.x), p.y + qp.s * (q.y - p.y)};
      const double gw = g(x, t) * qp.weight * len;
      b[position[seg[0]]] += gw * (1.0 - qp.s);
      b[position[seg[1]]] += gw * qp.s;
    }
  }
  return b;
}

template <class F>
Field interpolate(const CoupledMesh& mesh, const DofMap& dofs, F&& f, double t) {
  Field out{dofs.subdomain, Vector(dofs.size())};
  for (Index d = 0; d < dofs.size(); ++d) out.values[d] = f(mesh.nodes[dofs.dof_to_node[d]], t);
  return out;
}

template <class F>
TraceField interpolate_trace(const CoupledMesh& mesh, F&& f, double t) {
  TraceField out{Vector(static_cast<Index>(mesh.interface_nodes.size()))};
  for (std::size_t k = 0; k < mesh.interface_nodes.size(); ++k) {
    out.values[static_cast<Index>(k)] = f(mesh.nodes[mesh.interface_nodes[k]], t);
  }
  return out;
}

/// ||field - exact(., t)||_{L2} over one part; degree-4 quadrature with the
/// exact function sampled at quadrature points.
template <class F>
double l2_error(const CoupledMesh& mesh, const DofMap& dofs, const Field& field, F&& exact,
                double t) {
  double sum = 0.0;
  for (const auto& tri : mesh.triangles(dofs.subdomain)) {
    const double area = signed_area(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]);
    const std::array<double, 3> nodal{detail::nodal_value(dofs, field, tri[0]),
                                      detail::nodal_value(dofs, field, tri[1]),
                                      detail::nodal_value(dofs, field, tri[2])};
    for (const auto& qp : quadrature::triangle_degree4()) {
      const double uh = qp.bary[0] * nodal[0] + qp.bary[1] * nodal[1] + qp.bary[2] * nodal[2];
      const double e = uh - exact(detail::map_point(mesh, tri, qp.bary), t);
      sum += qp.weight * area * e * e;
    }
  }
  return std::sqrt(sum);
}

/// ||grad(field - exact(., t))||_{L2} over one part.
template <class G>
double h1_semi_error(const CoupledMesh& mesh, const DofMap& dofs, const Field& field,
                     G&& exact_gradient, double t) {
  double sum = 0.0;
  for (const auto& tri : mesh.triangles(dofs.subdomain)) {
    const auto geo = detail::element_geometry(mesh, tri);
    Gradient gh{0.0, 0.0};
    for (int i = 0; i < 3; ++i) {
      const double v = detail::nodal_value(dofs, field, tri[i]);
      gh[0] += v * geo.grad[i][0];
      gh[1] += v * geo.grad[i][1];
    }
    for (const auto& qp : quadrature::triangle_degree4()) {
      const Gradient ge = exact_gradient(detail::map_point(mesh, tri, qp.bary), t);
      const double ex = gh[0] - ge[0];
      const double ey = gh[1] - ge[1];
      sum += qp.weight * geo.area * (ex * ex + ey * ey);
    }
  }
  return std::sqrt(sum);
}

}  // namespace rrsplit
