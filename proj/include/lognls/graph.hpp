#pragma once

// Uniform discretization of a metric star graph: n_edges half-lines glued at a
// single vertex, each truncated to [0, L] with grid x_i = i*h, h = L/M.
//
// Fields store one shared vertex value (x = 0) plus per-edge values at
// i = 1..M; a homogeneous Dirichlet value is assumed at the ghost point
// x = L + h. Integrals use the composite trapezoid rule, so the shared vertex
// carries weight n_edges*h/2 and the outermost stored point h/2.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "lognls/errors.hpp"

namespace lognls {

using Complex = std::complex<double>;

struct StarGraph {
  int n_edges = 0;
  double length = 0.0;
  int m_points = 0;

  double h() const { return length / m_points; }
  double x(int i) const { return i * h(); }

  friend bool operator==(const StarGraph& a, const StarGraph& b) {
    return a.n_edges == b.n_edges && a.length == b.length && a.m_points == b.m_points;
  }
};

inline StarGraph make_graph(int n_edges, double length, int m_points) {
  require(n_edges >= 2, Errc::invalid_parameter, "need at least 2 edges");
  require(length > 0.0 && std::isfinite(length), Errc::invalid_parameter, "length must be positive");
  require(m_points >= 8, Errc::invalid_parameter, "need at least 8 grid points per edge");
  return StarGraph{n_edges, length, m_points};
}

// Values of one function on the graph, continuous at the vertex by
// construction (the vertex value is stored once).
template <class T>
struct GraphField {
  StarGraph graph;
  T vertex_value{};
  std::vector<std::vector<T>> edges;  // n_edges arrays of length m_points (i = 1..M)
};

using RealField = GraphField<double>;
using ComplexField = GraphField<Complex>;

// Equivariant restriction: one representative per edge group. The first k
// edges carry f (multiplicity k), the remaining n_edges - k carry g.
template <class T>
struct ReducedField {
  StarGraph graph;
  int k = 0;
  T vertex_value{};
  std::vector<T> f, g;  // length m_points each (i = 1..M)
};

using RealReducedField = ReducedField<double>;
using ComplexReducedField = ReducedField<Complex>;

template <class T>
GraphField<T> make_field(const StarGraph& g) {
  GraphField<T> v;
  v.graph = g;
  v.vertex_value = T{};
  v.edges.assign(static_cast<std::size_t>(g.n_edges), std::vector<T>(g.m_points, T{}));
  return v;
}

inline int max_reduction_k(int n_edges) { return (n_edges - 1) / 2; }

template <class T>
ReducedField<T> make_reduced_field(const StarGraph& g, int k) {
  require(k >= 1 && k <= max_reduction_k(g.n_edges), Errc::invalid_parameter,
          "reduction index k must satisfy 1 <= k <= (N-1)/2");
  ReducedField<T> r;
  r.graph = g;
  r.k = k;
  r.vertex_value = T{};
  r.f.assign(g.m_points, T{});
  r.g.assign(g.m_points, T{});
  return r;
}

namespace detail {

inline double conj_mul(double a, double b) { return a * b; }
inline Complex conj_mul(const Complex& a, const Complex& b) { return std::conj(a) * b; }

inline double abs2(double a) { return a * a; }
inline double abs2(const Complex& a) { return std::norm(a); }

template <class T>
void check_same_graph(const GraphField<T>& a, const GraphField<T>& b) {
  require(a.graph == b.graph, Errc::graph_mismatch, "fields live on different graphs");
}

}  // namespace detail

// Trapezoid L2 inner product over the whole graph; conjugate-linear in the
// first argument for complex fields.
template <class T>
T l2_inner(const GraphField<T>& a, const GraphField<T>& b) {
  detail::check_same_graph(a, b);
  const StarGraph& g = a.graph;
  const double h = g.h();
  const int M = g.m_points;
  T acc = detail::conj_mul(a.vertex_value, b.vertex_value) * (g.n_edges * h / 2.0);
  for (int j = 0; j < g.n_edges; ++j) {
    const auto& ea = a.edges[j];
    const auto& eb = b.edges[j];
    T s{};
    for (int i = 0; i + 1 < M; ++i) s += detail::conj_mul(ea[i], eb[i]);
    s *= h;
    s += detail::conj_mul(ea[M - 1], eb[M - 1]) * (h / 2.0);
    acc += s;
  }
  return acc;
}

// Weighted inner product on the reduced space: edge terms count with their
// group multiplicities k and N-k, so it equals l2_inner of the lifted fields.
template <class T>
T l2_inner(const ReducedField<T>& a, const ReducedField<T>& b) {
  require(a.graph == b.graph && a.k == b.k, Errc::graph_mismatch,
          "reduced fields live on different graphs or groups");
  const StarGraph& g = a.graph;
  const double h = g.h();
  const int M = g.m_points;
  const int N = g.n_edges;
  auto edge_sum = [&](const std::vector<T>& u, const std::vector<T>& v) {
    T s{};
    for (int i = 0; i + 1 < M; ++i) s += detail::conj_mul(u[i], v[i]);
    s *= h;
    s += detail::conj_mul(u[M - 1], v[M - 1]) * (h / 2.0);
    return s;
  };
  T acc = detail::conj_mul(a.vertex_value, b.vertex_value) * (N * h / 2.0);
  acc += edge_sum(a.f, b.f) * static_cast<double>(a.k);
  acc += edge_sum(a.g, b.g) * static_cast<double>(N - a.k);
  return acc;
}

template <class F>
double l2_norm(const F& a) {
  using std::abs;
  return std::sqrt(abs(l2_inner(a, a)));
}

// H1-with-weight norm (||f'||^2 + ||f||^2 + ||x f||^2)^(1/2). Derivatives are
// centered in the interior and one-sided at the vertex and at x = L; being a
// per-edge quantity, the derivative term does not share the vertex weight.
template <class T>
double weighted_h1_norm(const GraphField<T>& a) {
  const StarGraph& g = a.graph;
  const double h = g.h();
  const int M = g.m_points;
  double acc = detail::abs2(a.vertex_value) * (g.n_edges * h / 2.0);  // ||f||^2 vertex part
  for (int j = 0; j < g.n_edges; ++j) {
    const auto& e = a.edges[j];
    auto u = [&](int i) -> T { return i == 0 ? a.vertex_value : e[i - 1]; };
    // |f|^2 and |x f|^2 along this edge (vertex handled above; x(0) = 0)
    double s = 0.0;
    for (int i = 1; i < M; ++i) s += (1.0 + g.x(i) * g.x(i)) * detail::abs2(e[i - 1]);
    s *= h;
    s += (1.0 + g.length * g.length) * detail::abs2(e[M - 1]) * (h / 2.0);
    // |f'|^2 via difference quotients
    double sd = detail::abs2((u(1) - u(0)) / h) / 2.0;
    for (int i = 1; i < M; ++i) sd += detail::abs2((u(i + 1) - u(i - 1)) / (2.0 * h));
    sd += detail::abs2((u(M) - u(M - 1)) / h) / 2.0;
    acc += s + sd * h;
  }
  return std::sqrt(acc);
}

// Project a group-equivariant field onto the two-representative form.
// The field must actually be equivariant: within each edge group the values
// may deviate from their mean by at most 1e-12 * max|V|.
template <class T>
ReducedField<T> reduce(const GraphField<T>& v, int k) {
  const StarGraph& g = v.graph;
  require(k >= 1 && k <= max_reduction_k(g.n_edges), Errc::invalid_parameter,
          "reduction index k must satisfy 1 <= k <= (N-1)/2");
  const int M = g.m_points;
  const int N = g.n_edges;
  using std::abs;
  double scale = abs(v.vertex_value);
  for (const auto& e : v.edges)
    for (const auto& x : e) scale = std::max(scale, abs(x));
  const double tol = 1e-12 * scale;

  ReducedField<T> r = make_reduced_field<T>(g, k);
  r.vertex_value = v.vertex_value;
  auto average_group = [&](int begin, int end, std::vector<T>& out) {
    const double inv = 1.0 / (end - begin);
    for (int i = 0; i < M; ++i) {
      T s{};
      for (int j = begin; j < end; ++j) s += v.edges[j][i];
      out[i] = s * inv;
    }
    for (int j = begin; j < end; ++j)
      for (int i = 0; i < M; ++i)
        require(abs(v.edges[j][i] - out[i]) <= tol, Errc::not_equivariant,
                "field is not equivariant under the edge-group symmetry");
  };
  average_group(0, k, r.f);
  average_group(k, N, r.g);
  return r;
}

template <class T>
GraphField<T> lift(const ReducedField<T>& r) {
  GraphField<T> v = make_field<T>(r.graph);
  v.vertex_value = r.vertex_value;
  for (int j = 0; j < r.graph.n_edges; ++j) v.edges[j] = (j < r.k) ? r.f : r.g;
  return v;
}

// ca*A + cb*B
template <class T, class S>
GraphField<T> lin_comb(S ca, const GraphField<T>& a, S cb, const GraphField<T>& b) {
  detail::check_same_graph(a, b);
  GraphField<T> out = make_field<T>(a.graph);
  out.vertex_value = ca * a.vertex_value + cb * b.vertex_value;
  for (int j = 0; j < a.graph.n_edges; ++j)
    for (int i = 0; i < a.graph.m_points; ++i)
      out.edges[j][i] = ca * a.edges[j][i] + cb * b.edges[j][i];
  return out;
}

inline ComplexField to_complex(const RealField& v) {
  ComplexField out = make_field<Complex>(v.graph);
  out.vertex_value = v.vertex_value;
  for (int j = 0; j < v.graph.n_edges; ++j)
    for (int i = 0; i < v.graph.m_points; ++i) out.edges[j][i] = v.edges[j][i];
  return out;
}

template <class T>
double sup_norm(const GraphField<T>& v) {
  using std::abs;
  double m = abs(v.vertex_value);
  for (const auto& e : v.edges)
    for (const auto& x : e) m = std::max(m, abs(x));
  return m;
}

}  // namespace lognls
