#pragma once

// Closed-form standing-wave profiles of the logarithmic NLS with a delta
// vertex coupling of strength alpha on a star graph, plus the conserved
// functionals (charge, energy, action) evaluated by the graph quadrature.
//
// A profile with k "bump" edges places a Gaussian centered at a_k = alpha/(2k-N)
// on edges 1..k and the mirrored Gaussian (center -a_k) on the rest; the common
// amplitude e^{(omega+1)/2} carries the frequency dependence. The k = 0 member
// is the symmetric ("tail on every edge") wave, and alpha = 0 degenerates to
// the Gaussian profile of the Kirchhoff vertex.

#include <cmath>
#include <vector>

#include "lognls/errors.hpp"
#include "lognls/graph.hpp"

namespace lognls {

struct ProfileParams {
  int n_edges = 0;
  int k = 0;
  double alpha = 0.0;
  double omega = -1.0;

  double a() const { return alpha / (2.0 * k - n_edges); }
  double amplitude() const { return std::exp((omega + 1.0) / 2.0); }
};

inline ProfileParams make_profile_params(int n_edges, int k, double alpha, double omega) {
  require(n_edges >= 2, Errc::invalid_parameter, "need at least 2 edges");
  require(k >= 0 && k <= (n_edges - 1) / 2, Errc::invalid_parameter,
          "profile index k must satisfy 0 <= k <= (N-1)/2");
  require(std::isfinite(alpha), Errc::invalid_parameter, "alpha must be finite");
  require(std::isfinite(omega), Errc::invalid_parameter, "omega must be finite");
  return ProfileParams{n_edges, k, alpha, omega};
}

inline double gauss_ground(double x) { return std::exp(-x * x / 2.0); }
inline double gauss_ground_deriv(double x) { return -x * std::exp(-x * x / 2.0); }

// Default truncation length: the bump center plus ten Gaussian widths.
inline double default_length(const ProfileParams& p) { return std::abs(p.a()) + 10.0; }

inline RealField profile(const ProfileParams& p, const StarGraph& g) {
  require(g.n_edges == p.n_edges, Errc::graph_mismatch, "graph edge count does not match profile");
  const double a = p.a();
  const double amp = p.amplitude();
  RealField v = make_field<double>(g);
  v.vertex_value = amp * gauss_ground(a);
  for (int j = 0; j < g.n_edges; ++j) {
    const double center = (j < p.k) ? a : -a;
    for (int i = 1; i <= g.m_points; ++i) v.edges[j][i - 1] = amp * gauss_ground(g.x(i) - center);
  }
  return v;
}

// Basis of the (N-1)-dimensional kernel of the Kirchhoff linearization block:
// the j-th element carries +phi0' on edge j and -phi0' on edge j+1. Vertex
// value phi0'(0) = 0, and the fluxes cancel pairwise.
inline std::vector<RealField> kirchhoff_kernel_basis(int n_edges, const StarGraph& g) {
  require(g.n_edges == n_edges, Errc::graph_mismatch, "graph edge count mismatch");
  std::vector<RealField> basis;
  basis.reserve(n_edges - 1);
  for (int j = 0; j + 1 < n_edges; ++j) {
    RealField v = make_field<double>(g);
    for (int i = 1; i <= g.m_points; ++i) {
      const double d = gauss_ground_deriv(g.x(i));
      v.edges[j][i - 1] = d;
      v.edges[j + 1][i - 1] = -d;
    }
    basis.push_back(std::move(v));
  }
  return basis;
}

// The one kernel direction that survives the equivariant reduction:
// ((N-k)/k) phi0' on the first k edges, -phi0' on the rest.
inline RealField equivariant_kernel_generator(int n_edges, int k, const StarGraph& g) {
  require(g.n_edges == n_edges, Errc::graph_mismatch, "graph edge count mismatch");
  require(k >= 1 && k <= max_reduction_k(n_edges), Errc::invalid_parameter,
          "need 1 <= k <= (N-1)/2");
  const double c = static_cast<double>(n_edges - k) / k;
  RealField v = make_field<double>(g);
  for (int j = 0; j < n_edges; ++j) {
    const double w = (j < k) ? c : -1.0;
    for (int i = 1; i <= g.m_points; ++i) v.edges[j][i - 1] = w * gauss_ground_deriv(g.x(i));
  }
  return v;
}

template <class T>
double charge(const GraphField<T>& v) {
  using std::abs;
  return abs(l2_inner(v, v));
}

// Midpoint quadrature of the gradient energy: forward differences hit the
// cell midpoints, so the sum is O(h^2) accurate; the ghost value past x = L
// is the homogeneous Dirichlet zero.
template <class T>
double dirichlet_form(const GraphField<T>& v) {
  const StarGraph& g = v.graph;
  const double h = g.h();
  const int M = g.m_points;
  double acc = 0.0;
  for (int j = 0; j < g.n_edges; ++j) {
    const auto& e = v.edges[j];
    double s = detail::abs2(e[0] - v.vertex_value);
    for (int i = 0; i + 1 < M; ++i) s += detail::abs2(e[i + 1] - e[i]);
    s += detail::abs2(e[M - 1]);
    acc += s / h;
  }
  return acc;
}

namespace detail {

// |v|^2 log|v|^2 with the tiny-amplitude floor; written as 2|v|^2 log|v| so
// a subnormal square cannot poison the logarithm.
template <class T>
double xlogx_sq(const T& v) {
  using std::abs;
  const double av = abs(v);
  if (av < 1e-300) return 0.0;
  return 2.0 * av * av * std::log(av);
}

template <class T>
double log_term(const GraphField<T>& v) {
  const StarGraph& g = v.graph;
  const double h = g.h();
  const int M = g.m_points;
  double acc = xlogx_sq(v.vertex_value) * (g.n_edges * h / 2.0);
  for (int j = 0; j < g.n_edges; ++j) {
    const auto& e = v.edges[j];
    double s = 0.0;
    for (int i = 0; i + 1 < M; ++i) s += xlogx_sq(e[i]);
    s *= h;
    s += xlogx_sq(e[M - 1]) * (h / 2.0);
    acc += s;
  }
  return acc;
}

}  // namespace detail

template <class T>
double energy(const GraphField<T>& v, double alpha) {
  return 0.5 * dirichlet_form(v) - 0.5 * detail::log_term(v) +
         0.5 * alpha * detail::abs2(v.vertex_value);
}

template <class T>
double action(const GraphField<T>& v, double alpha, double omega) {
  return energy(v, alpha) + 0.5 * (omega + 1.0) * charge(v);
}

}  // namespace lognls
