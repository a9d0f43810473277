#pragma once

// Test-side oracles, kept independent of the library's assembly formulas:
// the dense operators below are built straight from the discrete quadratic
// form (difference quotients + trapezoid mass), then solved as a generalized
// symmetric eigenproblem.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "lognls/graph.hpp"
#include "lognls/operators.hpp"

namespace oracle {

inline constexpr double kSqrtPi = 1.7724538509055160273;

struct DensePair {
  Eigen::MatrixXd form;  // quadratic-form matrix Q
  Eigen::MatrixXd mass;  // diagonal trapezoid weights D
};

// Chains with multiplicities `mult`; potential given as pot(c, x) with
// pot(any, 0) the common vertex value. Unknown 0 is the vertex, then chain c
// occupies indices 1 + c*M .. 1 + c*M + (M-1) for x_1..x_M; a homogeneous
// Dirichlet ghost sits past x_M.
template <class Pot>
DensePair dense_form(const lognls::StarGraph& g, const std::vector<int>& mult, double alpha,
                     Pot&& pot) {
  const int M = g.m_points;
  const int C = static_cast<int>(mult.size());
  const double h = g.h();
  const int dim = C * M + 1;
  auto idx = [&](int c, int i) { return 1 + c * M + (i - 1); };
  int N = 0;
  for (int m : mult) N += m;

  Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(dim, dim);
  D(0, 0) = N * h / 2.0;
  Q(0, 0) += alpha + D(0, 0) * pot(0, 0.0);
  for (int c = 0; c < C; ++c) {
    const double m = mult[c];
    int prev = 0;
    for (int i = 1; i <= M; ++i) {
      const int cur = idx(c, i);
      Q(prev, prev) += m / h;
      Q(cur, cur) += m / h;
      Q(prev, cur) -= m / h;
      Q(cur, prev) -= m / h;
      prev = cur;
    }
    Q(prev, prev) += m / h;  // ghost Dirichlet value beyond x = L
    for (int i = 1; i <= M; ++i) {
      const double w = (i == M) ? m * h / 2.0 : m * h;
      Q(idx(c, i), idx(c, i)) += w * pot(c, g.x(i));
      D(idx(c, i), idx(c, i)) += w;
    }
  }
  return {std::move(Q), std::move(D)};
}

// Same discretization as the library operator, rebuilt dense from its stored
// potential samples (exercises the symmetrization/entry plumbing only).
inline DensePair dense_form(const lognls::GraphOperator& op) {
  auto pot = [&](int c, double x) {
    if (x == 0.0) return op.pot_vertex;
    const int i = static_cast<int>(std::lround(x / op.graph.h()));
    return op.pot[c][i - 1];
  };
  return dense_form(op.graph, op.mult, op.alpha, pot);
}

struct DenseEigs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;  // physical values, mass-orthonormal columns
};

inline DenseEigs dense_eigs(const DensePair& qp) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(qp.form, qp.mass);
  if (es.info() != Eigen::Success) throw std::runtime_error("dense solver failed");
  return {es.eigenvalues(), es.eigenvectors()};
}

// Dense copy of the library's symmetrized matrix B.
inline Eigen::MatrixXd dense_sym(const lognls::GraphOperator& op) {
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(op.dim(), op.dim());
  lognls::for_each_sym_entry(op, [&](int i, int j, double v) {
    B(i, j) = v;
    if (i != j) B(j, i) = v;
  });
  return B;
}

// Composite Simpson rule, n subintervals (n even).
template <class F>
double simpson(F&& f, double a, double b, int n) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

template <class Fn>
lognls::Errc thrown_code(Fn&& fn) {
  try {
    fn();
  } catch (const lognls::Error& e) {
    return e.code();
  }
  throw std::runtime_error("expected the call to throw lognls::Error");
}

}  // namespace oracle
