#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <random>

#include "helpers.hpp"
#include "lognls/banded_lu.hpp"
#include "lognls/operators.hpp"
#include "lognls/profiles.hpp"

using namespace lognls;
using Catch::Approx;
using oracle::thrown_code;

namespace {

RealField random_field(const StarGraph& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  RealField v = make_field<double>(g);
  v.vertex_value = unif(rng);
  for (auto& e : v.edges)
    for (auto& x : e) x = unif(rng);
  return v;
}

}  // namespace

TEST_CASE("assembly is frequency-independent and the blocks differ by two") {
  const StarGraph g = make_graph(3, 11.0, 400);
  const GraphOperator t1 = assemble_t1(make_profile_params(3, 1, -1.0, -1.0), g);
  const GraphOperator t1w = assemble_t1(make_profile_params(3, 1, -1.0, 2.0), g);
  CHECK(t1.bdiag == t1w.bdiag);
  CHECK(t1.boff == t1w.boff);
  CHECK(t1.bcouple == t1w.bcouple);
  CHECK(t1.bvertex == t1w.bvertex);
  CHECK(t1.weight == t1w.weight);

  const GraphOperator t2 = assemble_t2(make_profile_params(3, 1, -1.0, -1.0), g);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < g.m_points; ++i) CHECK(t2.pot[c][i] == t1.pot[c][i] + 2.0);
  CHECK(t2.pot_vertex == t1.pot_vertex + 2.0);
}

TEST_CASE("physical application is self-adjoint in the weighted product") {
  const StarGraph g = make_graph(4, 9.0, 150);
  const GraphOperator op = assemble_h_delta(g, 4, -0.8);
  const RealField u = random_field(g, 11), v = random_field(g, 22);
  const double lhs = l2_inner(apply(op, u), v);
  const double rhs = l2_inner(u, apply(op, v));
  CHECK(lhs == Approx(rhs).epsilon(1e-12));
}

TEST_CASE("the delta vertex row reproduces the flux condition") {
  // - u'' with the coupling: apply to a field linear near the vertex and
  // compare the vertex row against (2/h^2)(u0 - mean of neighbors) + 2 alpha u0 / (N h)
  const StarGraph g = make_graph(3, 6.0, 300);
  const double alpha = -1.3;
  const GraphOperator op = assemble_h_delta(g, 3, alpha);
  const RealField u = random_field(g, 5);
  const auto y = apply(op, u);
  const double h = g.h();
  double mean = 0.0;
  for (int j = 0; j < 3; ++j) mean += u.edges[j][0];
  mean /= 3.0;
  const double expected =
      (2.0 / (h * h)) * (u.vertex_value - mean) + 2.0 * alpha * u.vertex_value / (3.0 * h);
  CHECK(y.vertex_value == Approx(expected).epsilon(1e-12));
}

TEST_CASE("reduced and full operators agree on equivariant fields") {
  const ProfileParams p = make_profile_params(5, 2, -1.5, -1.0);
  const StarGraph g = make_graph(5, default_length(p), 240);
  const GraphOperator full = assemble_t1(p, g);
  const GraphOperator red = restrict_equivariant(full, 2);
  CHECK(red.reduced);
  CHECK(red.mult == std::vector<int>{2, 3});

  RealReducedField r = make_reduced_field<double>(g, 2);
  r.vertex_value = 0.7;
  for (int i = 1; i <= g.m_points; ++i) {
    r.f[i - 1] = std::sin(g.x(i)) * std::exp(-g.x(i));
    r.g[i - 1] = std::cos(0.5 * g.x(i)) * std::exp(-g.x(i));
  }
  const RealField via_full = apply(full, lift(r));
  const RealField via_red = lift(apply(red, r));
  double diff = 0.0, scale = sup_norm(via_full);
  for (int j = 0; j < 5; ++j)
    for (int i = 0; i < g.m_points; ++i)
      diff = std::max(diff, std::abs(via_full.edges[j][i] - via_red.edges[j][i]));
  diff = std::max(diff, std::abs(via_full.vertex_value - via_red.vertex_value));
  CHECK(diff < 1e-12 * scale);
}

TEST_CASE("group-inhomogeneous restriction is rejected") {
  const ProfileParams p = make_profile_params(5, 1, -1.0, -1.0);
  const StarGraph g = make_graph(5, default_length(p), 100);
  const GraphOperator full = assemble_t1(p, g);
  CHECK(thrown_code([&] { restrict_equivariant(full, 2); }) == Errc::group_inhomogeneous);
  CHECK(restrict_equivariant(full, 1).mult == std::vector<int>{1, 4});
}

TEST_CASE("symmetrized entries match the quadratic form assembled densely") {
  const ProfileParams p = make_profile_params(3, 1, -0.7, -1.0);
  const StarGraph g = make_graph(3, default_length(p), 80);
  const GraphOperator op = assemble_t1(p, g);
  const auto qp = oracle::dense_form(g, {1, 1, 1}, p.alpha, [&](int c, double x) {
    const double center = (c < 1) ? p.a() : -p.a();
    return (x - center) * (x - center) - 3.0;
  });
  // B = D^{-1/2} Q D^{-1/2}
  const Eigen::VectorXd dsq = qp.mass.diagonal().cwiseSqrt();
  const Eigen::MatrixXd B_expected =
      dsq.cwiseInverse().asDiagonal() * qp.form * dsq.cwiseInverse().asDiagonal();
  const Eigen::MatrixXd B = oracle::dense_sym(op);
  CHECK((B - B_expected).cwiseAbs().maxCoeff() < 1e-10 * B_expected.cwiseAbs().maxCoeff());

  const std::vector<double> wv = weight_vector(op);
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(wv.data(), op.dim());
  CHECK((w - qp.mass.diagonal()).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("gershgorin bounds bracket the dense spectrum") {
  const ProfileParams p = make_profile_params(3, 1, -1.0, -1.0);
  const StarGraph g = make_graph(3, default_length(p), 90);
  const GraphOperator op = assemble_t2(p, g);
  const Eigen::MatrixXd B = oracle::dense_sym(op);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B);
  const auto [lo, hi] = gershgorin_bounds(op);
  CHECK(es.eigenvalues().minCoeff() >= lo);
  CHECK(es.eigenvalues().maxCoeff() <= hi);
  CHECK(norm_bound(op) >= es.eigenvalues().cwiseAbs().maxCoeff());
}

TEST_CASE("banded LU reproduces dense solves") {
  const ProfileParams p = make_profile_params(4, 1, -1.0, -1.0);
  const StarGraph g = make_graph(4, default_length(p), 60);
  const GraphOperator op = assemble_t1(p, g);
  const BandedLayout lay = BandedLayout::of(op);
  const Eigen::MatrixXd B = oracle::dense_sym(op);
  const int n = op.dim();

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::VectorXd rhs(n);
  for (int i = 0; i < n; ++i) rhs[i] = unif(rng);

  SECTION("real shift") {
    const double shift = 5.0;
    std::vector<double> x(rhs.data(), rhs.data() + n);
    BandedLU<double> lu(op, lay, 1.0, shift);
    REQUIRE(lu.ok());
    lu.solve(x);
    const Eigen::MatrixXd A = B + shift * Eigen::MatrixXd::Identity(n, n);
    const Eigen::VectorXd expected = A.fullPivLu().solve(rhs);
    const Eigen::VectorXd got = Eigen::Map<Eigen::VectorXd>(x.data(), n);
    CHECK((got - expected).norm() < 1e-10 * expected.norm());
  }

  SECTION("complex Crank-Nicolson matrix") {
    const Complex mult(0.0, 0.05);
    std::vector<Complex> x(n);
    for (int i = 0; i < n; ++i) x[i] = Complex(rhs[i], -0.3 * rhs[i]);
    const Eigen::VectorXcd rhs_c = Eigen::Map<Eigen::VectorXcd>(x.data(), n);
    BandedLU<Complex> lu(op, lay, mult, Complex(1.0, 0.0));
    REQUIRE(lu.ok());
    lu.solve(x);
    const Eigen::MatrixXcd A =
        Eigen::MatrixXcd::Identity(n, n) + mult * B.cast<Complex>();
    const Eigen::VectorXcd expected = A.fullPivLu().solve(rhs_c);
    const Eigen::VectorXcd got = Eigen::Map<Eigen::VectorXcd>(x.data(), n);
    CHECK((got - expected).norm() < 1e-10 * expected.norm());
  }
}

TEST_CASE("operator application round-trips through pack and unpack") {
  const StarGraph g = make_graph(3, 10.0, 50);
  const GraphOperator op = assemble_t1_kirchhoff(3, g);
  const RealField u = random_field(g, 33);
  const auto x = pack(op, u);
  const RealField back = unpack_full(op, x);
  CHECK(back.vertex_value == u.vertex_value);
  CHECK(back.edges == u.edges);
  CHECK(thrown_code([&] { apply_sym(op, std::vector<double>(3)); }) == Errc::graph_mismatch);
}
