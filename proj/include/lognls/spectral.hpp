#pragma once

// Eigenvalue machinery for the graph operators.
//
// Counting: the symmetrized matrix factors as LDL^T when unknowns are
// eliminated chain by chain from the far end toward the vertex, with the
// vertex last; the pivots are the classical tridiagonal Sturm recursion per
// chain plus one scalar Schur complement at the vertex. By Sylvester's law
// the number of negative pivots of B - sigma*I equals the number of
// eigenvalues below sigma, at O(dim) cost. Tiny pivots are clamped to
// -pivmin exactly as in LAPACK's bisection codes.
//
// Eigenvalues: bisection on the count. Eigenvectors: inverse iteration with
// the banded LU, with per-vector shift perturbations and in-cluster
// reorthogonalization for (numerically) repeated eigenvalues; reported
// eigenvalues are Rayleigh quotients of the converged vectors.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lognls/banded_lu.hpp"
#include "lognls/errors.hpp"
#include "lognls/graph.hpp"
#include "lognls/operators.hpp"
#include "lognls/profiles.hpp"

namespace lognls {

namespace detail {

inline double sturm_pivmin(const GraphOperator& op) {
  double emax2 = 1.0;
  for (const auto& e : op.boff)
    for (double v : e) emax2 = std::max(emax2, v * v);
  for (double v : op.bcouple) emax2 = std::max(emax2, v * v);
  return std::numeric_limits<double>::min() * emax2;
}

}  // namespace detail

// Number of eigenvalues of the (symmetrized) operator strictly below sigma.
inline int eigenvalue_count_below(const GraphOperator& op, double sigma) {
  const int M = op.graph.m_points;
  const double pivmin = detail::sturm_pivmin(op);
  int count = 0;
  double schur = op.bvertex - sigma;
  for (int c = 0; c < op.chains(); ++c) {
    const double* d = op.bdiag[c].data();
    const double* e = op.boff[c].data();
    double p = d[M - 1] - sigma;
    if (std::abs(p) < pivmin) p = -pivmin;
    if (p < 0.0) ++count;
    for (int t = M - 2; t >= 0; --t) {
      p = d[t] - sigma - e[t] * e[t] / p;
      if (std::abs(p) < pivmin) p = -pivmin;
      if (p < 0.0) ++count;
    }
    schur -= op.bcouple[c] * op.bcouple[c] / p;
  }
  if (std::abs(schur) < pivmin) schur = -pivmin;
  if (schur < 0.0) ++count;
  return count;
}

namespace detail {

inline double bisect_width_tol(const GraphOperator& op) {
  auto [lo, hi] = gershgorin_bounds(op);
  const double sc = std::max({std::abs(lo), std::abs(hi), 1.0});
  return std::max(8.0 * std::numeric_limits<double>::epsilon() * sc, 1e-11);
}

// j-th eigenvalue (0-based, ascending) by bisection on the Sturm count.
inline double bisect_eigenvalue(const GraphOperator& op, int j, double tol) {
  auto [lo, hi] = gershgorin_bounds(op);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    if (eigenvalue_count_below(op, mid) >= j + 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double nrm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

inline void orthogonalize_against(std::vector<double>& x,
                                  const std::vector<const std::vector<double>*>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto* q : basis) {
      const double c = dot(x, *q);
      for (std::size_t i = 0; i < x.size(); ++i) x[i] -= c * (*q)[i];
    }
}

struct IterationResult {
  double lambda;  // Rayleigh quotient
  std::vector<double> vec;
  double residual;  // ||B v - lambda v|| (plain 2-norm of symmetric coords)
};

// Inverse iteration for one cluster of nearby eigenvalue approximations.
inline std::vector<IterationResult> invert_cluster(const GraphOperator& op,
                                                   const BandedLayout& lay,
                                                   const std::vector<double>& lambdas,
                                                   double width_tol, std::uint64_t seed) {
  const int n = op.dim();
  const double bnorm = norm_bound(op);
  const double sep =
      std::max({4.0 * width_tol, 64.0 * std::numeric_limits<double>::epsilon() * bnorm});
  std::vector<IterationResult> out;
  out.reserve(lambdas.size());  // accepted holds pointers into out
  std::vector<const std::vector<double>*> accepted;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  for (std::size_t v = 0; v < lambdas.size(); ++v) {
    double shift = lambdas[v] + (lambdas.size() > 1 ? (static_cast<double>(v) + 1.0) * sep : 0.0);
    std::optional<BandedLU<double>> lu;
    for (int attempt = 0; attempt < 5 && !lu; ++attempt) {
      BandedLU<double> trial(op, lay, 1.0, -shift);
      if (trial.ok())
        lu.emplace(std::move(trial));
      else
        shift += sep + bnorm * 1e-14;
    }
    require(lu.has_value(), Errc::no_convergence, "could not factor shifted operator");

    std::vector<double> x(n);
    for (auto& xi : x) xi = unif(rng);
    IterationResult best{lambdas[v], {}, std::numeric_limits<double>::infinity()};
    for (int it = 0; it < 8; ++it) {
      orthogonalize_against(x, accepted);
      double nx = nrm2(x);
      if (!(nx > 0.0) || !std::isfinite(nx)) {
        for (auto& xi : x) xi = unif(rng);
        nx = nrm2(x);
      }
      for (auto& xi : x) xi /= nx;
      lu->solve(x);
      const double ny = nrm2(x);
      if (!std::isfinite(ny) || ny == 0.0) {
        for (auto& xi : x) xi = unif(rng);
        continue;
      }
      for (auto& xi : x) xi /= ny;
      orthogonalize_against(x, accepted);
      const double nz = nrm2(x);
      if (nz < 0.1) {  // collapsed onto the accepted span; restart
        for (auto& xi : x) xi = unif(rng);
        continue;
      }
      for (auto& xi : x) xi /= nz;
      std::vector<double> bx = apply_sym(op, x);
      const double rq = dot(x, bx);
      double rr = 0.0;
      for (int i = 0; i < n; ++i) {
        const double r = bx[i] - rq * x[i];
        rr += r * r;
      }
      const double res = std::sqrt(rr);
      if (res < best.residual) best = IterationResult{rq, x, res};
      if (res <= 8.0 * std::numeric_limits<double>::epsilon() * bnorm) break;
    }
    require(best.residual <= 1e-8 * bnorm, Errc::no_convergence,
            "inverse iteration failed to reach the residual tolerance");
    out.push_back(std::move(best));
    accepted.push_back(&out.back().vec);
  }
  return out;
}

}  // namespace detail

struct SpectralReport {
  OperatorKind kind = OperatorKind::h_delta;
  int n_edges = 0;
  int k = 0;
  double alpha = 0.0;
  bool reduced = false;
  int m_points = 0;
  double length = 0.0;

  std::vector<double> eigenvalues;  // ascending
  std::vector<double> residuals;    // ||B u - lambda u|| / norm_bound per pair
  std::vector<std::vector<double>> vectors;  // symmetrized coords, orthonormal

  double tol_zero = 0.0;
  double norm_bound = 0.0;
  double gap = std::numeric_limits<double>::quiet_NaN();  // smallest eigenvalue > tol_zero
  int morse_index = 0;
  int kernel_dim = 0;
  bool morse_inconclusive = false;
};

// Physical eigenvector (field values) for a computed pair.
template <class Report>
GraphField<double> eigenfield_full(const GraphOperator& op, const Report& rep, int idx) {
  std::vector<double> u = rep.vectors.at(idx);
  const std::vector<double> w = weight_vector(op);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] /= std::sqrt(w[i]);
  return unpack_full(op, u);
}

template <class Report>
ReducedField<double> eigenfield_reduced(const GraphOperator& op, const Report& rep, int idx) {
  std::vector<double> u = rep.vectors.at(idx);
  const std::vector<double> w = weight_vector(op);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] /= std::sqrt(w[i]);
  return unpack_reduced(op, u);
}

// Lowest m eigenpairs plus global Morse/kernel counters.
inline SpectralReport eigen_lowest(const GraphOperator& op, int m, bool want_vectors = true,
                                   double tol_zero = -1.0) {
  require(m >= 1 && m <= op.dim(), Errc::invalid_parameter, "invalid eigenpair request");
  if (tol_zero <= 0.0) tol_zero = default_zero_tol(op.graph);

  SpectralReport rep;
  rep.kind = op.kind;
  rep.n_edges = op.n_edges;
  rep.k = op.k;
  rep.alpha = op.alpha;
  rep.reduced = op.reduced;
  rep.m_points = op.graph.m_points;
  rep.length = op.graph.length;
  rep.tol_zero = tol_zero;
  rep.norm_bound = lognls::norm_bound(op);

  const double wtol = detail::bisect_width_tol(op);
  std::vector<double> approx(m);
  for (int j = 0; j < m; ++j) approx[j] = detail::bisect_eigenvalue(op, j, wtol);

  if (want_vectors) {
    const BandedLayout lay = BandedLayout::of(op);
    // generous grouping: over-clustering only adds harmless reorthogonalization
    const double cluster_gap = std::max(64.0 * wtol, 1e-6 * std::max(1.0, rep.norm_bound));
    int base = 0;
    std::uint64_t seed = 0x6c6f676e6c73ull ^ (static_cast<std::uint64_t>(op.dim()) << 20);
    while (base < m) {
      int end = base + 1;
      while (end < m && approx[end] - approx[end - 1] <= cluster_gap) ++end;
      std::vector<double> cluster(approx.begin() + base, approx.begin() + end);
      auto pairs = detail::invert_cluster(op, lay, cluster, wtol, seed + base);
      for (auto& pr : pairs) {
        rep.eigenvalues.push_back(pr.lambda);
        rep.residuals.push_back(pr.residual / rep.norm_bound);
        rep.vectors.push_back(std::move(pr.vec));
      }
      base = end;
    }
    // Rayleigh refinement can reorder inside clusters; restore ascending order.
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return rep.eigenvalues[a] < rep.eigenvalues[b]; });
    SpectralReport sorted = rep;
    for (int i = 0; i < m; ++i) {
      sorted.eigenvalues[i] = rep.eigenvalues[order[i]];
      sorted.residuals[i] = rep.residuals[order[i]];
      sorted.vectors[i] = std::move(rep.vectors[order[i]]);
    }
    rep = std::move(sorted);
  } else {
    rep.eigenvalues = approx;
    rep.residuals.assign(m, 0.0);
  }

  rep.morse_index = eigenvalue_count_below(op, -tol_zero);
  rep.kernel_dim = eigenvalue_count_below(op, tol_zero) - rep.morse_index;
  rep.morse_inconclusive =
      rep.morse_index - eigenvalue_count_below(op, -10.0 * tol_zero) > 0;
  const int above = rep.morse_index + rep.kernel_dim;  // index of first eigenvalue > tol_zero
  if (above < op.dim()) rep.gap = detail::bisect_eigenvalue(op, above, wtol);
  return rep;
}

struct MorseCount {
  int count = 0;
  bool inconclusive = false;  // an eigenvalue sits in the gray band (-10 tol, -tol)
  double tol_zero = 0.0;
};

inline MorseCount morse_index(const GraphOperator& op, double tol_zero = -1.0) {
  if (tol_zero <= 0.0) tol_zero = default_zero_tol(op.graph);
  MorseCount mc;
  mc.tol_zero = tol_zero;
  mc.count = eigenvalue_count_below(op, -tol_zero);
  mc.inconclusive = mc.count - eigenvalue_count_below(op, -10.0 * tol_zero) > 0;
  return mc;
}

inline int kernel_dimension(const GraphOperator& op, double tol_zero = -1.0) {
  if (tol_zero <= 0.0) tol_zero = default_zero_tol(op.graph);
  return eigenvalue_count_below(op, tol_zero) - eigenvalue_count_below(op, -tol_zero);
}

// Weighted cosine similarity between a computed eigenvector (symmetrized
// coordinates) and a reference coefficient vector in physical values.
inline double cosine_with_field(const GraphOperator& op, const std::vector<double>& u_sym,
                                const std::vector<double>& physical) {
  const std::vector<double> w = weight_vector(op);
  double dot = 0.0, nref = 0.0;
  for (std::size_t i = 0; i < u_sym.size(); ++i) {
    const double scaled = physical[i] * std::sqrt(w[i]);
    dot += u_sym[i] * scaled;
    nref += scaled * scaled;
  }
  const double nu = detail::nrm2(u_sym);
  return std::abs(dot) / (nu * std::sqrt(nref));
}

struct MorseBoundReport {
  int n_t1_full = 0;
  int bound = 0;
  bool satisfied = false;
  bool refined = false;  // true if the base grid violated the bound and 2M was consulted
  double tol_zero = 0.0;
};

// Appendix bound on the full-graph negative count of the first block:
// n(T1) <= k+1 for alpha < 0 and n(T1) <= N-k for alpha > 0. A violation on
// the base grid is re-checked once on the doubled grid before being flagged
// as a discretization fault.
inline MorseBoundReport verify_morse_bounds(const ProfileParams& p, const StarGraph& g) {
  require(p.alpha != 0.0, Errc::invalid_parameter, "bounds need alpha != 0");
  MorseBoundReport rep;
  rep.bound = (p.alpha < 0.0) ? p.k + 1 : p.n_edges - p.k;
  MorseCount mc = morse_index(assemble_t1(p, g));
  rep.n_t1_full = mc.count;
  rep.tol_zero = mc.tol_zero;
  rep.satisfied = mc.count <= rep.bound;
  if (!rep.satisfied) {
    const StarGraph g2 = make_graph(g.n_edges, g.length, 2 * g.m_points);
    MorseCount mc2 = morse_index(assemble_t1(p, g2));
    rep.refined = true;
    rep.n_t1_full = mc2.count;
    rep.tol_zero = mc2.tol_zero;
    rep.satisfied = mc2.count <= rep.bound;
  }
  return rep;
}

enum class Verdict { stable, spectrally_unstable, inconclusive };

inline const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::stable:               return "STABLE";
    case Verdict::spectrally_unstable:  return "SPECTRALLY_UNSTABLE";
    case Verdict::inconclusive:         return "INCONCLUSIVE";
  }
  return "unknown";
}

struct HypothesisChecks {
  bool t2_kernel_dim_one = false;
  bool t2_kernel_matches_profile = false;
  bool t1_kernel_trivial = false;
  bool negative_count_finite = false;
  bool gap_positive = false;
  bool refinement_stable = false;
  double t2_kernel_similarity = 0.0;
};

struct StabilityReport {
  ProfileParams params;
  int m_points = 0;
  double length = 0.0;
  int n_t1 = 0, n_t2 = 0, n_total = 0;
  int n_total_refined = 0;
  SpectralReport t1, t2;  // reduced-space reports
  HypothesisChecks checks;
  Verdict verdict = Verdict::inconclusive;
};

// Morse-index verdict on the equivariant subspace: total count 1 means the
// wave passes the orbital-stability test, 2 means spectral instability. The
// count and the structural hypotheses are re-checked on a doubled grid; any
// mismatch or gray-zone eigenvalue yields INCONCLUSIVE instead of a guess.
inline StabilityReport stability_verdict(const ProfileParams& p, const StarGraph& g) {
  require(p.k >= 1, Errc::invalid_parameter, "stability analysis needs a bump group (k >= 1)");
  require(p.alpha != 0.0, Errc::invalid_parameter, "stability analysis needs alpha != 0");

  StabilityReport rep;
  rep.params = p;
  rep.m_points = g.m_points;
  rep.length = g.length;

  const GraphOperator t1 = restrict_equivariant(assemble_t1(p, g), p.k);
  const GraphOperator t2 = restrict_equivariant(assemble_t2(p, g), p.k);
  MorseCount m1 = morse_index(t1), m2 = morse_index(t2);
  const int want = std::max(4, m1.count + m2.count + 2);
  rep.t1 = eigen_lowest(t1, want);
  rep.t2 = eigen_lowest(t2, want);
  rep.n_t1 = m1.count;
  rep.n_t2 = m2.count;
  rep.n_total = m1.count + m2.count;

  // hypotheses of the stability theorem, in discrete form
  rep.checks.t2_kernel_dim_one = rep.t2.kernel_dim == 1;
  if (rep.checks.t2_kernel_dim_one) {
    const RealField phi = profile(p, g);
    const std::vector<double> ref = pack(t2, reduce(phi, p.k));
    rep.checks.t2_kernel_similarity = cosine_with_field(t2, rep.t2.vectors[rep.t2.morse_index], ref);
    rep.checks.t2_kernel_matches_profile = rep.checks.t2_kernel_similarity > 0.999;
  }
  rep.checks.t1_kernel_trivial = rep.t1.kernel_dim == 0;
  rep.checks.negative_count_finite = !m1.inconclusive && !m2.inconclusive;
  rep.checks.gap_positive = std::isfinite(rep.t1.gap) && rep.t1.gap > 0.0 &&
                            std::isfinite(rep.t2.gap) && rep.t2.gap > 0.0;

  const StarGraph g2 = make_graph(g.n_edges, g.length, 2 * g.m_points);
  const GraphOperator t1r = restrict_equivariant(assemble_t1(p, g2), p.k);
  const GraphOperator t2r = restrict_equivariant(assemble_t2(p, g2), p.k);
  MorseCount m1r = morse_index(t1r), m2r = morse_index(t2r);
  rep.n_total_refined = m1r.count + m2r.count;
  rep.checks.refinement_stable = rep.n_total_refined == rep.n_total &&
                                 kernel_dimension(t1r) == rep.t1.kernel_dim &&
                                 kernel_dimension(t2r) == rep.t2.kernel_dim &&
                                 !m1r.inconclusive && !m2r.inconclusive;

  const bool hypotheses_ok = rep.checks.t2_kernel_dim_one && rep.checks.t2_kernel_matches_profile &&
                             rep.checks.t1_kernel_trivial && rep.checks.negative_count_finite &&
                             rep.checks.gap_positive && rep.checks.refinement_stable;
  if (!hypotheses_ok)
    rep.verdict = Verdict::inconclusive;
  else if (rep.n_total == 1)
    rep.verdict = Verdict::stable;
  else if (rep.n_total == 2)
    rep.verdict = Verdict::spectrally_unstable;
  else
    rep.verdict = Verdict::inconclusive;
  return rep;
}

}  // namespace lognls
