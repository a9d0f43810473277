#pragma once
// Behavior of the second reduced eigenvalue of T1 as the vertex strength
// varies: its slope at alpha = 0, the tracked eigenvalue curve across a set
// of strengths, and the constancy of the negative-eigenvalue count along a
// ray of strengths of one sign.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "lognls/errors.hpp"
#include "lognls/graph.hpp"
#include "lognls/operators.hpp"
#include "lognls/profiles.hpp"
#include "lognls/spectral.hpp"

namespace lognls {

// Slope of the second reduced eigenvalue at alpha = 0, evaluated as the
// quadrature quotient 2(N-k)/k * int_0^inf x phi0'(x)^2 dx / ||generator||^2
// on the working grid.  The closed form of this quotient is 4/(N sqrt(pi)),
// independent of k.
inline double slope_mu0(int n_edges, int k, const StarGraph& g) {
  require(n_edges == g.n_edges, Errc::graph_mismatch, "edge count differs from the grid's");
  require(k >= 1 && k <= max_reduction_k(n_edges), Errc::invalid_parameter,
          "k outside 1..floor((N-1)/2)");
  const int M = g.m_points;
  const double h = g.h();
  double num = 0.0;  // trapezoid; the integrand vanishes at x = 0
  for (int i = 1; i <= M; ++i) {
    const double d = gauss_ground_deriv(g.x(i));
    const double w = (i == M) ? 0.5 * h : h;
    num += w * g.x(i) * d * d;
  }
  num *= 2.0 * double(n_edges - k) / double(k);
  const RealField gen = equivariant_kernel_generator(n_edges, k, g);
  const double den = l2_inner(gen, gen);
  return num / den;
}

// Second reduced eigenvalue of T1 sampled across vertex strengths, with the
// branch identified by eigenvector overlap rather than by index.
struct EigenCurve {
  int n_edges = 0;
  int k = 0;
  std::vector<double> alphas;     // ascending
  std::vector<double> mu2;        // tracked branch value at each strength
  std::vector<double> residuals;  // eigenpair residual of the tracked branch
  std::vector<double> overlaps;   // overlap with the neighbouring sample's vector
  double slope_fd = 0.0;          // centered difference at the smallest +-delta pair
  double slope_analytic = 0.0;    // quadrature value of the closed-form quotient
  bool sign_pattern = false;      // mu2 and alpha share signs at every nonzero sample
};

// Strengths {-d, +d : d in deltas} plus 0, sorted ascending.
inline std::vector<double> default_curve_samples(std::vector<double> deltas = {0.02, 0.05, 0.1}) {
  std::vector<double> s{0.0};
  for (double d : deltas) {
    s.push_back(d);
    s.push_back(-d);
  }
  std::sort(s.begin(), s.end());
  return s;
}

// steps strengths between alpha_from and alpha_to (same sign, 0 excluded),
// log-spaced in magnitude and returned ascending.
inline std::vector<double> log_spaced_samples(double alpha_from, double alpha_to, int steps) {
  require(steps >= 2, Errc::invalid_parameter, "need at least two samples");
  require(alpha_from != 0.0 && alpha_to != 0.0 && (alpha_from > 0) == (alpha_to > 0),
          Errc::invalid_parameter, "strength ray must exclude 0");
  const double sgn = alpha_from > 0 ? 1.0 : -1.0;
  const double la = std::log(std::abs(alpha_from));
  const double lb = std::log(std::abs(alpha_to));
  std::vector<double> s(steps);
  for (int i = 0; i < steps; ++i)
    s[i] = sgn * std::exp(la + (lb - la) * double(i) / double(steps - 1));
  std::sort(s.begin(), s.end());
  return s;
}

namespace detail {

// Lowest few reduced T1 eigenpairs at one strength on the shared grid.
inline SpectralReport curve_sample(int n_edges, int k, double alpha, const StarGraph& g) {
  const ProfileParams p = make_profile_params(n_edges, k, alpha, -1.0);
  const GraphOperator op = restrict_equivariant(assemble_t1(p, g), k);
  return eigen_lowest(op, 4, true);
}

}  // namespace detail

// Tracks the eigenvalue branch that passes through the Kirchhoff kernel at
// alpha = 0.  All samples share one grid so eigenvectors at neighbouring
// strengths live in the same coordinates; the chain is seeded at the sample
// closest to 0 with the closed-form kernel generator and extended outward by
// maximal overlap.  Overlap <= 0.9 between neighbours aborts with
// tracking_lost.
inline EigenCurve eigencurve(int n_edges, int k, std::vector<double> alpha_samples,
                             const StarGraph& g) {
  require(!alpha_samples.empty(), Errc::invalid_parameter, "no strengths given");
  std::sort(alpha_samples.begin(), alpha_samples.end());

  EigenCurve curve;
  curve.n_edges = n_edges;
  curve.k = k;
  curve.alphas = alpha_samples;
  const int n = int(alpha_samples.size());
  curve.mu2.assign(n, 0.0);
  curve.residuals.assign(n, 0.0);
  curve.overlaps.assign(n, 0.0);

  // Independent eigensolves per sample; the continuity chain is assembled
  // afterwards in strength order.
  std::vector<SpectralReport> reps(n);
  for (int i = 0; i < n; ++i) reps[i] = detail::curve_sample(n_edges, k, alpha_samples[i], g);

  // Reference vector at the most central sample: the Kirchhoff kernel
  // generator packed into symmetrized coordinates.
  int center = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(alpha_samples[i]) < std::abs(alpha_samples[center])) center = i;
  const GraphOperator op0 = restrict_equivariant(
      assemble_t1(make_profile_params(n_edges, k, alpha_samples[center], -1.0), g), k);
  std::vector<double> ref = pack(op0, reduce(equivariant_kernel_generator(n_edges, k, g), k));
  {
    const std::vector<double> w = weight_vector(op0);
    for (std::size_t i = 0; i < ref.size(); ++i) ref[i] *= std::sqrt(w[i]);
    const double nr = detail::nrm2(ref);
    for (double& v : ref) v /= nr;
  }

  const auto follow = [&](int i, const std::vector<double>& prev) {
    const SpectralReport& rep = reps[i];
    int best = -1;
    double best_ov = 0.0;
    for (std::size_t j = 0; j < rep.vectors.size(); ++j) {
      const double ov = std::abs(detail::dot(rep.vectors[j], prev));
      if (ov > best_ov) {
        best_ov = ov;
        best = int(j);
      }
    }
    if (best < 0 || best_ov <= 0.9) {
      std::ostringstream msg;
      msg << "eigenvector continuity lost at alpha = " << alpha_samples[i] << " (overlap "
          << best_ov << ")";
      fail(Errc::tracking_lost, msg.str());
    }
    curve.mu2[i] = rep.eigenvalues[best];
    curve.residuals[i] = rep.residuals[best];
    curve.overlaps[i] = best_ov;
    return rep.vectors[best];
  };

  std::vector<double> chain = follow(center, ref);
  std::vector<double> right = chain;
  for (int i = center + 1; i < n; ++i) right = follow(i, right);
  std::vector<double> left = chain;
  for (int i = center - 1; i >= 0; --i) left = follow(i, left);

  // Centered difference at the smallest matched +-delta pair.
  double best_delta = 0.0;
  int ip = -1, im = -1;
  for (int i = 0; i < n; ++i) {
    const double a = alpha_samples[i];
    if (a <= 0.0) continue;
    for (int j = 0; j < n; ++j) {
      if (std::abs(alpha_samples[j] + a) > 1e-12 * std::max(1.0, a)) continue;
      if (best_delta == 0.0 || a < best_delta) {
        best_delta = a;
        ip = i;
        im = j;
      }
    }
  }
  require(ip >= 0, Errc::invalid_parameter, "samples contain no matched +-delta pair");
  curve.slope_fd = (curve.mu2[ip] - curve.mu2[im]) / (2.0 * best_delta);
  curve.slope_analytic = slope_mu0(n_edges, k, g);

  curve.sign_pattern = true;
  for (int i = 0; i < n; ++i) {
    if (alpha_samples[i] == 0.0) continue;
    if (curve.mu2[i] * alpha_samples[i] <= 0.0) curve.sign_pattern = false;
  }
  return curve;
}

// Negative-eigenvalue count of reduced T1 along a one-signed ray of vertex
// strengths.
struct ContinuationReport {
  int n_edges = 0;
  int k = 0;
  std::vector<double> alphas;    // ascending
  std::vector<int> counts;       // negative count at each sample
  std::vector<int> refinements;  // doublings of the base grid consulted per sample
  int count = 0;                 // the constant value over the ray
  bool constant = false;
};

namespace detail {

struct RayCount {
  int count = 0;
  bool conclusive = false;
  int level = 0;
};

// Count at one strength, refining the grid (2M, then 4M) while the
// classification is ambiguous or disagrees with the expected value.
inline RayCount ray_count(int n_edges, int k, double alpha, int m_base, int expected) {
  RayCount out;
  for (int level = 0; level <= 2; ++level) {
    const ProfileParams p = make_profile_params(n_edges, k, alpha, -1.0);
    const StarGraph g = make_graph(n_edges, default_length(p), m_base << level);
    const GraphOperator op = restrict_equivariant(assemble_t1(p, g), k);
    const MorseCount mc = morse_index(op);
    out.count = mc.count;
    out.conclusive = !mc.inconclusive;
    out.level = level;
    if (out.conclusive && (expected < 0 || mc.count == expected)) break;
  }
  return out;
}

}  // namespace detail

// Asserts that the negative count of reduced T1 does not change along the
// ray.  The reference value is taken at the strength closest to 0, where the
// split branch is widest relative to the grid; a sample that still disagrees
// after two grid doublings raises count_changed with the crossing strength
// and the eigenvalue nearest zero there.
inline ContinuationReport continuation_count(int n_edges, int k, double alpha_from,
                                             double alpha_to, int steps, const StarGraph& g) {
  require(n_edges == g.n_edges, Errc::graph_mismatch, "edge count differs from the grid's");
  require(k >= 1 && k <= max_reduction_k(n_edges), Errc::invalid_parameter,
          "k outside 1..floor((N-1)/2)");
  ContinuationReport rep;
  rep.n_edges = n_edges;
  rep.k = k;
  rep.alphas = log_spaced_samples(alpha_from, alpha_to, steps);
  const int n = int(rep.alphas.size());
  rep.counts.assign(n, 0);
  rep.refinements.assign(n, 0);

  int start = 0;
  for (int i = 1; i < n; ++i)
    if (std::abs(rep.alphas[i]) < std::abs(rep.alphas[start])) start = i;

  const detail::RayCount ref = detail::ray_count(n_edges, k, rep.alphas[start], g.m_points, -1);
  if (!ref.conclusive) {
    std::ostringstream msg;
    msg << "count at alpha = " << rep.alphas[start] << " still ambiguous after refinement";
    fail(Errc::count_changed, msg.str());
  }
  rep.count = ref.count;
  rep.counts[start] = ref.count;
  rep.refinements[start] = ref.level;

  const auto visit = [&](int i) {
    detail::RayCount rc = detail::ray_count(n_edges, k, rep.alphas[i], g.m_points, rep.count);
    rep.counts[i] = rc.count;
    rep.refinements[i] = rc.level;
    if (!rc.conclusive || rc.count != rep.count) {
      // Fetch the offending eigenvalue for the report: the one nearest zero.
      const ProfileParams p = make_profile_params(n_edges, k, rep.alphas[i], -1.0);
      const StarGraph gf =
          make_graph(n_edges, default_length(p), g.m_points << rc.level);
      const GraphOperator op = restrict_equivariant(assemble_t1(p, gf), k);
      const SpectralReport sr = eigen_lowest(op, std::max(rep.count + 1, 3), false);
      double nearest = sr.eigenvalues.empty() ? 0.0 : sr.eigenvalues[0];
      for (double ev : sr.eigenvalues)
        if (std::abs(ev) < std::abs(nearest)) nearest = ev;
      std::ostringstream msg;
      if (rc.conclusive)
        msg << "negative count changed from " << rep.count << " to " << rc.count;
      else
        msg << "negative count ambiguous (nominal " << rc.count << ", reference " << rep.count
            << ")";
      msg << " at alpha = " << rep.alphas[i] << " (eigenvalue nearest zero " << nearest
          << ", zero threshold " << sr.tol_zero << ", refinement level " << rc.level << ")";
      fail(Errc::count_changed, msg.str());
    }
  };
  for (int i = start + 1; i < n; ++i) visit(i);
  for (int i = start - 1; i >= 0; --i) visit(i);
  rep.constant = true;
  return rep;
}

}  // namespace lognls
