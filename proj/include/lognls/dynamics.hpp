#pragma once
// Time integration of the logarithmic flow with the delta vertex, phase-
// optimal distance to a reference profile, the linearized block operator on
// the reduced space, and measured growth rates for unstable profiles.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <random>
#include <sstream>
#include <vector>

#include "lognls/banded_lu.hpp"
#include "lognls/errors.hpp"
#include "lognls/graph.hpp"
#include "lognls/lapack_defs.hpp"
#include "lognls/operators.hpp"
#include "lognls/profiles.hpp"
#include "lognls/spectral.hpp"

namespace lognls {

// Distance to the orbit {e^{i theta} Phi}: the L2-optimal phase has the
// closed form theta* = arg<Phi, U>, and the distance is evaluated in the
// weighted H1 norm at that phase.  The plain L2 distance at its own optimum
// is reported alongside.
struct OrbitalDistance {
  double dist = 0.0;     // weighted-H1 distance at theta*
  double theta_star = 0.0;
  double l2_dist = 0.0;  // closed-form optimum of the L2 part
};

inline OrbitalDistance orbital_distance(const ComplexField& u, const ComplexField& phi) {
  require(u.graph == phi.graph, Errc::graph_mismatch, "fields live on different graphs");
  const Complex ip = l2_inner(phi, u);
  OrbitalDistance out;
  out.theta_star = std::arg(ip);
  const double nu = l2_norm(u), np = l2_norm(phi);
  out.l2_dist = std::sqrt(std::max(0.0, nu * nu + np * np - 2.0 * std::abs(ip)));
  const ComplexField diff =
      lin_comb(Complex(1.0, 0.0), u, -std::polar(1.0, out.theta_star), phi);
  out.dist = weighted_h1_norm(diff);
  return out;
}

inline OrbitalDistance orbital_distance(const ComplexField& u, const RealField& phi) {
  return orbital_distance(u, to_complex(phi));
}

struct EvolveOptions {
  double alpha = 0.0;
  double dt = 1e-3;
  double t_final = 1.0;
  double eps_reg = 1e-12;      // floor inside log(|u|^2 + eps_reg)
  int trace_stride = 10;       // steps between trace samples
  double blowup_threshold = 1e12;
  const ComplexField* reference = nullptr;  // distance target; initial state if null
};

struct EvolutionTrace {
  std::vector<double> times;
  std::vector<double> charge;
  std::vector<double> energy;
  std::vector<double> orbital_dist;
  std::vector<double> sup;
  bool blowup = false;
};

// Strang step: exact phase rotation for the logarithmic part on each half
// step (modulus preserving), Crank-Nicolson for the vertex operator in
// between (norm preserving up to the direct solver's rounding).
inline EvolutionTrace evolve(const ComplexField& u0, const EvolveOptions& opt,
                             ComplexField* final_state = nullptr) {
  require(opt.dt > 0.0 && std::isfinite(opt.dt), Errc::invalid_parameter, "dt must be positive");
  require(opt.t_final >= 0.0, Errc::invalid_parameter, "t_final must be nonnegative");
  require(opt.eps_reg >= 0.0, Errc::invalid_parameter, "eps_reg must be nonnegative");
  require(opt.trace_stride >= 1, Errc::invalid_parameter, "trace_stride must be positive");

  const StarGraph& g = u0.graph;
  const GraphOperator op = assemble_h_delta(g, g.n_edges, opt.alpha);
  const BandedLayout lay = BandedLayout::of(op);
  BandedLU<Complex> lu(op, lay, Complex(0.0, opt.dt / 2.0), Complex(1.0, 0.0));

  const std::vector<double> w = weight_vector(op);
  std::vector<double> inv_w(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) inv_w[i] = 1.0 / w[i];

  std::vector<Complex> state = pack(op, u0);
  for (std::size_t i = 0; i < state.size(); ++i) state[i] *= std::sqrt(w[i]);

  const ComplexField ref = opt.reference ? *opt.reference : u0;

  EvolutionTrace trace;
  const long steps = std::lround(opt.t_final / opt.dt);

  const auto unpack_state = [&]() {
    std::vector<Complex> x = state;
    for (std::size_t i = 0; i < x.size(); ++i) x[i] *= std::sqrt(inv_w[i]);
    return unpack_full(op, x);
  };
  const auto sample = [&](double t) {
    const ComplexField u = unpack_state();
    trace.times.push_back(t);
    trace.charge.push_back(charge(u));
    trace.energy.push_back(energy(u, opt.alpha));
    trace.orbital_dist.push_back(orbital_distance(u, ref).dist);
    trace.sup.push_back(sup_norm(u));
    return trace.sup.back();
  };
  sample(0.0);

  const double half = opt.dt / 2.0;
  const auto phase_half = [&]() {
    for (std::size_t i = 0; i < state.size(); ++i) {
      const double m2 = std::norm(state[i]) * inv_w[i];
      if (m2 == 0.0 && opt.eps_reg == 0.0) continue;
      state[i] *= std::polar(1.0, half * std::log(m2 + opt.eps_reg));
    }
  };

  std::vector<Complex> bw(state.size());
  for (long s = 1; s <= steps; ++s) {
    phase_half();
    apply_sym(op, state.data(), bw.data());
    for (std::size_t i = 0; i < state.size(); ++i)
      state[i] -= Complex(0.0, half) * bw[i];
    lu.solve(state);
    phase_half();
    if (s % opt.trace_stride == 0 || s == steps) {
      const double sup = sample(double(s) * opt.dt);
      if (!(sup < opt.blowup_threshold)) {
        trace.blowup = true;
        break;
      }
    }
  }
  if (final_state) *final_state = unpack_state();
  return trace;
}

// Spectrum of the linearized block system d/dt (V1, V2) = (T2 V2, -T1 V1) on
// the reduced space: lambda^2 runs over the spectrum of -T2 T1, computed by a
// dense nonsymmetric eigensolve of the (sparse-assembled) product.
struct LinearizationSpectrum {
  int n_edges = 0;
  int k = 0;
  double alpha = 0.0;
  int m_points = 0;
  std::vector<Complex> eigenvalues;  // both square roots of every product eigenvalue
  double abscissa = 0.0;             // max real part
  double lambda2_residual = 0.0;     // max dist(lambda^2, sigma(-T2 T1)), scaled by ||-T2 T1||
  double pairing_defect = 0.0;       // worst gap under lambda -> -lambda and conjugation
};

namespace detail {

struct SparseRows {
  int n = 0;
  std::vector<std::vector<std::pair<int, double>>> rows;
};

inline SparseRows sparse_rows(const GraphOperator& op) {
  SparseRows s;
  s.n = op.dim();
  s.rows.resize(s.n);
  for_each_sym_entry(op, [&](int r, int c, double v) {
    s.rows[r].push_back({c, v});
    if (r != c) s.rows[c].push_back({r, v});
  });
  return s;
}

// Dense row-major -B2*B1 built from the sparse rows.
inline std::vector<double> minus_product(const SparseRows& b2, const SparseRows& b1) {
  const int n = b2.n;
  std::vector<double> c(std::size_t(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (const auto& [m, v2] : b2.rows[i])
      for (const auto& [j, v1] : b1.rows[m]) c[std::size_t(i) * n + j] -= v2 * v1;
  return c;
}

inline double inf_norm(const std::vector<double>& a, int n) {
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += std::abs(a[std::size_t(i) * n + j]);
    best = std::max(best, s);
  }
  return best;
}

}  // namespace detail

inline LinearizationSpectrum linearization_spectrum(int n_edges, int k, double alpha,
                                                    const StarGraph& g) {
  require(k >= 1 && k <= max_reduction_k(n_edges), Errc::invalid_parameter,
          "k outside 1..floor((N-1)/2)");
  require(alpha != 0.0, Errc::invalid_parameter, "vertex strength must be nonzero");
  const ProfileParams p = make_profile_params(n_edges, k, alpha, -1.0);
  const GraphOperator t1 = restrict_equivariant(assemble_t1(p, g), k);
  const GraphOperator t2 = restrict_equivariant(assemble_t2(p, g), k);
  const detail::SparseRows r1 = detail::sparse_rows(t1);
  const detail::SparseRows r2 = detail::sparse_rows(t2);
  const int n = r1.n;
  std::vector<double> c = detail::minus_product(r2, r1);
  const double cnorm = detail::inf_norm(c, n);

  std::vector<double> wr(n), wi(n);
  const lapack_int info = LAPACKE_dgeev(LAPACK_ROW_MAJOR, 'N', 'N', n, c.data(), n, wr.data(),
                                        wi.data(), nullptr, n, nullptr, n);
  require(info == 0, Errc::no_convergence, "nonsymmetric eigensolve failed");

  LinearizationSpectrum out;
  out.n_edges = n_edges;
  out.k = k;
  out.alpha = alpha;
  out.m_points = g.m_points;
  out.eigenvalues.reserve(std::size_t(2) * n);
  for (int i = 0; i < n; ++i) {
    const Complex lam = std::sqrt(Complex(wr[i], wi[i]));
    out.eigenvalues.push_back(lam);
    out.eigenvalues.push_back(-lam);
  }
  double absc = 0.0, resid = 0.0;
  for (const Complex& lam : out.eigenvalues) {
    absc = std::max(absc, lam.real());
    const Complex l2 = lam * lam;
    double d = std::abs(l2 - Complex(wr[0], wi[0]));
    for (int i = 1; i < n; ++i) d = std::min(d, std::abs(l2 - Complex(wr[i], wi[i])));
    resid = std::max(resid, d);
  }
  out.abscissa = absc;
  out.lambda2_residual = (cnorm > 0.0) ? resid / cnorm : resid;

  double defect = 0.0;
  for (const Complex& lam : out.eigenvalues) {
    double dneg = std::abs(lam + out.eigenvalues[0]);
    double dconj = std::abs(lam - std::conj(out.eigenvalues[0]));
    for (const Complex& mu : out.eigenvalues) {
      dneg = std::min(dneg, std::abs(lam + mu));
      dconj = std::min(dconj, std::abs(lam - std::conj(mu)));
    }
    defect = std::max(defect, std::max(dneg, dconj));
  }
  out.pairing_defect = defect;
  return out;
}

// Unstable mode of the block system: the product eigenvector V1 for the
// largest real lambda^2, completed by V2 = -T1 V1 / lambda; returned as the
// complex reduced field V1 + i V2 together with lambda.
struct UnstableMode {
  double lambda = 0.0;
  ComplexReducedField field;
};

inline UnstableMode unstable_mode(int n_edges, int k, double alpha, const StarGraph& g) {
  require(alpha < 0.0, Errc::invalid_parameter, "growth requires a negative vertex strength");
  const ProfileParams p = make_profile_params(n_edges, k, alpha, -1.0);
  const GraphOperator t1 = restrict_equivariant(assemble_t1(p, g), k);
  const GraphOperator t2 = restrict_equivariant(assemble_t2(p, g), k);
  const detail::SparseRows r1 = detail::sparse_rows(t1);
  const detail::SparseRows r2 = detail::sparse_rows(t2);
  const int n = r1.n;
  std::vector<double> c = detail::minus_product(r2, r1);
  const double cnorm = detail::inf_norm(c, n);

  std::vector<double> cw = c;
  std::vector<double> wr(n), wi(n);
  lapack_int info = LAPACKE_dgeev(LAPACK_ROW_MAJOR, 'N', 'N', n, cw.data(), n, wr.data(),
                                  wi.data(), nullptr, n, nullptr, n);
  require(info == 0, Errc::no_convergence, "nonsymmetric eigensolve failed");
  int best = 0;
  for (int i = 1; i < n; ++i)
    if (wr[i] > wr[best]) best = i;
  require(wr[best] > 0.0 && std::abs(wi[best]) < 1e-8 * std::max(1.0, std::abs(wr[best])),
          Errc::no_growth_window, "no real positive squared rate in the linearization");
  const double s = wr[best];

  // inverse iteration on the shifted dense product for the V1 component
  std::vector<double> shifted = c;
  const double shift = s + 1e-8 * std::max(1.0, std::abs(s));
  for (int i = 0; i < n; ++i) shifted[std::size_t(i) * n + i] -= shift;
  std::vector<lapack_int> ipiv(n);
  info = LAPACKE_dgetrf(LAPACK_ROW_MAJOR, n, n, shifted.data(), n, ipiv.data());
  require(info == 0, Errc::no_convergence, "dense factorization failed");

  std::mt19937_64 rng(0x756d6f6465ull ^ (std::uint64_t(n) << 16));
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  double resid = 0.0;
  for (int it = 0; it < 8; ++it) {
    info = LAPACKE_dgetrs(LAPACK_ROW_MAJOR, 'N', n, 1, shifted.data(), n, ipiv.data(), v.data(), 1);
    require(info == 0, Errc::no_convergence, "dense solve failed");
    double nv = 0.0;
    for (double x : v) nv += x * x;
    nv = std::sqrt(nv);
    for (double& x : v) x /= nv;
    // residual of the product eigenpair
    resid = 0.0;
    std::vector<double> cv(n, 0.0);
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      for (int j = 0; j < n; ++j) acc += c[std::size_t(i) * n + j] * v[j];
      cv[i] = acc;
    }
    double num = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = cv[i] - s * v[i];
      num += r * r;
    }
    resid = std::sqrt(num);
    if (resid <= 1e-8 * std::max(1.0, cnorm)) break;
  }
  require(resid <= 1e-6 * std::max(1.0, cnorm), Errc::no_convergence,
          "inverse iteration did not converge on the unstable mode");

  const double lambda = std::sqrt(s);
  // V2 = -T1 V1 / lambda, all in symmetrized coordinates, then back to
  // physical values
  std::vector<double> t1v(n, 0.0);
  apply_sym(t1, v.data(), t1v.data());
  const std::vector<double> w = weight_vector(t1);
  std::vector<Complex> phys(n);
  for (int i = 0; i < n; ++i) {
    const double sw = std::sqrt(w[i]);
    phys[i] = Complex(v[i] / sw, -t1v[i] / (lambda * sw));
  }
  UnstableMode out;
  out.lambda = lambda;
  out.field = unpack_reduced(t1, phys);
  return out;
}

// Interpolate a reduced complex field onto another grid with the same edge
// count and length (linear between neighbouring samples).
inline ComplexReducedField interpolate_reduced(const ComplexReducedField& src,
                                               const StarGraph& dst) {
  require(dst.n_edges == src.graph.n_edges && dst.length == src.graph.length,
          Errc::graph_mismatch, "interpolation requires matching edge count and length");
  ComplexReducedField out = make_reduced_field<Complex>(dst, src.k);
  out.vertex_value = src.vertex_value;
  const auto at = [&](const std::vector<Complex>& e, double x) -> Complex {
    const double hs = src.graph.h();
    const double pos = x / hs;
    const int i0 = int(pos);
    const double t = pos - i0;
    const auto val = [&](int i) -> Complex {
      if (i <= 0) return src.vertex_value;
      if (i > src.graph.m_points) return Complex(0.0, 0.0);
      return e[i - 1];
    };
    return (1.0 - t) * val(i0) + t * val(i0 + 1);
  };
  for (int i = 1; i <= dst.m_points; ++i) {
    const double x = dst.x(i);
    out.f[i - 1] = at(src.f, x);
    out.g[i - 1] = at(src.g, x);
  }
  return out;
}

// Deterministic perturbation inside the equivariant class (equal values on
// the first k edges and on the rest), scaled so its weighted-H1 norm is
// rel_amplitude times the profile's.  Mixes real and imaginary parts and has
// no symmetry with the profile, so it excites generic equivariant directions.
inline ComplexField equivariant_perturbation(const ProfileParams& p, const StarGraph& g,
                                             double rel_amplitude) {
  const RealField phi = profile(p, g);
  ComplexReducedField r = make_reduced_field<Complex>(g, p.k);
  r.vertex_value = Complex(0.3, 0.2);
  for (int i = 1; i <= g.m_points; ++i) {
    const double x = g.x(i);
    const double e1 = std::exp(-(x - 1.0) * (x - 1.0));
    const double e2 = std::exp(-x * x / 2.0);
    r.f[i - 1] = Complex(0.3 * e2 + 0.5 * x * e1, 0.2 * e2 - 0.1 * e1);
    r.g[i - 1] = Complex(0.3 * e2 - 0.2 * e1, 0.2 * e2 + 0.4 * x * e1);
  }
  ComplexField pert = lift(r);
  const double scale = rel_amplitude * weighted_h1_norm(phi) / weighted_h1_norm(pert);
  pert.vertex_value *= scale;
  for (auto& e : pert.edges)
    for (auto& v : e) v *= scale;
  return pert;
}

struct GrowthReport {
  double rate_fit = 0.0;
  double abscissa = 0.0;
  double window_from = 0.0;  // fitted time window
  double window_to = 0.0;
  int n_points = 0;
  EvolutionTrace trace;
};

struct GrowthOptions {
  double dt = 1e-3;
  double t_final = 25.0;
  int m_linearization = 800;  // grid for the dense linearization solve
};

// Seeds the profile with the normalized unstable mode and fits the measured
// orbital distance against an exponential over the window where the distance
// lies in [3 seed, 100 seed] (past transients, before the nonlinear regime).
inline GrowthReport instability_growth_rate(int n_edges, int k, double alpha,
                                            double seed_amplitude, const StarGraph& g,
                                            const GrowthOptions& gopt = {}) {
  require(alpha < 0.0, Errc::invalid_parameter, "growth requires a negative vertex strength");
  require(seed_amplitude >= 1e-5 && seed_amplitude <= 1e-3, Errc::invalid_parameter,
          "seed amplitude outside [1e-5, 1e-3]");
  const ProfileParams p = make_profile_params(n_edges, k, alpha, -1.0);
  const StarGraph g_lin = make_graph(n_edges, g.length, gopt.m_linearization);
  const UnstableMode mode = unstable_mode(n_edges, k, alpha, g_lin);

  const ComplexField lifted = lift(interpolate_reduced(mode.field, g));
  const double nh1 = weighted_h1_norm(lifted);
  const ComplexField phi = to_complex(profile(p, g));
  const ComplexField u0 =
      lin_comb(Complex(1.0, 0.0), phi, Complex(seed_amplitude / nh1, 0.0), lifted);

  EvolveOptions opt;
  opt.alpha = alpha;
  opt.dt = gopt.dt;
  opt.t_final = gopt.t_final;
  opt.reference = &phi;
  GrowthReport rep;
  rep.abscissa = mode.lambda;
  rep.trace = evolve(u0, opt);

  // least-squares line through (t, log dist) inside the window
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int m = 0;
  double tfrom = 0.0, tto = 0.0;
  for (std::size_t i = 0; i < rep.trace.times.size(); ++i) {
    const double d = rep.trace.orbital_dist[i];
    if (d < 3.0 * seed_amplitude || d > 100.0 * seed_amplitude) continue;
    const double t = rep.trace.times[i];
    const double y = std::log(d);
    if (m == 0) tfrom = t;
    tto = t;
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    ++m;
  }
  require(m >= 2, Errc::no_growth_window,
          "orbital distance never tripled inside the fitting window");
  rep.rate_fit = (sxy - sx * sy / m) / (sxx - sx * sx / m);
  rep.window_from = tfrom;
  rep.window_to = tto;
  rep.n_points = m;
  return rep;
}

}  // namespace lognls
