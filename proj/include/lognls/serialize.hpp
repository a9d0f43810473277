#pragma once
// File formats: JSON documents for reports and checkpoints, CSV tables for
// plot-ready series, and MatrixMarket dumps of assembled operators.  All
// output is UTF-8 with LF line endings; every CSV starts with a '#'-prefixed
// JSON line echoing the run configuration when one is supplied, followed by
// a header row.

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "lognls/dynamics.hpp"
#include "lognls/errors.hpp"
#include "lognls/graph.hpp"
#include "lognls/operators.hpp"
#include "lognls/perturbation.hpp"
#include "lognls/spectral.hpp"
#include "lognls/version.hpp"

namespace lognls {

using Json = nlohmann::json;

// Everything a command needs to rerun bit-for-bit.
struct RunConfig {
  std::string command;
  int n_edges = 3;
  int k = 1;
  double alpha = -1.0;
  double alpha_from = 0.0;  // sweep ray
  double alpha_to = 0.0;
  int steps = 25;
  double omega = -1.0;
  int m_points = 4000;
  double length = 0.0;  // 0 = derive from the profile location
  double dt = 1e-3;
  double t_final = 10.0;
  double eps_reg = 1e-12;
  double tol_zero = -1.0;  // negative = grid-derived default
  double seed_amplitude = 0.0;
  std::string op = "t1";
  bool reduced = false;
  std::string output;  // empty = stdout
  std::string format = "json";
};

inline Json to_json(const RunConfig& c) {
  Json j;
  j["command"] = c.command;
  j["n_edges"] = c.n_edges;
  j["k"] = c.k;
  j["alpha"] = c.alpha;
  if (c.alpha_from != 0.0 || c.alpha_to != 0.0) {
    j["alpha_from"] = c.alpha_from;
    j["alpha_to"] = c.alpha_to;
    j["steps"] = c.steps;
  }
  j["omega"] = c.omega;
  j["m_points"] = c.m_points;
  j["length"] = c.length;
  j["dt"] = c.dt;
  j["t_final"] = c.t_final;
  j["eps_reg"] = c.eps_reg;
  j["tol_zero"] = c.tol_zero;
  if (c.seed_amplitude != 0.0) j["seed_amplitude"] = c.seed_amplitude;
  j["op"] = c.op;
  j["reduced"] = c.reduced;
  j["format"] = c.format;
  j["version"] = kVersion;
  return j;
}

// Checkpoint schema: {n_edges, length, m_points, vertex_value, edges},
// complex values as [re, im] pairs.
inline Json to_json(const ComplexField& v) {
  Json j;
  j["n_edges"] = v.graph.n_edges;
  j["length"] = v.graph.length;
  j["m_points"] = v.graph.m_points;
  j["vertex_value"] = {v.vertex_value.real(), v.vertex_value.imag()};
  Json edges = Json::array();
  for (const auto& e : v.edges) {
    Json row = Json::array();
    for (const Complex& x : e) row.push_back({x.real(), x.imag()});
    edges.push_back(std::move(row));
  }
  j["edges"] = std::move(edges);
  return j;
}

inline ComplexField field_from_json(const Json& j) {
  const StarGraph g = make_graph(j.at("n_edges").get<int>(), j.at("length").get<double>(),
                                 j.at("m_points").get<int>());
  ComplexField v = make_field<Complex>(g);
  const auto& vv = j.at("vertex_value");
  v.vertex_value = Complex(vv.at(0).get<double>(), vv.at(1).get<double>());
  const auto& edges = j.at("edges");
  require(int(edges.size()) == g.n_edges, Errc::graph_mismatch, "edge count mismatch in checkpoint");
  for (int e = 0; e < g.n_edges; ++e) {
    const auto& row = edges.at(e);
    require(int(row.size()) == g.m_points, Errc::graph_mismatch, "edge length mismatch in checkpoint");
    for (int i = 0; i < g.m_points; ++i)
      v.edges[e][i] = Complex(row.at(i).at(0).get<double>(), row.at(i).at(1).get<double>());
  }
  return v;
}

inline Json to_json(const SpectralReport& r) {
  Json j;
  j["kind"] = kind_name(r.kind);
  j["n_edges"] = r.n_edges;
  j["k"] = r.k;
  j["alpha"] = r.alpha;
  j["reduced"] = r.reduced;
  j["m_points"] = r.m_points;
  j["length"] = r.length;
  j["eigenvalues"] = r.eigenvalues;
  j["residuals"] = r.residuals;
  j["tol_zero"] = r.tol_zero;
  j["norm_bound"] = r.norm_bound;
  j["gap"] = r.gap;
  j["morse_index"] = r.morse_index;
  j["kernel_dim"] = r.kernel_dim;
  j["morse_inconclusive"] = r.morse_inconclusive;
  return j;
}

inline Json to_json(const HypothesisChecks& c) {
  Json j;
  j["t2_kernel_dim_one"] = c.t2_kernel_dim_one;
  j["t2_kernel_matches_profile"] = c.t2_kernel_matches_profile;
  j["t2_kernel_similarity"] = c.t2_kernel_similarity;
  j["t1_kernel_trivial"] = c.t1_kernel_trivial;
  j["negative_count_finite"] = c.negative_count_finite;
  j["gap_positive"] = c.gap_positive;
  j["refinement_stable"] = c.refinement_stable;
  return j;
}

inline Json to_json(const StabilityReport& r) {
  Json j;
  j["n_edges"] = r.params.n_edges;
  j["k"] = r.params.k;
  j["alpha"] = r.params.alpha;
  j["omega"] = r.params.omega;
  j["m_points"] = r.m_points;
  j["length"] = r.length;
  j["n_t1"] = r.n_t1;
  j["n_t2"] = r.n_t2;
  j["n_total"] = r.n_total;
  j["n_total_refined"] = r.n_total_refined;
  j["checks"] = to_json(r.checks);
  j["t1"] = to_json(r.t1);
  j["t2"] = to_json(r.t2);
  j["verdict"] = verdict_name(r.verdict);
  return j;
}

inline Json to_json(const MorseBoundReport& r) {
  Json j;
  j["n_t1_full"] = r.n_t1_full;
  j["bound"] = r.bound;
  j["satisfied"] = r.satisfied;
  j["refined"] = r.refined;
  j["tol_zero"] = r.tol_zero;
  return j;
}

inline Json to_json(const LinearizationSpectrum& s) {
  Json j;
  j["n_edges"] = s.n_edges;
  j["k"] = s.k;
  j["alpha"] = s.alpha;
  j["m_points"] = s.m_points;
  j["abscissa"] = s.abscissa;
  j["lambda2_residual"] = s.lambda2_residual;
  j["pairing_defect"] = s.pairing_defect;
  Json ev = Json::array();
  for (const Complex& lam : s.eigenvalues) ev.push_back({lam.real(), lam.imag()});
  j["eigenvalues"] = std::move(ev);
  return j;
}

inline Json to_json(const GrowthReport& r) {
  Json j;
  j["rate_fit"] = r.rate_fit;
  j["abscissa"] = r.abscissa;
  j["ratio"] = r.rate_fit / r.abscissa;
  j["window_from"] = r.window_from;
  j["window_to"] = r.window_to;
  j["n_points"] = r.n_points;
  return j;
}

// Slope document for the eigenvalue curve at alpha = 0.
inline Json slope_json(const EigenCurve& c) {
  Json j;
  j["n_edges"] = c.n_edges;
  j["k"] = c.k;
  j["slope_fd"] = c.slope_fd;
  j["slope_analytic"] = c.slope_analytic;
  j["relative_gap"] = std::abs(c.slope_fd - c.slope_analytic) / std::abs(c.slope_analytic);
  j["sign_pattern"] = c.sign_pattern;
  j["alphas"] = c.alphas;
  j["mu2"] = c.mu2;
  return j;
}

inline Json to_json(const ContinuationReport& r) {
  Json j;
  j["n_edges"] = r.n_edges;
  j["k"] = r.k;
  j["alphas"] = r.alphas;
  j["counts"] = r.counts;
  j["refinements"] = r.refinements;
  j["count"] = r.count;
  j["constant"] = r.constant;
  return j;
}

namespace detail {

inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void csv_preamble(std::ostream& os, const RunConfig* cfg, const char* header) {
  if (cfg) os << "# " << to_json(*cfg).dump() << "\n";
  os << header << "\n";
}

}  // namespace detail

inline void write_eigenvalue_csv(std::ostream& os, const SpectralReport& r,
                                 const RunConfig* cfg = nullptr) {
  detail::csv_preamble(os, cfg, "index,lambda,residual");
  for (std::size_t i = 0; i < r.eigenvalues.size(); ++i)
    os << i << ',' << detail::fmt_double(r.eigenvalues[i]) << ','
       << detail::fmt_double(i < r.residuals.size() ? r.residuals[i] : 0.0) << "\n";
}

inline void write_curve_csv(std::ostream& os, const EigenCurve& c,
                            const RunConfig* cfg = nullptr) {
  detail::csv_preamble(os, cfg, "alpha,mu2,residual");
  for (std::size_t i = 0; i < c.alphas.size(); ++i)
    os << detail::fmt_double(c.alphas[i]) << ',' << detail::fmt_double(c.mu2[i]) << ','
       << detail::fmt_double(c.residuals[i]) << "\n";
}

inline void write_trace_csv(std::ostream& os, const EvolutionTrace& t,
                            const RunConfig* cfg = nullptr) {
  detail::csv_preamble(os, cfg, "t,Q,E,dist,sup");
  for (std::size_t i = 0; i < t.times.size(); ++i)
    os << detail::fmt_double(t.times[i]) << ',' << detail::fmt_double(t.charge[i]) << ','
       << detail::fmt_double(t.energy[i]) << ',' << detail::fmt_double(t.orbital_dist[i]) << ','
       << detail::fmt_double(t.sup[i]) << "\n";
}

// MatrixMarket coordinate dump of the symmetrized operator (lower triangle,
// 1-based indices).
inline void write_matrix_market(std::ostream& os, const GraphOperator& op) {
  std::vector<std::pair<std::pair<int, int>, double>> entries;
  for_each_sym_entry(op, [&](int r, int c, double v) {
    if (r < c) std::swap(r, c);
    entries.push_back({{r, c}, v});
  });
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  os << "%%MatrixMarket matrix coordinate real symmetric\n";
  os << op.dim() << ' ' << op.dim() << ' ' << entries.size() << "\n";
  for (const auto& [rc, v] : entries)
    os << rc.first + 1 << ' ' << rc.second + 1 << ' ' << detail::fmt_double(v) << "\n";
}

// Writes text to a file, or to the given fallback stream when path is empty.
inline void write_text(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
  require(bool(out), Errc::invalid_parameter, "cannot open output file: " + path);
  out << text;
  require(bool(out), Errc::invalid_parameter, "short write to output file: " + path);
}

}  // namespace lognls
