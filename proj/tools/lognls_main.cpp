// Command-line front end: spectral reports, stability verdicts, strength
// sweeps, slope measurements, and time evolution, with JSON/CSV output.
//
// Exit codes: 0 success, 2 usage or parameter-domain error, 3 inconclusive
// result (including a growth window that never opened), 4 numerical failure.

#include <functional>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "lognls/serialize.hpp"

namespace {

using namespace lognls;

double resolved_length(const RunConfig& cfg) {
  if (cfg.length > 0.0) return cfg.length;
  const int kk = std::max(cfg.k, 0);
  if (kk >= 1 && kk <= max_reduction_k(cfg.n_edges))
    return default_length(make_profile_params(cfg.n_edges, kk, cfg.alpha, cfg.omega));
  return 10.0;  // Kirchhoff-type runs have the profile centered at the vertex
}

void warn_omega(const RunConfig& cfg) {
  if (cfg.omega != -1.0)
    std::cerr << "note: omega only rescales the profile amplitude; assembled operators and "
                 "spectra do not depend on it\n";
}

void emit(const RunConfig& cfg, const std::string& text) {
  write_text(cfg.output, text, std::cout);
}

int cmd_spectrum(const RunConfig& cfg, int pairs, const std::string& dump_matrix) {
  warn_omega(cfg);
  const StarGraph g = make_graph(cfg.n_edges, resolved_length(cfg), cfg.m_points);
  GraphOperator op = [&] {
    if (cfg.op == "t1")
      return assemble_t1(make_profile_params(cfg.n_edges, cfg.k, cfg.alpha, cfg.omega), g);
    if (cfg.op == "t2")
      return assemble_t2(make_profile_params(cfg.n_edges, cfg.k, cfg.alpha, cfg.omega), g);
    if (cfg.op == "t1-kirchhoff") return assemble_t1_kirchhoff(cfg.n_edges, g);
    if (cfg.op == "h-delta") return assemble_h_delta(g, cfg.n_edges, cfg.alpha);
    fail(Errc::invalid_parameter, "unknown operator: " + cfg.op);
  }();
  if (cfg.reduced) op = restrict_equivariant(op, cfg.k);

  const SpectralReport rep = eigen_lowest(op, pairs, true, cfg.tol_zero);
  if (!dump_matrix.empty()) {
    std::ostringstream ms;
    write_matrix_market(ms, op);
    write_text(dump_matrix, ms.str(), std::cout);
  }
  if (cfg.format == "csv") {
    std::ostringstream os;
    write_eigenvalue_csv(os, rep, &cfg);
    emit(cfg, os.str());
  } else {
    Json doc;
    doc["config"] = to_json(cfg);
    doc["report"] = to_json(rep);
    emit(cfg, doc.dump(2) + "\n");
  }
  return 0;
}

int cmd_report(const RunConfig& cfg, int m_linearization, bool with_growth) {
  warn_omega(cfg);
  const ProfileParams p = make_profile_params(cfg.n_edges, cfg.k, cfg.alpha, cfg.omega);
  const StarGraph g = make_graph(cfg.n_edges, resolved_length(cfg), cfg.m_points);

  const StabilityReport verdict = stability_verdict(p, g);
  const MorseBoundReport bound = verify_morse_bounds(p, g);
  const StarGraph g_lin = make_graph(cfg.n_edges, g.length, m_linearization);
  const LinearizationSpectrum lin = linearization_spectrum(cfg.n_edges, cfg.k, cfg.alpha, g_lin);

  Json doc;
  doc["config"] = to_json(cfg);
  doc["stability"] = to_json(verdict);
  doc["appendix_bound"] = to_json(bound);
  Json linj = to_json(lin);
  linj.erase("eigenvalues");  // keep the verdict document small
  linj["n_eigenvalues"] = lin.eigenvalues.size();
  doc["linearization"] = linj;
  if (with_growth && cfg.alpha < 0.0) {
    GrowthOptions go;
    go.dt = cfg.dt;
    go.t_final = cfg.t_final;
    go.m_linearization = m_linearization;
    const double amp = cfg.seed_amplitude > 0.0 ? cfg.seed_amplitude : 1e-4;
    doc["growth"] = to_json(instability_growth_rate(cfg.n_edges, cfg.k, cfg.alpha, amp, g, go));
  }
  emit(cfg, doc.dump(2) + "\n");
  return verdict.verdict == Verdict::inconclusive ? 3 : 0;
}

int cmd_sweep(const RunConfig& cfg) {
  warn_omega(cfg);
  const StarGraph g = make_graph(cfg.n_edges, resolved_length(cfg), cfg.m_points);
  const ContinuationReport rep =
      continuation_count(cfg.n_edges, cfg.k, cfg.alpha_from, cfg.alpha_to, cfg.steps, g);
  Json doc;
  doc["config"] = to_json(cfg);
  doc["continuation"] = to_json(rep);
  emit(cfg, doc.dump(2) + "\n");
  return 0;
}

int cmd_slope(const RunConfig& cfg) {
  warn_omega(cfg);
  const double lmax =
      cfg.length > 0.0
          ? cfg.length
          : default_length(make_profile_params(cfg.n_edges, cfg.k, 0.1, cfg.omega));
  const StarGraph g = make_graph(cfg.n_edges, lmax, cfg.m_points);
  const EigenCurve curve = eigencurve(cfg.n_edges, cfg.k, default_curve_samples(), g);
  if (cfg.format == "csv") {
    std::ostringstream os;
    write_curve_csv(os, curve, &cfg);
    emit(cfg, os.str());
  } else {
    Json doc;
    doc["config"] = to_json(cfg);
    doc["slope"] = slope_json(curve);
    emit(cfg, doc.dump(2) + "\n");
  }
  return 0;
}

int cmd_evolve(const RunConfig& cfg, const std::string& load_state,
               const std::string& save_state, int m_linearization) {
  warn_omega(cfg);
  ComplexField u0 = [&] {
    if (!load_state.empty()) {
      std::ifstream in(load_state);
      require(bool(in), Errc::invalid_parameter, "cannot open state file: " + load_state);
      Json j;
      in >> j;
      return field_from_json(j);
    }
    const ProfileParams p = make_profile_params(cfg.n_edges, cfg.k, cfg.alpha, cfg.omega);
    const StarGraph g = make_graph(cfg.n_edges, resolved_length(cfg), cfg.m_points);
    ComplexField base = to_complex(profile(p, g));
    if (cfg.seed_amplitude > 0.0) {
      if (cfg.alpha < 0.0) {
        const StarGraph g_lin = make_graph(cfg.n_edges, g.length, m_linearization);
        const UnstableMode mode = unstable_mode(cfg.n_edges, cfg.k, cfg.alpha, g_lin);
        const ComplexField lifted = lift(interpolate_reduced(mode.field, g));
        const double nh1 = weighted_h1_norm(lifted);
        base = lin_comb(Complex(1.0, 0.0), base,
                        Complex(cfg.seed_amplitude / nh1, 0.0), lifted);
      } else {
        base = lin_comb(Complex(1.0, 0.0), base, Complex(1.0, 0.0),
                        equivariant_perturbation(p, g, cfg.seed_amplitude));
      }
    }
    return base;
  }();

  const ProfileParams p = make_profile_params(cfg.n_edges, cfg.k, cfg.alpha, cfg.omega);
  const ComplexField ref = to_complex(profile(p, u0.graph));
  EvolveOptions opt;
  opt.alpha = cfg.alpha;
  opt.dt = cfg.dt;
  opt.t_final = cfg.t_final;
  opt.eps_reg = cfg.eps_reg;
  opt.reference = &ref;
  ComplexField final_state;
  const EvolutionTrace trace = evolve(u0, opt, &final_state);

  if (!save_state.empty()) write_text(save_state, to_json(final_state).dump() + "\n", std::cout);
  if (cfg.format == "json") {
    Json doc;
    doc["config"] = to_json(cfg);
    doc["trace"] = {{"t", trace.times},           {"Q", trace.charge}, {"E", trace.energy},
                    {"dist", trace.orbital_dist}, {"sup", trace.sup}};
    doc["blowup"] = trace.blowup;
    emit(cfg, doc.dump(2) + "\n");
  } else {
    std::ostringstream os;
    write_trace_csv(os, trace, &cfg);
    emit(cfg, os.str());
  }
  if (trace.blowup) {
    std::cerr << "error: amplitude guard exceeded; trace is partial\n";
    return 4;
  }
  return 0;
}

int guarded(const std::function<int()>& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case Errc::invalid_parameter:
      case Errc::graph_mismatch:
        return 2;
      case Errc::no_growth_window:
        return 3;
      default:
        return 4;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral stability laboratory for logarithmic waves on star graphs"};
  app.require_subcommand(1);

  RunConfig cfg;
  int pairs = 6;
  int m_linearization = 800;
  bool with_growth = false;
  std::string dump_matrix, load_state, save_state;

  const auto add_common = [&](CLI::App* c, bool dynamics) {
    c->add_option("--n-edges", cfg.n_edges, "number of half-lines at the vertex");
    c->add_option("--k", cfg.k, "edges carrying the shifted bump (1..floor((N-1)/2))");
    c->add_option("--alpha", cfg.alpha, "vertex strength");
    c->add_option("--omega", cfg.omega, "frequency (amplitude scale only)");
    c->add_option("--m-points", cfg.m_points, "grid points per edge");
    c->add_option("--length", cfg.length, "edge truncation length (0 = auto)");
    c->add_option("--tol-zero", cfg.tol_zero, "zero-classification threshold (<0 = default)");
    c->add_option("--output,-o", cfg.output, "output file (default stdout)");
    c->add_option("--format", cfg.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    if (dynamics) {
      c->add_option("--dt", cfg.dt, "time step");
      c->add_option("--t-final", cfg.t_final, "integration horizon");
      c->add_option("--eps-reg", cfg.eps_reg, "floor inside the logarithm");
    }
  };

  CLI::App* spectrum = app.add_subcommand("spectrum", "lowest eigenpairs of one operator");
  add_common(spectrum, false);
  spectrum->add_option("--op", cfg.op, "t1 | t2 | t1-kirchhoff | h-delta")
      ->check(CLI::IsMember({"t1", "t2", "t1-kirchhoff", "h-delta"}));
  spectrum->add_flag("--reduced", cfg.reduced, "restrict to the equivariant subspace");
  spectrum->add_option("--pairs", pairs, "how many eigenpairs");
  spectrum->add_option("--dump-matrix", dump_matrix, "MatrixMarket dump path");

  CLI::App* report = app.add_subcommand("report", "stability verdict with hypothesis checks");
  add_common(report, true);
  report->add_option("--m-linearization", m_linearization, "grid for the dense block solve");
  report->add_flag("--growth", with_growth, "also measure the instability growth rate");
  report->add_option("--seed", cfg.seed_amplitude, "growth seed amplitude");

  CLI::App* sweep = app.add_subcommand("sweep", "negative-count constancy along a strength ray");
  add_common(sweep, false);
  sweep->add_option("--alpha-from", cfg.alpha_from, "ray start")->required();
  sweep->add_option("--alpha-to", cfg.alpha_to, "ray end")->required();
  sweep->add_option("--steps", cfg.steps, "number of log-spaced samples");

  CLI::App* slope = app.add_subcommand("slope", "slope of the split eigenvalue at alpha = 0");
  add_common(slope, false);

  CLI::App* evolve_cmd = app.add_subcommand("evolve", "integrate the flow and trace the orbit");
  add_common(evolve_cmd, true);
  evolve_cmd->add_option("--seed", cfg.seed_amplitude,
                         "perturbation amplitude (unstable mode for alpha<0, equivariant "
                         "bump for alpha>0)");
  evolve_cmd->add_option("--m-linearization", m_linearization, "grid for the mode solve");
  evolve_cmd->add_option("--load-state", load_state, "resume from a checkpoint file");
  evolve_cmd->add_option("--save-state", save_state, "write the final state as a checkpoint");

  // module-appropriate grid defaults: fine for pure spectra, coarser for flows
  cfg.m_points = 0;

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  const bool dynamics_cmd = evolve_cmd->parsed() || report->parsed();
  if (cfg.m_points <= 0) cfg.m_points = evolve_cmd->parsed() ? 2000 : 4000;
  (void)dynamics_cmd;

  return guarded([&]() -> int {
    if (spectrum->parsed()) {
      cfg.command = "spectrum";
      const bool have_k = spectrum->count("--k") > 0;
      if ((cfg.op == "t1" || cfg.op == "t2") && !have_k)
        fail(Errc::invalid_parameter, "--k is required for t1/t2");
      if (cfg.reduced && !have_k)
        fail(Errc::invalid_parameter, "--k is required with --reduced");
      return cmd_spectrum(cfg, pairs, dump_matrix);
    }
    if (report->parsed()) {
      cfg.command = "report";
      return cmd_report(cfg, m_linearization, with_growth);
    }
    if (sweep->parsed()) {
      cfg.command = "sweep";
      return cmd_sweep(cfg);
    }
    if (slope->parsed()) {
      cfg.command = "slope";
      return cmd_slope(cfg);
    }
    cfg.command = "evolve";
    if (evolve_cmd->count("--format") == 0) cfg.format = "csv";
    return cmd_evolve(cfg, load_state, save_state, m_linearization);
  });
}
