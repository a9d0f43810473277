#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>

#include "helpers.hpp"
#include "lognls/serialize.hpp"

using namespace lognls;
using Catch::Approx;

TEST_CASE("checkpoint JSON round-trips a complex field exactly") {
  const StarGraph g = make_graph(3, 7.5, 40);
  ComplexField v = make_field<Complex>(g);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  v.vertex_value = Complex(d(rng), d(rng));
  for (auto& e : v.edges)
    for (auto& x : e) x = Complex(d(rng), d(rng));

  const std::string text = to_json(v).dump();
  const ComplexField back = field_from_json(Json::parse(text));
  CHECK(back.graph == g);
  CHECK(back.vertex_value == v.vertex_value);
  for (int j = 0; j < g.n_edges; ++j)
    for (int i = 0; i < g.m_points; ++i) CHECK(back.edges[j][i] == v.edges[j][i]);

  Json bad = to_json(v);
  bad["edges"].erase(0);
  CHECK(oracle::thrown_code([&] { field_from_json(bad); }) == Errc::graph_mismatch);
}

TEST_CASE("eigenvalue tables carry the config echo and one row per pair") {
  const ProfileParams p = make_profile_params(3, 1, -1.0, -1.0);
  const StarGraph g = make_graph(3, default_length(p), 120);
  const GraphOperator op = restrict_equivariant(assemble_t1(p, g), 1);
  const SpectralReport rep = eigen_lowest(op, 3);

  RunConfig cfg;
  cfg.command = "spectrum";
  cfg.m_points = 120;
  std::ostringstream os;
  write_eigenvalue_csv(os, rep, &cfg);
  std::istringstream is(os.str());
  std::string line;
  REQUIRE(std::getline(is, line));
  REQUIRE(line.rfind("# ", 0) == 0);
  const Json echo = Json::parse(line.substr(2));
  CHECK(echo.at("command") == "spectrum");
  CHECK(echo.at("version") == std::string(kVersion));
  REQUIRE(std::getline(is, line));
  CHECK(line == "index,lambda,residual");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == int(rep.eigenvalues.size()));
  CHECK(os.str().find('\r') == std::string::npos);

  // values survive the round trip at full precision
  std::istringstream again(os.str());
  std::getline(again, line);
  std::getline(again, line);
  std::getline(again, line);
  const auto c1 = line.find(','), c2 = line.rfind(',');
  CHECK(std::stod(line.substr(c1 + 1, c2 - c1 - 1)) == rep.eigenvalues[0]);
}

TEST_CASE("trace and curve tables expose the documented columns") {
  EvolutionTrace tr;
  tr.times = {0.0, 0.5};
  tr.charge = {1.0, 1.0};
  tr.energy = {-0.25, -0.25};
  tr.orbital_dist = {0.0, 1e-6};
  tr.sup = {1.0, 1.0};
  std::ostringstream os;
  write_trace_csv(os, tr);
  std::istringstream is(os.str());
  std::string line;
  REQUIRE(std::getline(is, line));
  CHECK(line == "t,Q,E,dist,sup");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 2);

  EigenCurve c;
  c.n_edges = 3;
  c.k = 1;
  c.alphas = {-0.02, 0.02};
  c.mu2 = {-0.015, 0.015};
  c.residuals = {1e-10, 1e-10};
  c.slope_fd = 0.752;
  c.slope_analytic = 0.7522;
  std::ostringstream cs;
  write_curve_csv(cs, c);
  CHECK(cs.str().rfind("alpha,mu2,residual\n", 0) == 0);

  const Json sj = slope_json(c);
  CHECK(sj.at("slope_fd").get<double>() == 0.752);
  CHECK(std::isfinite(sj.at("relative_gap").get<double>()));
}

TEST_CASE("matrix dumps reproduce the assembled operator") {
  const ProfileParams p = make_profile_params(3, 1, 1.0, -1.0);
  const StarGraph g = make_graph(3, default_length(p), 8);
  const GraphOperator op = assemble_t2(p, g);
  std::ostringstream os;
  write_matrix_market(os, op);
  std::istringstream is(os.str());
  std::string banner;
  REQUIRE(std::getline(is, banner));
  CHECK(banner == "%%MatrixMarket matrix coordinate real symmetric");
  int n, m, nnz;
  REQUIRE(is >> n >> m >> nnz);
  CHECK(n == op.dim());
  CHECK(m == op.dim());

  const auto dense = oracle::dense_sym(op);
  std::vector<std::vector<double>> got(n, std::vector<double>(n, 0.0));
  for (int e = 0; e < nnz; ++e) {
    int r, c;
    double v;
    REQUIRE(is >> r >> c >> v);
    CHECK(r >= c);
    got[r - 1][c - 1] = v;
    got[c - 1][r - 1] = v;
  }
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) CHECK(got[r][c] == Approx(dense(r, c)).margin(1e-14));
}

TEST_CASE("reports serialize with their verdict names and counters") {
  const ProfileParams p = make_profile_params(3, 1, 1.0, -1.0);
  const StarGraph g = make_graph(3, default_length(p), 800);
  const StabilityReport rep = stability_verdict(p, g);
  const Json j = to_json(rep);
  CHECK(j.at("verdict") == "STABLE");
  CHECK(j.at("n_total").get<int>() == 1);
  CHECK(j.at("checks").at("t2_kernel_dim_one").get<bool>());
  CHECK(j.at("t1").at("kind") == std::string("t1"));

  const std::string path = "/tmp/lognls_test_report.json";
  std::ostringstream unused;
  write_text(path, j.dump(2), unused);
  std::ifstream in(path);
  REQUIRE(bool(in));
  Json round;
  in >> round;
  CHECK(round.at("verdict") == "STABLE");
  std::remove(path.c_str());

  std::ostringstream fb;
  write_text("", "hello", fb);
  CHECK(fb.str() == "hello");
}
