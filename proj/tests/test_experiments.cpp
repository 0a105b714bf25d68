#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "experiments.hpp"
#include "common.hpp"

using namespace ps;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

std::vector<double> row_values(const std::string& line) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(std::stod(cell));
  return out;
}

status code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const error& e) {
    return e.code;
  }
  return status::ok;
}

}  // namespace

TEST_CASE("config defaults and seed policy") {
  ExperimentConfig f1 = default_config("fig1");
  CHECK(f1.scheme.R == 100.0);
  CHECK(f1.scheme.eta == 0.1);
  CHECK(f1.numerics.sample_times == std::vector<double>{0.5, 1.0, 10.0});
  CHECK(f1.numerics.dt == 0.5 / 5051.0);
  CHECK_FALSE(f1.numerics.seed_set);

  // deterministic experiments run without a seed; stochastic ones refuse at
  // run time (parsing stays legal so a flag can complete a seedless file)
  CHECK(code_of([] { parse_config("{\"experiment\":\"sieve\"}"); }) ==
        status::ok);
  CHECK(code_of([] { parse_config("{\"experiment\":\"fig2\"}"); }) ==
        status::ok);
  CHECK(code_of([] { fig2_blocks(default_config("fig2")); }) ==
        status::config);
  CHECK(code_of([] {
          parse_config(
              "{\"experiment\":\"fig2\",\"numerics\":{\"seed\":7}}");
        }) == status::ok);
  CHECK(code_of([] { default_config("fig9"); }) == status::config);
}

TEST_CASE("config json round trip is the identity") {
  std::string text = R"({
    "experiment": "fig1",
    "model": {"type": "atom", "omega": 25.0},
    "scheme": {"kind": "jump", "R": 40.0, "phi": 0.25, "eta": 0.3,
               "phi_grid": [0.0, 0.5, 1.0]},
    "numerics": {"dt": 0.0001, "t_final": 2.0, "sample_times": [1.0, 2.0],
                 "n_traj": 50, "seed": 123456789, "threads": 2},
    "sieve": {"grid": 12},
    "validate": {"quick": true},
    "out": "sweep.csv"
  })";
  ExperimentConfig cfg = parse_config(text);
  CHECK(cfg.model.omega == 25.0);
  CHECK(cfg.scheme.phi_grid.size() == 3);
  CHECK(cfg.numerics.seed == 123456789);
  CHECK(cfg.numerics.threads == 2);
  CHECK(cfg.validate.quick);
  CHECK(cfg.out == "sweep.csv");

  std::string once = serialize_config(cfg);
  ExperimentConfig back = parse_config(once);
  CHECK(serialize_config(back) == once);
  CHECK(back.numerics.seed_set);
  CHECK(back.numerics.sample_times == cfg.numerics.sample_times);

  // an explicitly empty list survives the round trip (it is not re-defaulted)
  ExperimentConfig empty_times = parse_config(
      "{\"experiment\":\"fig1\",\"numerics\":{\"seed\":1,\"sample_times\":["
      "]}}");
  ExperimentConfig again = parse_config(serialize_config(empty_times));
  CHECK(again.numerics.sample_times.empty());
}

TEST_CASE("config rejects unknown keys and bad values by name") {
  auto msg_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const error& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(msg_of("{\"experiment\":\"sieve\",\"mode\":{}}").find("'mode'") !=
        std::string::npos);
  CHECK(msg_of("{\"experiment\":\"sieve\",\"model\":{\"omg\":1}}")
            .find("'omg'") != std::string::npos);
  CHECK(msg_of("{\"experiment\":\"sieve\",\"model\":{\"omega\":\"x\"}}")
            .find("model.omega") != std::string::npos);
  CHECK(msg_of("{\"experiment\":\"sieve\",\"numerics\":{\"dt\":0}}")
            .find("numerics.dt") != std::string::npos);
  CHECK(msg_of("{\"experiment\":\"sieve\",\"numerics\":{\"seed\":-4}}")
            .find("numerics.seed") != std::string::npos);
  CHECK(msg_of("{\"experiment\":\"sieve\",\"numerics\":{\"seed\":1.5}}")
            .find("numerics.seed") != std::string::npos);
  CHECK(msg_of("{\"experiment\":\"sieve\",\"scheme\":{\"eta\":1.5}}")
            .find("eta") != std::string::npos);
  CHECK(msg_of("{\"experiment\":\"sieve\",\"scheme\":{\"kind\":\"emu\"}}")
            .find("'emu'") != std::string::npos);
  CHECK(msg_of("{\"experiment\":\"sieve\",\"sieve\":{\"grid\":4}}")
            .find("sieve.grid") != std::string::npos);
  CHECK(msg_of("not json").find("config:") != std::string::npos);
  CHECK(msg_of("[1,2]").find("object") != std::string::npos);
}

TEST_CASE("atomic write leaves no temp file and survives overwrite") {
  std::string path = "/tmp/ps_exp_atomic.csv";
  std::remove(path.c_str());
  write_atomic(path, "a,b\n1,2\n");
  write_atomic(path, "a,b\n3,4\n");
  std::ifstream in(path);
  std::stringstream got;
  got << in.rdbuf();
  CHECK(got.str() == "a,b\n3,4\n");
  std::ifstream tmp(path + ".tmp");
  CHECK_FALSE(tmp.good());
  std::remove(path.c_str());

  CHECK(code_of([] {
          write_atomic("/tmp/ps_no_such_dir/x.csv", "y");
        }) == status::config);
}

TEST_CASE("fig1 sweep matches the closed curve and is reproducible") {
  ExperimentConfig cfg = default_config("fig1");
  cfg.numerics.seed = 71;
  cfg.numerics.seed_set = true;
  cfg.numerics.n_traj = 400;
  cfg.numerics.sample_times = {0.5, 1.0};
  cfg.scheme.phi_grid = {0.0, M_PI / 4.0, M_PI / 2.0};

  std::string csv = run_fig1(cfg);
  CHECK(csv.back() == '\n');
  auto ls = lines_of(csv);
  REQUIRE(ls.size() == 1 + 3 * 2);
  CHECK(ls[0] == "phi,t,deltaP_analytic,deltaP_mc,stderr");

  double mc_phi0_t1 = 0, mc_phi90_t1 = 0;
  for (size_t i = 1; i < ls.size(); ++i) {
    auto v = row_values(ls[i]);
    REQUIRE(v.size() == 5);
    CHECK(std::abs(v[3] - v[2]) < 4.0 * v[4] + 5e-4);
    CHECK(v[4] > 0.0);
    if (v[1] == 1.0 && v[0] == 0.0) mc_phi0_t1 = v[3];
    if (v[1] == 1.0 && v[0] > 1.5) mc_phi90_t1 = v[3];
  }
  // the x-quadrature phase purifies fastest; shared streams keep the
  // comparison low-noise
  CHECK(mc_phi0_t1 > mc_phi90_t1);

  CHECK(run_fig1(cfg) == csv);

  cfg.numerics.sample_times = {0.503};
  CHECK(code_of([&] { run_fig1(cfg); }) == status::config);
}

TEST_CASE("fig1 default phase grid spans [0, pi] with symmetric ends") {
  ExperimentConfig cfg = default_config("fig1");
  cfg.numerics.seed = 5;
  cfg.numerics.seed_set = true;
  cfg.numerics.n_traj = 2;
  cfg.numerics.sample_times = {0.5};
  auto pts = fig1_points(cfg);
  REQUIRE(pts.size() == 25);
  CHECK(pts.front().phi == 0.0);
  CHECK(pts.back().phi == doctest::Approx(M_PI));
  // cos(pi) = -1 exactly, so the two ends see identical kicks
  CHECK(pts.back().mc == pts.front().mc);
  CHECK(pts.back().analytic == doctest::Approx(pts.front().analytic));
}

TEST_CASE("fig2 analytic column integrates to one per tau") {
  ExperimentConfig cfg = default_config("fig2");
  cfg.numerics.seed = 72;
  cfg.numerics.seed_set = true;
  cfg.numerics.n_traj = 3000;
  cfg.numerics.sample_times = {0.05, 0.5};

  auto blocks = fig2_blocks(cfg);
  REQUIRE(blocks.size() == 2);
  for (const auto& b : blocks) {
    REQUIRE(b.b_centers.size() >= 30);
    double width = b.b_centers[1] - b.b_centers[0];
    double trap = 0, mc_mass = 0;
    for (size_t i = 0; i + 1 < b.b_centers.size(); ++i)
      trap += 0.5 * (b.density_analytic[i] + b.density_analytic[i + 1]) *
              width;
    for (size_t i = 0; i < b.b_centers.size(); ++i)
      mc_mass += b.density_mc[i] * width;
    CHECK(std::abs(trap - 1.0) < 1e-3);
    CHECK(mc_mass > 0.99);
    CHECK(mc_mass < 1.0 + 1e-12);
  }

  // early times: a single peak at A = 0
  const auto& b0 = blocks[0];
  size_t peak = 0;
  for (size_t i = 0; i < b0.density_mc.size(); ++i)
    if (b0.density_mc[i] > b0.density_mc[peak]) peak = i;
  CHECK(std::abs(std::tanh(b0.b_centers[peak])) < 0.3);

  CHECK(run_fig2(cfg) == run_fig2(cfg));

  cfg.numerics.sample_times = {0.5, 0.05};
  CHECK(code_of([&] { run_fig2(cfg); }) == status::config);
  cfg.numerics.sample_times = {0.0505};
  CHECK(code_of([&] { run_fig2(cfg); }) == status::config);
}

TEST_CASE("fig2 late-time ensemble is pinned to the edges") {
  ExperimentConfig cfg = default_config("fig2");
  cfg.numerics.seed = 14;
  cfg.numerics.seed_set = true;
  cfg.numerics.n_traj = 2000;
  cfg.numerics.sample_times = {5.0};
  auto blocks = fig2_blocks(cfg);
  REQUIRE(blocks.size() == 1);
  const auto& b = blocks[0];
  double width = b.b_centers[1] - b.b_centers[0];
  double saturated = 0;
  for (size_t i = 0; i < b.b_centers.size(); ++i)
    if (std::abs(std::tanh(b.b_centers[i])) > 0.9)
      saturated += b.density_mc[i] * width;
  CHECK(saturated > 0.9);
}

TEST_CASE("fig3 flip frequency follows the decay law") {
  ExperimentConfig cfg = default_config("fig3");
  cfg.numerics.seed = 73;
  cfg.numerics.seed_set = true;
  cfg.numerics.n_traj = 400;

  Fig3Data d = fig3_data(cfg);
  REQUIRE(d.windows.size() == 5);
  CHECK(d.windows.front().lo == 1.0);
  CHECK(d.windows.back().hi == 6.0);
  CHECK(d.fit_slope == doctest::Approx(1.0).epsilon(0.2));
  for (size_t w = 0; w + 1 < d.windows.size(); ++w) {
    CHECK(d.windows[w].flips > d.windows[w + 1].flips);
    CHECK(d.windows[w].rate_law > d.windows[w + 1].rate_law);
  }
  for (const auto& w : d.windows)
    CHECK(w.rate_mc == doctest::Approx(double(w.flips) / 400.0));

  REQUIRE(d.a_paths.size() == 3);
  REQUIRE(d.taus.size() == 601);
  for (const auto& path : d.a_paths) {
    REQUIRE(path.size() == 601);
    CHECK(path.front() == 0.0);
    for (double a : path) CHECK(std::abs(a) <= 1.0);
  }
}

TEST_CASE("fig3 writes the trajectory table and the flip summary") {
  ExperimentConfig cfg = default_config("fig3");
  cfg.numerics.seed = 9;
  cfg.numerics.seed_set = true;
  cfg.numerics.n_traj = 50;
  cfg.numerics.t_final = 3.0;
  cfg.out = "/tmp/ps_exp_fig3.csv";
  Fig3Result r = run_fig3(cfg);
  CHECK(r.flips_path == "/tmp/ps_exp_fig3_flips.csv");
  auto ls = lines_of(r.trajectories_csv);
  CHECK(ls[0] == "tau,A_traj_1,A_traj_2,A_traj_3");
  CHECK(ls.size() == 1 + 301);
  auto fl = lines_of(r.flips_csv);
  CHECK(fl[0] == "tau_lo,tau_hi,flips,rate_mc,rate_law,fit_slope");
  CHECK(fl.size() == 1 + 2);
  std::ifstream a(cfg.out), b(r.flips_path);
  CHECK(a.good());
  CHECK(b.good());
  std::remove(cfg.out.c_str());
  std::remove(r.flips_path.c_str());
}

TEST_CASE("sieve table ranks the drive-locked states first") {
  ExperimentConfig cfg = default_config("sieve");
  cfg.sieve.grid = 20;
  std::string csv = run_sieve(cfg);
  auto ls = lines_of(csv);
  REQUIRE(ls.size() > 4);
  CHECK(ls[0][0] == '#');
  size_t header = 0;
  while (ls[header][0] == '#') ++header;
  CHECK(ls[header] ==
        "rank,descriptor,purity_loss_rate,purity_se,fidelity_loss_rate,"
        "fidelity_se");
  // rank 1 is a sigma_x eigenstate up to the grid resolution
  std::string first = ls[header + 1];
  CHECK(first.substr(0, 2) == "1,");
  CHECK(first.find("bloch(") != std::string::npos);
  double x = std::stod(first.substr(first.find("bloch(") + 6));
  CHECK(std::abs(x) > std::cos(2.0 * M_PI / 20.0));
}

TEST_CASE("sieve table for packet superpositions prefers coherent states") {
  ExperimentConfig cfg = default_config("sieve");
  cfg.model.type = "qbm";
  cfg.model.fock_dim = 24;
  cfg.model.z_re = 2.0;
  cfg.model.z_im = 0.0;
  std::string csv = run_sieve(cfg);
  auto ls = lines_of(csv);
  size_t header = 0;
  while (ls[header][0] == '#') ++header;
  REQUIRE(ls.size() == header + 1 + 5);
  // both zero-loss states (vacuum is the z=0 packet) outrank every number
  // state, and the macroscopic superposition dies fastest
  CHECK(ls[header + 1].find("number") == std::string::npos);
  CHECK(ls[header + 2].find("number") == std::string::npos);
  CHECK(ls[header + 5].find("cat(") != std::string::npos);
}

TEST_CASE("trajectory table starts excited and stays a valid state") {
  ExperimentConfig cfg = default_config("trajectory");
  cfg.numerics.seed = 31;
  cfg.numerics.seed_set = true;
  std::string csv = run_trajectory(cfg);
  auto ls = lines_of(csv);
  CHECK(ls[0] == "t,x,y,z,re_c,im_c,n_c,purity,fidelity");
  REQUIRE(ls.size() == 1 + 201);
  auto first = row_values(ls[1]);
  CHECK(first[0] == 0.0);
  CHECK(first[3] == doctest::Approx(1.0));        // starts in the upper state
  CHECK(first[7] == doctest::Approx(1.0));
  CHECK(first[8] == doctest::Approx(1.0));
  double tprev = -1.0;
  for (size_t i = 1; i < ls.size(); ++i) {
    auto v = row_values(ls[i]);
    CHECK(v[0] > tprev);
    tprev = v[0];
    CHECK(v[7] > 0.49);
    CHECK(v[7] < 1.0 + 1e-9);
  }
}

TEST_CASE("trajectory of a monitored packet keeps purity at full efficiency") {
  ExperimentConfig cfg = default_config("trajectory");
  cfg.model.type = "qbm";
  cfg.model.fock_dim = 16;
  cfg.model.z_re = 1.5;
  cfg.scheme.kind = "diffusive";
  cfg.scheme.eta = 1.0;
  cfg.numerics.t_final = 1.0;
  cfg.numerics.sample_times = {0.0, 0.25, 0.5, 0.75, 1.0};
  cfg.numerics.seed = 32;
  cfg.numerics.seed_set = true;
  std::string csv = run_trajectory(cfg);
  auto ls = lines_of(csv);
  REQUIRE(ls.size() == 1 + 5);
  double n_first = row_values(ls[1])[6];
  double n_last = row_values(ls[5])[6];
  CHECK(n_first == doctest::Approx(1.5 * 1.5).epsilon(1e-6));
  CHECK(n_last < n_first);  // photons leak out
  for (size_t i = 1; i < ls.size(); ++i)
    CHECK(row_values(ls[i])[7] > 0.999);
}

TEST_CASE("experiment dispatch refuses the validation entry point") {
  ExperimentConfig cfg = default_config("validate");
  CHECK(code_of([&] { run_experiment(cfg); }) == status::config);
  ExperimentConfig s = default_config("sieve");
  s.sieve.grid = 8;
  CHECK_FALSE(run_experiment(s).empty());
}
