// Copyright 2026 The gfu Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// gfu: command-line front end.
//
//   gfu analyze <matrix.csv>     spectral report
//   gfu gamma <config>           covariance report
//   gfu simulate <config>        trajectory CSV
//   gfu limit <config>           limit-path ensemble statistics
//   gfu mc <config>              Monte Carlo report (JSON + summary CSV)
//   gfu rpw --p1 P --p2 P        play-the-winner closed forms
//
// Exit codes: 0 success, 2 validation error, 3 comparison FAIL, 4 numeric failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gfu/gfu.hpp"

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool deterministic = false;
  std::string out;
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream os(path);
  if (!os) throw gfu::validation_error("MissingFile", "cannot write " + path);
  os << text;
}

std::string dump(const nlohmann::json& j) { return j.dump(2) + "\n"; }

gfu::ExperimentConfig load_experiment(const std::string& path, const Globals& g) {
  gfu::Config c = gfu::Config::load(path);
  if (g.seed) c.set("experiment.seed", std::to_string(*g.seed));
  if (g.threads) c.set("experiment.threads", std::to_string(*g.threads));
  if (g.deterministic) c.set("experiment.deterministic", "true");
  return gfu::experiment_from_config(c);
}

int run_analyze(const std::string& path, double eig_tol, std::optional<int> nu, const Globals& g) {
  const gfu::Mat raw = gfu::load_matrix_csv(path);
  gfu::SpectralOptions opt;
  opt.eig_tol = eig_tol;
  opt.nu_override = nu;
  const gfu::GeneratingMatrix gm = gfu::validate_generating_matrix(raw);
  nlohmann::json j = gfu::to_json(gfu::spectral_analyze(gm, opt));
  j["row_sum"] = gm.s;
  emit(dump(j), g.out);
  return 0;
}

int run_gamma(const std::string& path, const Globals& g) {
  const gfu::ExperimentConfig e = load_experiment(path, g);
  const gfu::SpectralData sd =
      gfu::spectral_analyze(gfu::validate_generating_matrix(e.rule->limit_mean()), e.spectral);
  const gfu::NoiseMatrices nm = gfu::sigma_matrices(*e.rule, sd);
  emit(dump(gfu::to_json(gfu::gamma(sd, nm, e.quad_tol))), g.out);
  return 0;
}

int run_simulate(const std::string& path, const Globals& g) {
  const gfu::Config c = gfu::Config::load(path);
  const gfu::ExperimentConfig e = load_experiment(path, g);
  const long n = c.get_long("simulate.n", 1000);
  const long stride = c.get_long("simulate.stride", 0);
  gfu::UrnState st = gfu::init_urn(e.y0, e.rule, e.seed);
  const gfu::Trajectory t = gfu::run(st, n, stride);
  if (g.out.empty()) {
    gfu::write_trajectory_csv(t, std::cout);
  } else {
    std::ofstream os(g.out);
    if (!os) throw gfu::validation_error("MissingFile", "cannot write " + g.out);
    gfu::write_trajectory_csv(t, os);
  }
  return 0;
}

int run_limit(const std::string& path, const Globals& g) {
  const gfu::Config c = gfu::Config::load(path);
  const gfu::ExperimentConfig e = load_experiment(path, g);
  const gfu::SpectralData sd =
      gfu::spectral_analyze(gfu::validate_generating_matrix(e.rule->limit_mean()), e.spectral);
  const gfu::NoiseMatrices nm = gfu::sigma_matrices(*e.rule, sd);
  const gfu::CovarianceReport theory = gfu::gamma(sd, nm, e.quad_tol);
  const bool critical = sd.regime == gfu::Regime::kCritical;
  const int points = static_cast<int>(c.get_long("limit.grid_points", 4096));
  const long paths = c.get_long("limit.paths", 10000);
  const double horizon = c.get_double("limit.t", critical ? 1e4 : 1.0);
  const gfu::Mat samples = gfu::limit_ensemble(sd, nm, points, paths, e.seed, e.threads, horizon);
  const gfu::EnsembleStats stats = gfu::ensemble_stats(samples);
  const gfu::Verdict v = gfu::compare(stats.cov, theory.full(), e.tolerance);
  nlohmann::json j;
  j["regime"] = gfu::regime_name(sd.regime);
  j["equation"] = critical ? "Equ2" : "Equ1";
  j["t"] = horizon;
  j["grid_points"] = points;
  j["paths"] = paths;
  j["mean"] = gfu::to_json_vec(stats.mean);
  j["cov"] = gfu::to_json_rows(stats.cov);
  j["theory"] = gfu::to_json(theory);
  j["comparison"] = gfu::to_json(v);
  // Critical convergence is logarithmic in T: reported, not gated.
  j["gated"] = !critical;
  j["provenance"] = {{"seed", e.seed}};
  if (!e.deterministic) j["provenance"]["threads"] = e.threads;
  emit(dump(j), g.out);
  return (!critical && !v.pass) ? 3 : 0;
}

int run_mc(const std::string& path, const Globals& g) {
  const gfu::ExperimentConfig e = load_experiment(path, g);
  const gfu::ExperimentReport r = gfu::mc_experiment(e);
  const std::string json_path = !g.out.empty() ? g.out : e.json_path;
  emit(dump(gfu::to_json(r)), json_path);
  if (!e.csv_path.empty()) {
    std::ofstream os(e.csv_path);
    if (!os) throw gfu::validation_error("MissingFile", "cannot write " + e.csv_path);
    gfu::write_summary_csv(r, os);
  }
  return r.pass ? 0 : 3;
}

int run_rpw(double p1, double p2, std::optional<double> a1, std::optional<double> a2, const Globals& g) {
  const gfu::RpwAsymptotics r =
      gfu::rpw_closed_forms(p1, p2, a1.value_or(p1 * (1 - p1)), a2.value_or(p2 * (1 - p2)));
  nlohmann::json j = {{"v", {r.v1, r.v2}},
                      {"rho", r.rho},
                      {"sigma1_sq", r.sigma1_sq},
                      {"sigma2_sq", r.sigma2_sq},
                      {"regime", r.critical ? "critical" : "subcritical"}};
  if (r.critical) {
    j["sigma_tilde_sq"] = r.sigma_tilde_sq;
    j["scaled_cov"] = {r.sigma_tilde_sq, 2 * r.sigma_tilde_sq, 4 * r.sigma_tilde_sq};
  } else {
    j["sigma11"] = r.s11;
    j["sigma12"] = r.s12;
    j["sigma22"] = r.s22;
  }
  emit(dump(j), g.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generalized Friedman's urn simulation and verification"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  int threads = 1;
  app.add_option("--seed", seed, "master seed (overrides the config)")
      ->each([&](const std::string&) { g.seed = seed; });
  app.add_option("--threads", threads, "worker threads, 0 = all cores")
      ->each([&](const std::string&) { g.threads = threads; });
  app.add_flag("--deterministic", g.deterministic, "reproducible report without timing fields");
  app.add_option("--out", g.out, "output file (default: standard output)");

  std::string file;
  double eig_tol = 1e-9;
  int nu = 0;
  auto* analyze = app.add_subcommand("analyze", "spectral report of a generating matrix CSV");
  analyze->add_option("matrix", file, "CSV file, one row per line")->required();
  analyze->add_option("--eig-tol", eig_tol, "eigenvalue tolerance");
  auto* nu_opt = analyze->add_option("--nu", nu, "Jordan order override");
  for (const char* name : {"gamma", "simulate", "limit", "mc"}) {
    app.add_subcommand(name, std::string(name) + " from a config file")
        ->add_option("config", file, "config file")
        ->required();
  }
  app.get_subcommand("gamma")->description("covariance report");
  app.get_subcommand("simulate")->description("one trajectory as CSV");
  app.get_subcommand("limit")->description("composite limit-process ensemble");
  app.get_subcommand("mc")->description("Monte Carlo experiment report");
  double p1 = 0, p2 = 0, a1 = 0, a2 = 0;
  auto* rpw = app.add_subcommand("rpw", "play-the-winner closed forms");
  rpw->add_option("--p1", p1, "success probability of treatment 1")->required();
  rpw->add_option("--p2", p2, "success probability of treatment 2")->required();
  auto* a1_opt = rpw->add_option("--a1", a1, "response variance of treatment 1 (default p1 q1)");
  auto* a2_opt = rpw->add_option("--a2", a2, "response variance of treatment 2 (default p2 q2)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (analyze->parsed()) {
      return run_analyze(file, eig_tol, *nu_opt ? std::optional<int>(nu) : std::nullopt, g);
    }
    if (app.get_subcommand("gamma")->parsed()) return run_gamma(file, g);
    if (app.get_subcommand("simulate")->parsed()) return run_simulate(file, g);
    if (app.get_subcommand("limit")->parsed()) return run_limit(file, g);
    if (app.get_subcommand("mc")->parsed()) return run_mc(file, g);
    if (rpw->parsed()) {
      return run_rpw(p1, p2, *a1_opt ? std::optional<double>(a1) : std::nullopt,
                     *a2_opt ? std::optional<double>(a2) : std::nullopt, g);
    }
  } catch (const gfu::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return gfu::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}
