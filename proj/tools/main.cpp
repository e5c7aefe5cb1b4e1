#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>

#include "dclg/error.hpp"
#include "dclg/estimator.hpp"
#include "dclg/experiments.hpp"
#include "dclg/moments.hpp"

namespace {

using nlohmann::json;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> runs;
  std::optional<std::size_t> workers;
  std::optional<std::string> divisor;
};

void add_overrides(CLI::App* app, Overrides& o) {
  app->add_option("--seed", o.seed, "Root seed (U64)");
  app->add_option("--out", o.out, "Output path");
  app->add_option("--runs", o.runs, "Number of runs L");
  app->add_option("--workers", o.workers, "Worker threads (0: all cores)");
  app->add_option("--divisor", o.divisor, "Edge-probability normaliser")->check(CLI::IsMember({"m", "2m"}));
}

dclg::ExperimentConfig load(const std::string& path, const Overrides& o) {
  std::ifstream is(path);
  if (!is) dclg::fail(dclg::ErrorCode::IoError, "cannot open " + path);
  json j;
  try {
    j = json::parse(is, nullptr, true, true);
  } catch (const json::parse_error& e) {
    dclg::fail(dclg::ErrorCode::ParseError, path + ": " + e.what());
  }
  if (!j.is_object()) dclg::fail(dclg::ErrorCode::ParseError, path + ": expected an object");
  if (o.seed) j["seed"] = *o.seed;
  if (o.out) j["out"] = *o.out;
  if (o.runs) j["runs"] = *o.runs;
  if (o.workers) j["workers"] = *o.workers;
  if (o.divisor) j["divisor"] = *o.divisor;
  return dclg::parse_config(j);
}

void progress_bar(std::size_t done, std::size_t total) {
  if (done == total || done % std::max<std::size_t>(1, total / 20) == 0) {
    std::fprintf(stderr, "\r%zu/%zu runs", done, total);
    if (done == total) std::fputc('\n', stderr);
  }
}

void print_summary(const dclg::ExperimentReport& r) {
  if (r.config.estimate) {
    std::printf("runs %zu  converged %zu  not converged %zu  failed %zu\n", r.runs.size(), r.converged,
                r.not_converged, r.failed);
  } else {
    std::printf("runs %zu  failed %zu\n", r.runs.size(), r.failed);
  }
  for (const auto& s : r.statistics) {
    if (s.count) std::printf("  %-12s mean %.6g  std %.6g\n", s.name.c_str(), s.mean, s.std);
  }
  for (const auto& p : r.params) {
    if (p.count) std::printf("  %-12s mean %.6g  std %.6g\n", p.name.c_str(), p.mean, p.std);
  }
  for (const auto& n : r.notes) std::printf("  note: %s\n", n.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic Chung-Lu graph simulator and method-of-moments estimator"};
  app.require_subcommand(1);

  Overrides sim_o, est_o, exp_o, ks_o, mom_o;
  std::string sim_cfg, est_cfg, exp_cfg, mom_cfg, series_path, engine = "auto", format = "csv";
  std::vector<std::string> ks_cfgs;
  double level = 0.05;

  auto* sim = app.add_subcommand("simulate", "Simulate one snapshot series");
  sim->add_option("--config", sim_cfg, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  sim->add_option("--format", format, "Series file format")->check(CLI::IsMember({"csv", "bin"}));
  sim->add_option("--engine", engine, "Simulation engine")->check(CLI::IsMember({"auto", "skip", "event"}));
  add_overrides(sim, sim_o);

  auto* est = app.add_subcommand("estimate", "Estimate parameters from a series file");
  est->add_option("--config", est_cfg, "Config giving the model family and scheme")->required()->check(CLI::ExistingFile);
  est->add_option("--series", series_path, "Series file (CSV or binary)")->required()->check(CLI::ExistingFile);
  add_overrides(est, est_o);

  auto* exp = app.add_subcommand("experiment", "Run L seeded simulations and summarise the estimates");
  exp->add_option("--config", exp_cfg, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  add_overrides(exp, exp_o);

  auto* ks = app.add_subcommand("kstest", "Two-model equality test on s_hat and rho1_hat");
  ks->add_option("--config", ks_cfgs, "Two configs: model A then model B")->required()->expected(2)->check(CLI::ExistingFile);
  ks->add_option("--level", level, "Test level")->check(CLI::Range(1e-6, 0.5));
  add_overrides(ks, ks_o);

  auto* mom = app.add_subcommand("moments", "Print the analytic moment vector of a config");
  mom->add_option("--config", mom_cfg, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  add_overrides(mom, mom_o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim) {
      const auto c = load(sim_cfg, sim_o);
      const dclg::Engine e = engine == "skip" ? dclg::Engine::SkipAhead
                             : engine == "event" ? dclg::Engine::EventDriven
                                                 : c.engine;
      const auto series = dclg::simulate(dclg::true_spec(c), c.scheme, c.seed, e);
      const std::string out = sim_o.out ? *sim_o.out : (format == "bin" ? "series.bin" : "series.csv");
      if (format == "bin") {
        dclg::write_series_binary(out, series);
      } else {
        dclg::write_series_csv(out, series);
      }
      const auto stats = dclg::compute_stats(series);
      std::printf("wrote %s (%zu snapshots)  s_hat %.6g  rho1_hat %.6g  rho2_hat %.6g\n", out.c_str(),
                  series.counts.size(), stats.s_hat, stats.rho1_hat, stats.rho2_hat);
    } else if (*est) {
      const auto c = load(est_cfg, est_o);
      const auto series = dclg::read_series(series_path, c.scheme);
      const auto stats = dclg::compute_stats(series);
      dclg::SolveOptions options;
      options.full_system = c.full_system;
      const auto result = dclg::solve_moments(stats, c.family, c.scheme, options);
      const std::string text = dclg::to_json(result).dump(2);
      if (!est_o.out) {
        std::cout << text << '\n';
      } else {
        std::ofstream os(*est_o.out);
        os << text << '\n';
        if (!os) dclg::fail(dclg::ErrorCode::IoError, "cannot write " + *est_o.out);
      }
      return result.solver.converged ? 0 : 3;
    } else if (*exp) {
      const auto c = load(exp_cfg, exp_o);
      const auto report = dclg::run_experiment(c, progress_bar);
      print_summary(report);
      if (!c.out.empty()) {
        dclg::write_report(report, c.out);
        std::printf("report written to %s\n", c.out.c_str());
      }
    } else if (*ks) {
      auto a = load(ks_cfgs[0], ks_o);
      auto b = load(ks_cfgs[1], ks_o);
      const auto report = dclg::run_equality_test(a, b, level, progress_bar);
      std::printf("model A: s_hat mean %.6g\nmodel B: s_hat mean %.6g\n", report.a.statistics[0].mean,
                  report.b.statistics[0].mean);
      for (const auto& [name, v] : {std::pair{"s_hat", report.s_hat}, std::pair{"rho1_hat", report.rho1_hat}}) {
        std::printf("KS on %-8s D %.4f  p %.4g  %s at %.3g\n", name, v.statistic, v.p_value,
                    v.reject ? "reject" : "do not reject", v.level);
      }
      if (!a.out.empty()) {
        dclg::write_report(report.a, a.out + "/a");
        dclg::write_report(report.b, a.out + "/b");
        std::ofstream(a.out + "/kstest.json") << dclg::equality_json(report).dump(2) << '\n';
      }
    } else if (*mom) {
      const auto c = load(mom_cfg, mom_o);
      const auto mv = dclg::model_moments(dclg::true_spec(c), c.scheme);
      const auto x = dclg::y_functions(mv.kind, mv.s, mv.rho1, mv.rho2);
      json j{{"s", mv.s}, {"rho1", mv.rho1}, {"rho2", mv.rho2}, {"x", {x[0], x[1], x[2]}},
             {"scheme", mv.kind == dclg::SchemeKind::Equidistant ? "equidistant" : "poisson"}};
      std::cout << j.dump(2) << '\n';
    }
  } catch (const dclg::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
