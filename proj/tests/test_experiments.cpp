#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dclg/error.hpp"
#include "dclg/experiments.hpp"

using namespace dclg;
using nlohmann::json;

namespace {

json small_config() {
  return json{{"law", "exp"},   {"theta", 1.0},     {"gamma", 3.0}, {"zeta", 0.5}, {"scheme", "poisson"},
              {"xi", 5.0},      {"k", 2000},        {"runs", 6},    {"seed", 99},  {"emit_hist", true},
              {"emit_qq", true}, {"emit_series", 2}, {"bins", 5}};
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("dclg_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

ErrorCode code_of(const json& j) {
  try {
    parse_config(j);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::IoError;
}

}  // namespace

TEST(Config, Defaults) {
  const auto c = parse_config(json::object());
  EXPECT_EQ(c.family.degrees, DegreeKind::Symmetric);
  EXPECT_EQ(c.family.n, 20u);
  EXPECT_EQ(c.runs, 100u);
  EXPECT_TRUE(std::holds_alternative<Equidistant>(c.scheme));
}

TEST(Config, StrictKeys) {
  auto j = small_config();
  j["gama"] = 3.0;
  EXPECT_EQ(code_of(j), ErrorCode::ParseError);
  EXPECT_EQ(code_of(json{{"scheme", "poisson"}, {"delta", 0.2}}), ErrorCode::ParseError);
  EXPECT_EQ(code_of(json{{"law", "gamma"}}), ErrorCode::ParseError);
  EXPECT_EQ(code_of(json{{"k", -4}}), ErrorCode::ParseError);
  EXPECT_EQ(code_of(json{{"theta", "1"}}), ErrorCode::ParseError);
  EXPECT_EQ(code_of(json{{"gamma_plus", 4.0}}), ErrorCode::ParseError);
  EXPECT_EQ(code_of(json::array()), ErrorCode::ParseError);
}

TEST(Config, Ranges) {
  EXPECT_EQ(code_of(json{{"gamma", 1.0}}), ErrorCode::InvalidParameter);
  EXPECT_EQ(code_of(json{{"zeta", 0.0}}), ErrorCode::InvalidParameter);
  EXPECT_EQ(code_of(json{{"law", "pareto"}, {"zeta", 1.0}}), ErrorCode::InvalidParameter);
  EXPECT_EQ(code_of(json{{"runs", 0}}), ErrorCode::InvalidParameter);
  EXPECT_EQ(code_of(json{{"k", 2}}), ErrorCode::InvalidParameter);
  EXPECT_EQ(code_of(json{{"theta", 5.0}}), ErrorCode::EdgeProbabilityOverflow);
}

TEST(Config, JsonRoundTrip) {
  auto j = small_config();
  j["degrees"] = "inout";
  j.erase("theta");
  j.erase("gamma");
  j["gamma_plus"] = 4.0;
  j["gamma_minus"] = 2.0;
  j["divisor"] = "2m";
  const auto c = parse_config(j);
  const auto back = parse_config(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_EQ(back.family.divisor, Divisor::TwoM);
  EXPECT_EQ(back.params[0], 4.0);
}

TEST(Experiment, DeterministicAcrossWorkerCounts) {
  auto j = small_config();
  j["workers"] = 1;
  const auto a = run_experiment(parse_config(j));
  j["workers"] = 3;
  const auto b = run_experiment(parse_config(j));
  EXPECT_EQ(summary_json(a).dump(), summary_json(b).dump().replace(summary_json(b).dump().find("\"workers\":3"), 11, "\"workers\":1"));
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(a.runs[i].seed, b.runs[i].seed);
    EXPECT_EQ(a.runs[i].stats.s_hat, b.runs[i].stats.s_hat);
    ASSERT_TRUE(a.runs[i].estimate && b.runs[i].estimate);
    EXPECT_EQ(a.runs[i].estimate->params, b.runs[i].estimate->params);
  }
}

TEST(Experiment, SingleRunReproducible) {
  auto j = small_config();
  j["runs"] = 1;
  const auto a = run_experiment(parse_config(j));
  const auto b = run_experiment(parse_config(j));
  EXPECT_EQ(summary_json(a).dump(), summary_json(b).dump());
  const auto da = temp_dir("rep_a"), db = temp_dir("rep_b");
  write_report(a, da.string());
  write_report(b, db.string());
  auto slurp = [](const std::filesystem::path& p) {
    std::ifstream is(p);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
  };
  EXPECT_EQ(slurp(da / "runs.csv"), slurp(db / "runs.csv"));
  EXPECT_EQ(slurp(da / "summary.json"), slurp(db / "summary.json"));
}

TEST(Experiment, SummaryIsMeanOfConvergedRuns) {
  const auto r = run_experiment(parse_config(small_config()));
  ASSERT_EQ(r.params.size(), 3u);
  EXPECT_EQ(r.converged + r.not_converged + r.failed, r.runs.size());
  for (std::size_t p = 0; p < 3; ++p) {
    const auto col = r.column(p);
    double sum = 0.0;
    for (double v : col) sum += v;
    EXPECT_NEAR(r.params[p].mean, sum / col.size(), 1e-12);
    EXPECT_EQ(r.params[p].count, col.size());
  }
  ASSERT_TRUE(r.sigma_hat.has_value());
  EXPECT_TRUE(r.sigma_circ.has_value());
}

TEST(Experiment, RunFailuresAreCounted) {
  // Single edge with e = 1 cannot be bound: every run fails and the experiment still returns.
  auto j = json{{"n", 1}, {"theta", 1.0}, {"runs", 3}, {"k", 10}, {"estimate", false}};
  const auto r = run_experiment(parse_config(j));
  EXPECT_EQ(r.failed, 3u);
  EXPECT_FALSE(r.runs[0].error.empty());
}

TEST(Experiment, ReportFilesRoundTrip) {
  const auto c = parse_config(small_config());
  const auto r = run_experiment(c);
  const auto dir = temp_dir("files");
  write_report(r, dir.string());
  for (const char* f : {"runs.csv", "summary.json", "hist_theta.csv", "qq_zeta.csv", "hist_s_hat.csv", "series_0.csv", "series_1.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / f)) << f;
  }
  EXPECT_FALSE(std::filesystem::exists(dir / "series_2.csv"));

  const auto rows = read_runs_csv((dir / "runs.csv").string(), c.family);
  ASSERT_EQ(rows.size(), r.runs.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].seed, r.runs[i].seed);
    EXPECT_EQ(rows[i].stats.s_hat, r.runs[i].stats.s_hat);
    EXPECT_EQ(rows[i].stats.rho2_hat, r.runs[i].stats.rho2_hat);
    ASSERT_TRUE(rows[i].estimate.has_value());
    EXPECT_EQ(rows[i].estimate->params, r.runs[i].estimate->params);
    EXPECT_EQ(rows[i].estimate->solver.converged, r.runs[i].estimate->solver.converged);
  }
  const auto series = read_series((dir / "series_1.csv").string(), c.scheme);
  EXPECT_EQ(series.counts, r.runs[1].series->counts);
  EXPECT_EQ(series.times, r.runs[1].series->times);
  const auto qq = read_points_csv((dir / "qq_zeta.csv").string());
  EXPECT_EQ(qq.size(), r.column(2).size());
  const auto summary = json::parse(std::ifstream(dir / "summary.json"));
  EXPECT_EQ(summary["estimates"]["theta"]["mean"].get<double>(), r.params[0].mean);
}

TEST(Equality, SameConfigSameSeedGivesZeroDistance) {
  auto j = small_config();
  j["estimate"] = false;
  const auto c = parse_config(j);
  const auto r = run_equality_test(c, c, 0.05);
  EXPECT_EQ(r.s_hat.statistic, 0.0);
  EXPECT_FALSE(r.s_hat.reject);
  EXPECT_EQ(r.rho1_hat.statistic, 0.0);
}

TEST(Equality, MismatchedShapesRejected) {
  auto a = small_config(), b = small_config();
  b["k"] = 3000;
  EXPECT_THROW(run_equality_test(parse_config(a), parse_config(b)), Error);
  b = small_config();
  b["xi"] = 4.0;
  EXPECT_THROW(run_equality_test(parse_config(a), parse_config(b)), Error);
}
