#include "dclg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "dclg/error.hpp"

namespace dclg {
namespace {

using nlohmann::json;

const std::set<std::string> kKeys = {
    "degrees", "homogeneous", "law",   "theta",     "gamma",     "zeta",        "theta_plus",
    "gamma_plus", "gamma_minus", "n",  "divisor",   "scheme",    "delta",       "xi",
    "k",       "runs",        "seed",  "out",       "workers",   "emit_qq",     "emit_hist",
    "bins",    "emit_series", "engine", "estimate", "full_system"};

std::string g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T>
T get(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("key '") + key + "': " + e.what());
  }
}

double get_number(const json& j, const char* key) {
  if (!j.at(key).is_number()) fail(ErrorCode::ParseError, std::string("key '") + key + "' must be a number");
  return j.at(key).get<double>();
}

std::size_t get_count(const json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::size_t>();
  if (v.is_number_integer() && v.get<std::int64_t>() >= 0) return static_cast<std::size_t>(v.get<std::int64_t>());
  if (v.is_number_float()) {
    // Accept 1e4-style literals when integral.
    const double d = v.get<double>();
    if (d >= 0.0 && d == std::floor(d) && d < 1e15) return static_cast<std::size_t>(d);
  }
  fail(ErrorCode::ParseError, std::string("key '") + key + "' must be a non-negative integer");
}

template <class Enum>
Enum get_choice(const json& j, const char* key, std::initializer_list<std::pair<const char*, Enum>> choices) {
  const auto s = get<std::string>(j, key);
  for (const auto& [name, value] : choices) {
    if (s == name) return value;
  }
  fail(ErrorCode::ParseError, std::string("key '") + key + "': unknown value '" + s + "'");
}

const char* law_name(LifetimeKind k) {
  switch (k) {
    case LifetimeKind::Exponential: return "exp";
    case LifetimeKind::Weibull: return "weibull";
    case LifetimeKind::Pareto: return "pareto";
  }
  return "?";
}

const char* engine_name(Engine e) {
  switch (e) {
    case Engine::Auto: return "auto";
    case Engine::SkipAhead: return "skip";
    case Engine::EventDriven: return "event";
  }
  return "?";
}

ParamSummary summarize(std::string name, const std::vector<double>& values) {
  ParamSummary s;
  s.name = std::move(name);
  s.count = values.size();
  if (!values.empty()) std::tie(s.mean, s.std) = mean_and_std(values);
  return s;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::IoError, "cannot open " + path.string());
  os << text;
  if (!os) fail(ErrorCode::IoError, "write failed for " + path.string());
}

json summary_entries(const std::vector<ParamSummary>& entries) {
  json j = json::object();
  for (const auto& e : entries) j[e.name] = {{"mean", e.mean}, {"std", e.std}, {"count", e.count}};
  return j;
}

json matrix_json(const Eigen::Matrix3d& m) {
  json rows = json::array();
  for (int r = 0; r < 3; ++r) rows.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return rows;
}

}  // namespace

ExperimentConfig parse_config(const json& j) {
  if (!j.is_object()) fail(ErrorCode::ParseError, "config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (!kKeys.count(key)) fail(ErrorCode::ParseError, "unknown config key '" + key + "'");
  }
  ExperimentConfig c;
  if (j.contains("degrees")) {
    c.family.degrees = get_choice<DegreeKind>(j, "degrees", {{"symmetric", DegreeKind::Symmetric}, {"inout", DegreeKind::InOut}});
  }
  const bool inout = c.family.degrees == DegreeKind::InOut;
  if (j.contains("homogeneous")) {
    c.family.homogeneous = get_choice<Side>(j, "homogeneous", {{"on", Side::On}, {"off", Side::Off}});
  }
  if (j.contains("law")) {
    c.family.law = get_choice<LifetimeKind>(
        j, "law", {{"exp", LifetimeKind::Exponential}, {"weibull", LifetimeKind::Weibull}, {"pareto", LifetimeKind::Pareto}});
  }
  if (j.contains("n")) c.family.n = get_count(j, "n");
  if (j.contains("divisor")) {
    c.family.divisor = get_choice<Divisor>(j, "divisor", {{"m", Divisor::M}, {"2m", Divisor::TwoM}});
  }
  if (inout) {
    if (j.contains("theta") || j.contains("gamma")) {
      fail(ErrorCode::ParseError, "theta/gamma do not apply to in/out degrees; use theta_plus, gamma_plus, gamma_minus");
    }
    c.params = {4.0, 2.0, 1.0};
    if (j.contains("theta_plus")) c.family.theta_plus = get_number(j, "theta_plus");
    if (j.contains("gamma_plus")) c.params[0] = get_number(j, "gamma_plus");
    if (j.contains("gamma_minus")) c.params[1] = get_number(j, "gamma_minus");
  } else {
    if (j.contains("theta_plus") || j.contains("gamma_plus") || j.contains("gamma_minus")) {
      fail(ErrorCode::ParseError, "theta_plus/gamma_plus/gamma_minus require degrees = inout");
    }
    if (j.contains("theta")) c.params[0] = get_number(j, "theta");
    if (j.contains("gamma")) c.params[1] = get_number(j, "gamma");
  }
  if (c.family.law == LifetimeKind::Pareto) c.params[2] = 2.0;
  if (j.contains("zeta")) c.params[2] = get_number(j, "zeta");

  const auto kind = j.contains("scheme")
                        ? get_choice<SchemeKind>(j, "scheme", {{"equidistant", SchemeKind::Equidistant}, {"poisson", SchemeKind::Poisson}})
                        : SchemeKind::Equidistant;
  const std::size_t k = j.contains("k") ? get_count(j, "k") : 20000;
  if (kind == SchemeKind::Equidistant) {
    if (j.contains("xi")) fail(ErrorCode::ParseError, "xi requires scheme = poisson");
    c.scheme = Equidistant{j.contains("delta") ? get_number(j, "delta") : 0.2, k};
  } else {
    if (j.contains("delta")) fail(ErrorCode::ParseError, "delta requires scheme = equidistant");
    c.scheme = PoissonTimes{j.contains("xi") ? get_number(j, "xi") : 5.0, k};
  }
  if (j.contains("runs")) c.runs = get_count(j, "runs");
  if (j.contains("seed")) {
    const auto& s = j.at("seed");
    if (s.is_number_unsigned()) {
      c.seed = s.get<std::uint64_t>();
    } else if (s.is_number_integer() && s.get<std::int64_t>() >= 0) {
      c.seed = static_cast<std::uint64_t>(s.get<std::int64_t>());
    } else {
      fail(ErrorCode::ParseError, "key 'seed' must be an unsigned integer");
    }
  }
  if (j.contains("out")) c.out = get<std::string>(j, "out");
  if (j.contains("workers")) c.workers = get_count(j, "workers");
  if (j.contains("engine")) {
    c.engine = get_choice<Engine>(j, "engine", {{"auto", Engine::Auto}, {"skip", Engine::SkipAhead}, {"event", Engine::EventDriven}});
  }
  if (j.contains("estimate")) c.estimate = get<bool>(j, "estimate");
  if (j.contains("emit_qq")) c.emit_qq = get<bool>(j, "emit_qq");
  if (j.contains("emit_hist")) c.emit_hist = get<bool>(j, "emit_hist");
  if (j.contains("bins")) c.bins = get_count(j, "bins");
  if (j.contains("emit_series")) c.emit_series = get_count(j, "emit_series");
  if (j.contains("full_system")) c.full_system = get<bool>(j, "full_system");
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::IoError, "cannot open " + path);
  json j;
  try {
    j = json::parse(is, nullptr, true, true);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, path + ": " + e.what());
  }
  return parse_config(j);
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  const bool inout = c.family.degrees == DegreeKind::InOut;
  j["degrees"] = inout ? "inout" : "symmetric";
  j["homogeneous"] = c.family.homogeneous == Side::On ? "on" : "off";
  j["law"] = law_name(c.family.law);
  if (inout) {
    j["theta_plus"] = c.family.theta_plus;
    j["gamma_plus"] = c.params[0];
    j["gamma_minus"] = c.params[1];
  } else {
    j["theta"] = c.params[0];
    j["gamma"] = c.params[1];
  }
  j["zeta"] = c.params[2];
  j["n"] = c.family.n;
  j["divisor"] = c.family.divisor == Divisor::M ? "m" : "2m";
  if (const auto* eq = std::get_if<Equidistant>(&c.scheme)) {
    j["scheme"] = "equidistant";
    j["delta"] = eq->delta;
  } else {
    j["scheme"] = "poisson";
    j["xi"] = std::get<PoissonTimes>(c.scheme).xi;
  }
  j["k"] = snapshot_count(c.scheme);
  j["runs"] = c.runs;
  j["seed"] = c.seed;
  if (!c.out.empty()) j["out"] = c.out;
  j["workers"] = c.workers;
  j["engine"] = engine_name(c.engine);
  j["estimate"] = c.estimate;
  j["emit_qq"] = c.emit_qq;
  j["emit_hist"] = c.emit_hist;
  j["bins"] = c.bins;
  j["emit_series"] = c.emit_series;
  j["full_system"] = c.full_system;
  return j;
}

void validate_config(const ExperimentConfig& c) {
  validate_scheme(c.scheme);
  if (c.family.n < 1) fail(ErrorCode::InvalidParameter, "n must be at least 1");
  if (snapshot_count(c.scheme) < 3) fail(ErrorCode::InvalidParameter, "k must be at least 3");
  if (c.runs < 1) fail(ErrorCode::InvalidParameter, "runs must be at least 1");
  if (c.bins < 1) fail(ErrorCode::InvalidParameter, "bins must be at least 1");
  if (!(c.params[2] > zeta_lower_bound(c.family.law)) || !std::isfinite(c.params[2])) {
    fail(ErrorCode::InvalidParameter, "zeta out of range for the lifetime law");
  }
  // Building the model checks theta, gamma and the edge probabilities.
  (void)make_spec(c.family, c.params);
}

GraphModelSpec true_spec(const ExperimentConfig& config) { return make_spec(config.family, config.params); }

std::uint64_t run_seed(std::uint64_t root, std::size_t index) noexcept {
  return derive_seed(root, 3, index);
}

std::vector<double> ExperimentReport::column(std::size_t param) const {
  std::vector<double> out;
  for (const auto& r : runs) {
    if (r.ok && r.estimate && r.estimate->solver.converged) out.push_back(r.estimate->params.at(param));
  }
  return out;
}

std::vector<double> ExperimentReport::stat_column(std::size_t which) const {
  std::vector<double> out;
  for (const auto& r : runs) {
    if (!r.ok) continue;
    out.push_back(which == 0 ? r.stats.s_hat : which == 1 ? r.stats.rho1_hat : r.stats.rho2_hat);
  }
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const ProgressFn& progress) {
  validate_config(config);
  const GraphModelSpec spec = true_spec(config);
  SolveOptions options;
  options.full_system = config.full_system;

  ExperimentReport report;
  report.config = config;
  report.runs.resize(config.runs);

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= config.runs) return;
      RunRecord& rec = report.runs[i];
      rec.index = i;
      rec.seed = run_seed(config.seed, i);
      try {
        auto series = simulate(spec, config.scheme, rec.seed, config.engine);
        rec.stats = compute_stats(series);
        if (config.estimate) rec.estimate = solve_moments(rec.stats, config.family, config.scheme, options);
        if (i < config.emit_series) rec.series = std::move(series);
        rec.ok = true;
      } catch (const std::exception& e) {
        rec.ok = false;
        rec.error = e.what();
      }
      const std::size_t d = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(d, config.runs);
      }
    }
  };
  std::size_t workers = config.workers ? config.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, config.runs);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  std::vector<MomentStats> ok_stats;
  for (const auto& r : report.runs) {
    if (!r.ok) {
      ++report.failed;
      continue;
    }
    ok_stats.push_back(r.stats);
    if (r.estimate) {
      if (r.estimate->solver.converged) {
        ++report.converged;
      } else {
        ++report.not_converged;
      }
    }
  }
  const char* stat_names[] = {"s_hat", "rho1_hat", "rho2_hat"};
  for (std::size_t s = 0; s < 3; ++s) report.statistics.push_back(summarize(stat_names[s], report.stat_column(s)));
  if (config.estimate) {
    const auto names = parameter_names(config.family);
    for (std::size_t p = 0; p < 3; ++p) report.params.push_back(summarize(names[p], report.column(p)));
  }
  if (ok_stats.size() >= 2) {
    const std::size_t k = snapshot_count(config.scheme);
    report.sigma_hat = empirical_sigma(ok_stats, k);
    try {
      report.sigma_circ = delta_method_cov(config.params, config.family, config.scheme, *report.sigma_hat);
    } catch (const Error& e) {
      report.notes.push_back(std::string("delta-method covariance unavailable: ") + e.what());
    }
  }
  if (report.failed) report.notes.push_back(std::to_string(report.failed) + " run(s) failed");
  if (report.not_converged) {
    report.notes.push_back(std::to_string(report.not_converged) + " run(s) did not converge and are excluded");
  }
  return report;
}

json summary_json(const ExperimentReport& report) {
  json j;
  j["config"] = config_to_json(report.config);
  j["runs"] = report.runs.size();
  j["converged"] = report.converged;
  j["not_converged"] = report.not_converged;
  j["failed"] = report.failed;
  j["statistics"] = summary_entries(report.statistics);
  if (!report.params.empty()) j["estimates"] = summary_entries(report.params);
  if (report.sigma_hat) j["sigma_hat"] = matrix_json(*report.sigma_hat);
  if (report.sigma_circ) {
    j["sigma_circ"] = matrix_json(*report.sigma_circ);
    // Implied standard deviation of the mean over L runs of length K.
    const double scale = static_cast<double>(snapshot_count(report.config.scheme));
    json sd = json::array();
    for (int i = 0; i < 3; ++i) sd.push_back(std::sqrt(std::max(0.0, (*report.sigma_circ)(i, i)) / scale));
    j["asymptotic_std"] = sd;
  }
  j["notes"] = report.notes;
  return j;
}

void write_report(const ExperimentReport& report, const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path root(dir);
  std::error_code ec;
  fs::create_directories(root, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create " + dir + ": " + ec.message());

  const auto names = parameter_names(report.config.family);
  std::string csv = "index,seed,ok,converged,s_hat,rho1_hat,rho2_hat";
  for (const auto& n : names) csv += "," + n;
  csv += ",residual,error\n";
  for (const auto& r : report.runs) {
    csv += std::to_string(r.index) + "," + std::to_string(r.seed) + "," + (r.ok ? "1" : "0") + ",";
    csv += (r.estimate && r.estimate->solver.converged) ? "1" : "0";
    if (r.ok) {
      csv += "," + g17(r.stats.s_hat) + "," + g17(r.stats.rho1_hat) + "," + g17(r.stats.rho2_hat);
    } else {
      csv += ",,,";
    }
    if (r.estimate) {
      for (double p : r.estimate->params) csv += "," + g17(p);
      csv += "," + g17(r.estimate->solver.residual_norm);
    } else {
      csv += ",,,,";
    }
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    csv += "," + err + "\n";
  }
  write_text(root / "runs.csv", csv);
  write_text(root / "summary.json", summary_json(report).dump(2) + "\n");

  auto emit = [&](const std::string& name, const std::vector<double>& values) {
    if (values.size() < 2) return;
    const auto [mean, sd] = mean_and_std(values);
    if (report.config.emit_hist) write_points_csv((root / ("hist_" + name + ".csv")).string(), histogram_density(values, report.config.bins));
    if (report.config.emit_qq && sd > 0.0) write_points_csv((root / ("qq_" + name + ".csv")).string(), qq_points(values, mean, sd));
  };
  if (report.config.estimate) {
    for (std::size_t p = 0; p < 3; ++p) emit(names[p], report.column(p));
  }
  const char* stat_names[] = {"s_hat", "rho1_hat", "rho2_hat"};
  for (std::size_t s = 0; s < 3; ++s) emit(stat_names[s], report.stat_column(s));
  for (const auto& r : report.runs) {
    if (r.series) write_series_csv((root / ("series_" + std::to_string(r.index) + ".csv")).string(), *r.series);
  }
}

std::vector<RunRecord> read_runs_csv(std::istream& is, const ModelFamily& family) {
  const auto names = parameter_names(family);
  std::string expected = "index,seed,ok,converged,s_hat,rho1_hat,rho2_hat";
  for (const auto& n : names) expected += "," + n;
  expected += ",residual,error";
  std::string line;
  if (!std::getline(is, line) || line != expected) fail(ErrorCode::ParseError, "unexpected runs.csv header");
  std::vector<RunRecord> out;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (int i = 0; i < 11; ++i) {
      const auto comma = line.find(',', start);
      if (comma == std::string::npos) fail(ErrorCode::ParseError, "runs.csv row " + std::to_string(row) + ": too few fields");
      f.push_back(line.substr(start, comma - start));
      start = comma + 1;
    }
    f.push_back(line.substr(start));
    RunRecord r;
    try {
      r.index = std::stoull(f[0]);
      r.seed = std::stoull(f[1]);
      r.ok = f[2] == "1";
      if (r.ok) {
        r.stats.s_hat = std::stod(f[4]);
        r.stats.rho1_hat = std::stod(f[5]);
        r.stats.rho2_hat = std::stod(f[6]);
      }
      if (!f[7].empty()) {
        EstimationResult e;
        e.family = family;
        e.stats = r.stats;
        for (int i = 0; i < 3; ++i) e.params[i] = std::stod(f[7 + i]);
        e.solver.residual_norm = std::stod(f[10]);
        e.solver.converged = f[3] == "1";
        r.estimate = e;
      }
    } catch (const std::logic_error&) {
      fail(ErrorCode::ParseError, "runs.csv row " + std::to_string(row) + ": bad number");
    }
    r.error = f[11];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RunRecord> read_runs_csv(const std::string& path, const ModelFamily& family) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::IoError, "cannot open " + path);
  return read_runs_csv(is, family);
}

EqualityReport run_equality_test(const ExperimentConfig& a, const ExperimentConfig& b, double level,
                                 const ProgressFn& progress) {
  if (a.family.n != b.family.n || a.runs != b.runs || scheme_kind(a.scheme) != scheme_kind(b.scheme) ||
      snapshot_count(a.scheme) != snapshot_count(b.scheme)) {
    fail(ErrorCode::InvalidParameter, "equality test needs matching n, k, runs and scheme");
  }
  const bool same_scheme = std::visit(
      [&](const auto& sa) {
        using T = std::decay_t<decltype(sa)>;
        const auto& sb = std::get<T>(b.scheme);
        if constexpr (std::is_same_v<T, Equidistant>) return sa.delta == sb.delta;
        else return sa.xi == sb.xi;
      },
      a.scheme);
  if (!same_scheme) fail(ErrorCode::InvalidParameter, "equality test needs the same sampling rate");
  EqualityReport out;
  out.a = run_experiment(a, progress);
  out.b = run_experiment(b, progress);
  out.s_hat = ks_two_sample(out.a.stat_column(0), out.b.stat_column(0), level);
  out.rho1_hat = ks_two_sample(out.a.stat_column(1), out.b.stat_column(1), level);
  return out;
}

json equality_json(const EqualityReport& r) {
  auto verdict = [](const KsVerdict& v) {
    return json{{"statistic", v.statistic}, {"p_value", v.p_value}, {"reject", v.reject},
                {"n1", v.n1},               {"n2", v.n2},           {"level", v.level}};
  };
  json j;
  j["a"] = summary_json(r.a);
  j["b"] = summary_json(r.b);
  j["ks_s_hat"] = verdict(r.s_hat);
  j["ks_rho1_hat"] = verdict(r.rho1_hat);
  return j;
}

}  // namespace dclg
