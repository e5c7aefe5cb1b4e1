#include "dclg/estimator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/tools/toms748_solve.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "dclg/error.hpp"
#include "dclg/numeric.hpp"

namespace dclg {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Vec = Eigen::VectorXd;
using Residual = std::function<std::optional<Vec>(const Vec&)>;

double max_abs(const Vec& v) { return v.cwiseAbs().maxCoeff(); }

// Evaluates x(params) with memoized transforms of the homogeneous law.
class MomentSystem {
 public:
  MomentSystem(const ModelFamily& family, const SamplingScheme& scheme)
      : family_(family), scheme_(scheme), kind_(scheme_kind(scheme)) {}

  std::optional<Eigen::Vector3d> x(const ParamVector& p) {
    for (double v : p) {
      if (!std::isfinite(v)) return std::nullopt;
    }
    try {
      const auto spec = make_spec(family_, p);
      MomentVector mv;
      if (kind_ == SchemeKind::Poisson) {
        const LawTransforms& t = transforms(spec.binding.law, p[2]);
        mv = model_moments(spec, scheme_, &t);
      } else {
        mv = model_moments(spec, scheme_);
      }
      return y_functions(kind_, mv.s, mv.rho1, mv.rho2);
    } catch (const Error&) {
      return std::nullopt;
    }
  }

  const ModelFamily& family() const { return family_; }

 private:
  const LawTransforms& transforms(const LifetimeDist& law, double zeta) {
    auto it = cache_.find(zeta);
    if (it == cache_.end()) {
      if (cache_.size() > 4096) cache_.clear();
      it = cache_.emplace(zeta, law_transforms(law, std::get<PoissonTimes>(scheme_).xi)).first;
    }
    return it->second;
  }

  ModelFamily family_;
  SamplingScheme scheme_;
  SchemeKind kind_;
  std::map<double, LawTransforms> cache_;
};

std::optional<Eigen::MatrixXd> fd_jacobian(const Residual& f, const Vec& z, const Vec& fz) {
  const auto n = z.size();
  Eigen::MatrixXd jac(fz.size(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = 1e-6 * (1.0 + std::abs(z[j]));
    Vec zp = z, zm = z;
    zp[j] += h;
    zm[j] -= h;
    const auto fp = f(zp);
    const auto fm = f(zm);
    if (fp && fm) {
      jac.col(j) = (*fp - *fm) / (2.0 * h);
    } else if (fp) {
      jac.col(j) = (*fp - fz) / h;
    } else if (fm) {
      jac.col(j) = (fz - *fm) / h;
    } else {
      return std::nullopt;
    }
  }
  return jac;
}

struct NewtonOutcome {
  Vec z;
  Vec r;
  std::size_t iterations = 0;
  bool converged = false;
};

NewtonOutcome damped_newton(const Residual& f, Vec z, Vec r, std::size_t max_iterations,
                            double tol) {
  NewtonOutcome out{z, r, 0, false};
  for (std::size_t it = 0; it < max_iterations; ++it) {
    if (max_abs(out.r) <= tol) {
      out.converged = true;
      return out;
    }
    const auto jac = fd_jacobian(f, out.z, out.r);
    if (!jac) break;
    Vec step = jac->colPivHouseholderQr().solve(-out.r);
    if (!step.allFinite()) break;
    const double norm = step.norm();
    if (norm > 2.0) step *= 2.0 / norm;
    const double r_norm = out.r.norm();
    bool accepted = false;
    double t = 1.0;
    for (int halving = 0; halving < 40; ++halving, t *= 0.5) {
      const Vec trial = out.z + t * step;
      const auto rt = f(trial);
      if (rt && rt->norm() < r_norm * (1.0 - 1e-4 * t)) {
        out.z = trial;
        out.r = *rt;
        accepted = true;
        break;
      }
    }
    out.iterations = it + 1;
    if (!accepted) break;
  }
  out.converged = max_abs(out.r) <= tol;
  return out;
}

// Bounded only through the parameter transform; invalid points score +inf.
Vec nelder_mead(const std::function<double(const Vec&)>& f, const Vec& start, double scale,
                std::size_t max_evals) {
  const auto n = start.size();
  std::vector<Vec> simplex(n + 1, start);
  std::vector<double> values(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) simplex[i + 1][i] += scale;
  for (std::size_t i = 0; i <= static_cast<std::size_t>(n); ++i) values[i] = f(simplex[i]);
  std::size_t evals = n + 1;
  std::vector<std::size_t> order(n + 1);
  while (evals < max_evals) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return values[a] < values[b]; });
    const std::size_t best = order.front(), worst = order.back(), second = order[n - 1];
    if (std::abs(values[worst] - values[best]) <= 1e-30 + 1e-15 * std::abs(values[best])) break;
    Vec centroid = Vec::Zero(n);
    for (std::size_t i = 0; i < static_cast<std::size_t>(n); ++i) centroid += simplex[order[i]];
    centroid /= static_cast<double>(n);
    const Vec reflected = centroid + (centroid - simplex[worst]);
    const double fr = f(reflected);
    ++evals;
    if (fr < values[best]) {
      const Vec expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = f(expanded);
      ++evals;
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
    } else if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
    } else {
      const Vec contracted = centroid + 0.5 * (simplex[worst] - centroid);
      const double fc = f(contracted);
      ++evals;
      if (fc < values[worst]) {
        simplex[worst] = contracted;
        values[worst] = fc;
      } else {
        for (std::size_t i = 0; i <= static_cast<std::size_t>(n); ++i) {
          if (i == best) continue;
          simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
          values[i] = f(simplex[i]);
          ++evals;
        }
      }
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  return simplex[static_cast<std::size_t>(it - values.begin())];
}

// Roots in zeta of g over a log grid of (zeta - lower bound), refined by TOMS 748.
std::vector<double> profile_roots(const std::function<std::optional<double>(double)>& g,
                                  double lower) {
  constexpr int kGrid = 25;
  std::vector<double> roots;
  std::optional<double> prev_value;
  double prev_zeta = 0.0;
  for (int i = 0; i < kGrid; ++i) {
    const double zeta = lower + std::pow(10.0, -3.0 + 6.0 * i / (kGrid - 1));
    const auto value = g(zeta);
    if (value && prev_value && (*value == 0.0 || (*value > 0.0) != (*prev_value > 0.0))) {
      auto fn = [&](double z) {
        const auto v = g(z);
        return v ? *v : std::numeric_limits<double>::quiet_NaN();
      };
      std::uintmax_t iters = 60;
      try {
        const auto bracket = boost::math::tools::toms748_solve(
            fn, prev_zeta, zeta, *prev_value, *value, boost::math::tools::eps_tolerance<double>(40),
            iters);
        roots.push_back(0.5 * (bracket.first + bracket.second));
      } catch (const std::exception&) {
      }
    }
    if (value) {
      prev_value = value;
      prev_zeta = zeta;
    }
  }
  return roots;
}

double solve_gamma_plus(double s_hat, const ModelFamily& family, std::vector<std::string>& notes) {
  const double target = divisor_factor(family.divisor) * s_hat / family.theta_plus;
  auto f = [&](double u) { return power_law_weight_sum(1.0 + std::exp(u), family.n) - target; };
  double lo = std::log(0.01), hi = std::log(1000.0);
  const double flo = f(lo), fhi = f(hi);
  if (!(flo > 0.0)) return 1.0 + std::exp(lo);
  if (fhi >= 0.0) {
    notes.push_back("mean edge count at or below the flat-degree limit; gamma_plus capped");
    return 1.0 + std::exp(hi);
  }
  std::uintmax_t iters = 100;
  const auto bracket = boost::math::tools::toms748_solve(
      f, lo, hi, flo, fhi, boost::math::tools::eps_tolerance<double>(52), iters);
  return 1.0 + std::exp(0.5 * (bracket.first + bracket.second));
}

}  // namespace

MomentStats compute_stats(std::span<const std::uint32_t> counts) {
  const std::size_t k = counts.size();
  if (k < 3) fail(ErrorCode::SeriesTooShort, "need at least three snapshots");
  std::uint64_t sum = 0, lag1 = 0, lag2 = 0;
  for (std::size_t i = 0; i < k; ++i) {
    sum += counts[i];
    if (i + 1 < k) lag1 += std::uint64_t{counts[i]} * counts[i + 1];
    if (i + 2 < k) lag2 += std::uint64_t{counts[i]} * counts[i + 2];
  }
  MomentStats stats;
  stats.k = k;
  stats.s_hat = static_cast<double>(sum) / static_cast<double>(k);
  const double s2 = stats.s_hat * stats.s_hat;
  stats.rho1_hat = static_cast<double>(lag1) / static_cast<double>(k - 1) - s2;
  stats.rho2_hat = static_cast<double>(lag2) / static_cast<double>(k - 2) - s2;
  return stats;
}

MomentStats compute_stats(const SnapshotSeries& series) { return compute_stats(series.counts); }

double theta_elimination(double s_hat, double gamma, std::size_t n, Divisor divisor) {
  return divisor_factor(divisor) * s_hat / power_law_weight_sum(gamma, n);
}

std::array<std::string, 3> parameter_names(const ModelFamily& family) {
  if (family.degrees == DegreeKind::InOut) return {"gamma_plus", "gamma_minus", "zeta"};
  return {"theta", "gamma", "zeta"};
}

double zeta_lower_bound(LifetimeKind law) noexcept {
  return law == LifetimeKind::Pareto ? 1.0 : 0.0;
}

GraphModelSpec make_spec(const ModelFamily& family, const ParamVector& p) {
  GraphModelSpec spec;
  if (family.degrees == DegreeKind::Symmetric) {
    spec.edges = DegreeModel::power_law(p[0], p[1], family.n, family.divisor).edges();
  } else {
    spec.edges =
        InOutDegreeModel::power_law(family.theta_plus, p[0], p[1], family.n, family.divisor).edges();
  }
  spec.binding = Binding{family.homogeneous, LifetimeDist::unit_family(family.law, p[2])};
  return spec;
}

Eigen::Vector3d y_functions(SchemeKind kind, double s, double rho1, double rho2) {
  if (kind == SchemeKind::Equidistant) return {s * s, s * s * rho1, s * s * rho2};
  return {s * s, rho1, rho2};
}

Eigen::Matrix3d y_jacobian(SchemeKind kind, double s, double rho1, double rho2) {
  Eigen::Matrix3d v = Eigen::Matrix3d::Zero();
  v(0, 0) = 2.0 * s;
  if (kind == SchemeKind::Equidistant) {
    v(1, 0) = 2.0 * s * rho1;
    v(1, 1) = s * s;
    v(2, 0) = 2.0 * s * rho2;
    v(2, 2) = s * s;
  } else {
    v(1, 1) = 1.0;
    v(2, 2) = 1.0;
  }
  return v;
}

Eigen::Vector3d x_functions(const ModelFamily& family, const SamplingScheme& scheme,
                            const ParamVector& params) {
  const auto spec = make_spec(family, params);
  const auto mv = model_moments(spec, scheme);
  return y_functions(mv.kind, mv.s, mv.rho1, mv.rho2);
}

Eigen::Matrix3d x_jacobian(const ModelFamily& family, const SamplingScheme& scheme,
                           const ParamVector& params) {
  Eigen::Matrix3d u;
  for (int j = 0; j < 3; ++j) {
    const double h = 1e-5 * (1.0 + std::abs(params[j]));
    ParamVector plus = params, minus = params;
    plus[j] += h;
    minus[j] -= h;
    u.col(j) = (x_functions(family, scheme, plus) - x_functions(family, scheme, minus)) / (2.0 * h);
  }
  return u;
}

EstimationResult solve_moments(const MomentStats& stats, const ModelFamily& family,
                               const SamplingScheme& scheme, const SolveOptions& options) {
  EstimationResult result;
  result.family = family;
  result.stats = stats;
  if (!std::isfinite(stats.s_hat) || !std::isfinite(stats.rho1_hat) ||
      !std::isfinite(stats.rho2_hat) || !(stats.s_hat > 0.0)) {
    fail(ErrorCode::InvalidParameter, "moment statistics must be finite with s_hat > 0");
  }
  if (!(stats.rho1_hat > 0.0)) result.notes.push_back("rho1_hat <= 0; solving anyway");
  if (!(stats.rho2_hat > 0.0)) result.notes.push_back("rho2_hat <= 0 (small-sample noise)");

  const SchemeKind kind = scheme_kind(scheme);
  const Eigen::Vector3d y = y_functions(kind, stats.s_hat, stats.rho1_hat, stats.rho2_hat);
  const Eigen::Vector3d scale = (Eigen::Vector3d::Ones().array() + y.array().abs()).matrix();
  const double lb = zeta_lower_bound(family.law);
  MomentSystem system(family, scheme);

  const bool symmetric = family.degrees == DegreeKind::Symmetric;
  const bool reduced = symmetric && !options.full_system;
  double gamma_plus_fixed = 0.0;
  if (!symmetric) gamma_plus_fixed = solve_gamma_plus(stats.s_hat, family, result.notes);

  // Parameters for a scan point (gamma_scan, zeta): theta eliminated for the
  // symmetric model, gamma_plus from the first equation for the in/out model.
  auto scan_params = [&](double gamma_scan, double zeta) -> ParamVector {
    if (symmetric) {
      return {theta_elimination(stats.s_hat, gamma_scan, family.n, family.divisor), gamma_scan, zeta};
    }
    return {gamma_plus_fixed, gamma_scan, zeta};
  };

  auto scaled = [&](const Eigen::Vector3d& x) -> Eigen::Vector3d {
    return ((x - y).array() / scale.array()).matrix();
  };

  // Unknowns in transformed coordinates.
  auto to_params = [&](const Vec& z) -> ParamVector {
    if (reduced) {
      const double gamma = 1.0 + std::exp(z[0]);
      return scan_params(gamma, lb + std::exp(z[1]));
    }
    if (symmetric) return {std::exp(z[0]), 1.0 + std::exp(z[1]), lb + std::exp(z[2])};
    return {1.0 + std::exp(z[0]), 1.0 + std::exp(z[1]), lb + std::exp(z[2])};
  };
  auto to_z = [&](const ParamVector& p) -> Vec {
    if (reduced) return Vec{{std::log(p[1] - 1.0), std::log(p[2] - lb)}};
    if (symmetric) return Vec{{std::log(p[0]), std::log(p[1] - 1.0), std::log(p[2] - lb)}};
    return Vec{{std::log(p[0] - 1.0), std::log(p[1] - 1.0), std::log(p[2] - lb)}};
  };
  Residual residual = [&](const Vec& z) -> std::optional<Vec> {
    const auto x = system.x(to_params(z));
    if (!x) return std::nullopt;
    const Eigen::Vector3d r = scaled(*x);
    if (reduced) return Vec{{r[1], r[2]}};
    return Vec(r);
  };

  ParamVector start{};
  if (options.initial) {
    start = *options.initial;
    if (!(start[1] > 1.0) || !(start[2] > lb) || (symmetric && !(start[0] > 0.0)) ||
        (!symmetric && !(start[0] > 1.0))) {
      fail(ErrorCode::OutOfBounds, "initial guess outside the parameter domain");
    }
    if (reduced) start = scan_params(start[1], start[2]);
  } else {
    // Coarse scan over gamma; zeta profiled to satisfy the second equation,
    // each candidate scored on the third.
    double best_score = kInf, fallback_score = kInf;
    ParamVector fallback{};
    bool found = false;
    const double lo = std::log(options.gamma_min - 1.0), hi = std::log(options.gamma_max - 1.0);
    for (std::size_t i = 0; i < options.gamma_grid; ++i) {
      const double t = options.gamma_grid == 1 ? 1.0 : static_cast<double>(i) / (options.gamma_grid - 1);
      const double gamma = 1.0 + std::exp(lo + t * (hi - lo));
      auto second_eq = [&](double zeta) -> std::optional<double> {
        const auto x = system.x(scan_params(gamma, zeta));
        if (!x) return std::nullopt;
        return scaled(*x)[1];
      };
      const auto roots = profile_roots(second_eq, lb);
      for (double zeta : roots) {
        const auto x = system.x(scan_params(gamma, zeta));
        if (!x) continue;
        const double score = std::abs(scaled(*x)[2]);
        if (score < best_score) {
          best_score = score;
          start = scan_params(gamma, zeta);
          found = true;
        }
      }
      if (!found) {
        for (double zeta : {lb + 0.1, lb + 1.0, lb + 10.0}) {
          const auto x = system.x(scan_params(gamma, zeta));
          if (!x) continue;
          const double score = scaled(*x).tail<2>().squaredNorm();
          if (score < fallback_score) {
            fallback_score = score;
            fallback = scan_params(gamma, zeta);
          }
        }
      }
    }
    if (!found) {
      if (!std::isfinite(fallback_score)) {
        fail(ErrorCode::OutOfBounds, "no admissible parameter point found in the scan range");
      }
      start = fallback;
      result.notes.push_back("initial scan found no root of the second equation");
    }
  }

  Vec z0 = to_z(start);
  auto r0 = residual(z0);
  if (!r0) fail(ErrorCode::OutOfBounds, "initial point is not an admissible model");
  auto outcome = damped_newton(residual, z0, *r0, options.max_iterations, options.tolerance);
  if (!outcome.converged) {
    result.solver.used_fallback = true;
    auto objective = [&](const Vec& z) {
      const auto r = residual(z);
      return r ? r->squaredNorm() : kInf;
    };
    const Vec polished = nelder_mead(objective, outcome.z, 0.1, 2000);
    if (auto rp = residual(polished)) {
      auto second = damped_newton(residual, polished, *rp, options.max_iterations, options.tolerance);
      second.iterations += outcome.iterations;
      if (second.r.norm() <= outcome.r.norm()) outcome = second;
    }
  }
  result.params = to_params(outcome.z);
  result.solver.iterations = outcome.iterations;
  result.solver.converged = outcome.converged;
  // Residual norm reported in unscaled units of the moment equations.
  if (auto x = system.x(result.params)) {
    result.solver.residual_norm = (*x - y).norm();
    if (!reduced) {
      result.solver.converged =
          result.solver.converged &&
          ((*x - y).array().abs() <= options.tolerance * scale.array()).all();
    }
  }
  if (!result.solver.converged) result.notes.push_back("NonConvergence: best iterate returned");
  return result;
}

Eigen::Matrix3d delta_method_cov(const ParamVector& params, const ModelFamily& family,
                                 const SamplingScheme& scheme, const Eigen::Matrix3d& sigma) {
  const Eigen::Matrix3d u = x_jacobian(family, scheme, params);
  const Eigen::JacobiSVD<Eigen::Matrix3d> svd(u);
  const auto sv = svd.singularValues();
  const double cond = sv[2] > 0.0 ? sv[0] / sv[2] : kInf;
  if (!(cond <= 1e12)) {
    std::ostringstream os;
    os << "condition number of U is " << cond;
    fail(ErrorCode::SingularJacobian, os.str());
  }
  const auto mv = model_moments(make_spec(family, params), scheme);
  const Eigen::Matrix3d v = y_jacobian(mv.kind, mv.s, mv.rho1, mv.rho2);
  const Eigen::Matrix3d m = u.partialPivLu().solve(v);
  return m * sigma * m.transpose();
}

Eigen::Matrix3d empirical_sigma(std::span<const MomentStats> stats, std::size_t k) {
  if (stats.size() < 2) fail(ErrorCode::TooFewRuns, "need at least two runs");
  const auto n = static_cast<double>(stats.size());
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& s : stats) mean += Eigen::Vector3d(s.s_hat, s.rho1_hat, s.rho2_hat);
  mean /= n;
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  for (const auto& s : stats) {
    const Eigen::Vector3d d = Eigen::Vector3d(s.s_hat, s.rho1_hat, s.rho2_hat) - mean;
    cov += d * d.transpose();
  }
  return cov * (static_cast<double>(k) / (n - 1.0));
}

nlohmann::json to_json(const EstimationResult& result) {
  nlohmann::json j;
  const auto names = parameter_names(result.family);
  for (int i = 0; i < 3; ++i) j[names[i] + "_hat"] = result.params[i];
  j["converged"] = result.solver.converged;
  j["residual"] = result.solver.residual_norm;
  j["iterations"] = result.solver.iterations;
  j["used_fallback"] = result.solver.used_fallback;
  j["s_hat"] = result.stats.s_hat;
  j["rho1_hat"] = result.stats.rho1_hat;
  j["rho2_hat"] = result.stats.rho2_hat;
  j["k"] = result.stats.k;
  if (result.cov) {
    for (int r = 0; r < 3; ++r) {
      for (int c = 0; c < 3; ++c) {
        j["cov_" + std::to_string(r + 1) + std::to_string(c + 1)] = (*result.cov)(r, c);
      }
    }
  }
  j["notes"] = result.notes;
  return j;
}

}  // namespace dclg
