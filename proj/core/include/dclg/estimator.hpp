#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dclg/degree_model.hpp"
#include "dclg/graph_sim.hpp"
#include "dclg/lifetimes.hpp"
#include "dclg/moments.hpp"

namespace dclg {

// Sample mean and lag-1 / lag-2 product-moment covariances of a series:
//   s_hat    = (1/K) sum S_k
//   rho1_hat = (1/(K-1)) sum S_k S_{k+1} - s_hat^2
//   rho2_hat = (1/(K-2)) sum S_k S_{k+2} - s_hat^2
struct MomentStats {
  double s_hat = 0.0;
  double rho1_hat = 0.0;
  double rho2_hat = 0.0;
  std::size_t k = 0;
};

// Throws SeriesTooShort when fewer than three snapshots are given.
MomentStats compute_stats(std::span<const std::uint32_t> counts);
MomentStats compute_stats(const SnapshotSeries& series);

// theta such that the symmetric power-law model with (theta, gamma) has
// stationary mean edge count s_hat.
double theta_elimination(double s_hat, double gamma, std::size_t n, Divisor divisor = Divisor::M);

enum class DegreeKind { Symmetric, InOut };

// The parametric model being estimated. For the symmetric degree model the
// parameters are (theta, gamma, zeta); for the in/out model they are
// (gamma_plus, gamma_minus, zeta) with theta_plus known. zeta is the single
// parameter of the homogeneous law: Exp(zeta), Weibull(1, zeta) or
// Pareto(1, zeta).
struct ModelFamily {
  DegreeKind degrees = DegreeKind::Symmetric;
  Side homogeneous = Side::On;
  LifetimeKind law = LifetimeKind::Exponential;
  std::size_t n = 20;
  Divisor divisor = Divisor::M;
  double theta_plus = 1.0;
};

using ParamVector = std::array<double, 3>;

std::array<std::string, 3> parameter_names(const ModelFamily& family);
// Builds the generative model; throws on inadmissible parameters.
GraphModelSpec make_spec(const ModelFamily& family, const ParamVector& params);
// zeta must exceed this bound (1 for Pareto, 0 otherwise).
double zeta_lower_bound(LifetimeKind law) noexcept;

struct SolveOptions {
  std::optional<ParamVector> initial;
  std::size_t max_iterations = 100;
  double tolerance = 1e-9;
  double gamma_min = 1.2;
  double gamma_max = 8.0;
  std::size_t gamma_grid = 40;
  // Solve all three equations in (theta, gamma, zeta) instead of eliminating
  // theta. The in/out model always uses three equations.
  bool full_system = false;
};

struct SolverDiagnostics {
  std::size_t iterations = 0;
  double residual_norm = 0.0;
  bool converged = false;
  bool used_fallback = false;
};

struct EstimationResult {
  ModelFamily family;
  ParamVector params{};
  MomentStats stats;
  SolverDiagnostics solver;
  std::optional<Eigen::Matrix3d> cov;
  std::vector<std::string> notes;
};

// Model-side moment functions x(params): (s^2, s^2 rho1, s^2 rho2) under
// equidistant sampling and (s^2, rho1, rho2) under Poisson sampling.
Eigen::Vector3d x_functions(const ModelFamily& family, const SamplingScheme& scheme,
                            const ParamVector& params);
// Statistic-side functions y(s, rho1, rho2) of the same shape.
Eigen::Vector3d y_functions(SchemeKind kind, double s, double rho1, double rho2);
// Analytic Jacobian of y with respect to (s, rho1, rho2).
Eigen::Matrix3d y_jacobian(SchemeKind kind, double s, double rho1, double rho2);
// Central-difference Jacobian of x with respect to the parameters, with
// per-parameter steps h = 1e-5 (1 + |p|).
Eigen::Matrix3d x_jacobian(const ModelFamily& family, const SamplingScheme& scheme,
                           const ParamVector& params);

// Solves x(params) = y(stats). Never throws for non-convergence: the best
// iterate is returned with solver.converged = false.
EstimationResult solve_moments(const MomentStats& stats, const ModelFamily& family,
                               const SamplingScheme& scheme, const SolveOptions& options = {});

// U^-1 V Sigma (U^-1 V)^T, the asymptotic covariance of sqrt(K)(params_hat - params).
// Throws SingularJacobian when cond(U) > 1e12.
Eigen::Matrix3d delta_method_cov(const ParamVector& params, const ModelFamily& family,
                                 const SamplingScheme& scheme, const Eigen::Matrix3d& sigma);

// K times the across-run sample covariance of (s_hat, rho1_hat, rho2_hat).
Eigen::Matrix3d empirical_sigma(std::span<const MomentStats> stats, std::size_t k);

nlohmann::json to_json(const EstimationResult& result);

}  // namespace dclg
