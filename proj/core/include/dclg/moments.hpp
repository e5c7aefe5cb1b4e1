#pragma once

#include <cstddef>

#include "dclg/graph_sim.hpp"

namespace dclg {

enum class SchemeKind { Equidistant, Poisson };

SchemeKind scheme_kind(const SamplingScheme& scheme) noexcept;

// Stationary mean and the two covariance statistics, summed over edges:
// (rho[delta], rho[2 delta]) for equidistant sampling and
// (rho(T_xi), rho(E_{xi,2})) for Poisson sampling.
struct MomentVector {
  double s = 0.0;
  double rho1 = 0.0;
  double rho2 = 0.0;
  SchemeKind kind = SchemeKind::Equidistant;
};

// Total switching rate off_rate + on_rate of an exp/exp edge; the per-edge
// covariance at lag t is e (1 - e) exp(-rate t).
double exp_switching_rate(const Binding& binding, double e);

// sum_ij e_ij (1 - e_ij) exp(-rate_ij lag). Throws WrongFamily unless both
// lifetimes are exponential.
double rho_delta_exp(const GraphModelSpec& spec, double lag);

// Left-hand sides of the equidistant moment conditions, by direct double
// summation over H_ij = (ij / N^2)^(-1/(gamma-1)) for the symmetric power law
// with homogeneous Exp(mu) on-times:
//   a  = sum theta^2 H_ij                                  (= s^2)
//   b1 = sum theta^2 H_ij (s - theta^2 H_ij) exp(-mu s delta / (s - theta^2 H_ij))
//   b2 = same at lag 2 delta
struct AbMoments {
  double a = 0.0;
  double b1 = 0.0;
  double b2 = 0.0;
};
AbMoments moment_functions_ab(double theta, double gamma, double mu, double delta, std::size_t n);

// Probability of being on (resp. off) after an Exp(xi) time, starting from a
// fresh on- (resp. off-) time, given the transform values F(xi) and G(xi).
struct FreshProbabilities {
  double plus_plus = 0.0;
  double minus_minus = 0.0;
};
FreshProbabilities p_fresh(double on_lst, double off_lst);

// Transform values of one law at xi, including the residual-lifetime transform
// and the xi-derivatives of both.
struct LawTransforms {
  double lst = 1.0;
  double dlst = 0.0;
  double res_lst = 1.0;
  double dres_lst = 0.0;
  double mean = 1.0;
};
LawTransforms law_transforms(const LifetimeDist& law, double xi);

// Probability of being on after Exp(xi), starting from a residual on-time.
double p_res_plus_plus(const LifetimeDist& on, const LifetimeDist& off, double xi);

// Per-edge covariance over an Exp(xi) lag and its xi-derivative.
struct EdgeCovariance {
  double rho = 0.0;
  double drho = 0.0;
};
EdgeCovariance edge_covariance_t_xi(double e, const LawTransforms& on, const LawTransforms& off);

double rho_T_xi(double e, const LifetimeDist& on, const LifetimeDist& off, double xi);
// Analytic d/dxi of rho_T_xi.
double rho_T_xi_derivative(double e, const LifetimeDist& on, const LifetimeDist& off, double xi);
// rho(E_{xi,2}) = rho(T_xi) - xi d/dxi rho(T_xi)
double rho_erlang2(double e, const LifetimeDist& on, const LifetimeDist& off, double xi);

// Moment vector of the model under the scheme. When `homogeneous` is given it
// must equal law_transforms(spec.binding.law, xi); this lets callers reuse
// quadrature results across edge configurations.
MomentVector model_moments(const GraphModelSpec& spec, const SamplingScheme& scheme,
                           const LawTransforms* homogeneous = nullptr);

}  // namespace dclg
