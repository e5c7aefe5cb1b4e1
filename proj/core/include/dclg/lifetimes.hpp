#pragma once

#include <string>
#include <variant>

#include "dclg/rng.hpp"

namespace dclg {

enum class LifetimeKind { Exponential, Weibull, Pareto };

// P(Z > t) = exp(-rate t)
struct Exponential {
  double rate;
};

// P(Z > t) = exp(-scale t^shape)
struct Weibull {
  double scale;
  double shape;
};

// P(Z > t) = scale^shape / (scale + t)^shape, shape > 1
struct Pareto {
  double scale;
  double shape;
};

// An on- or off-time law. Immutable; evaluation is thread-safe. Transform
// evaluations that need quadrature throw QuadratureFailure if the absolute
// error estimate exceeds kQuadratureTolerance.
class LifetimeDist {
 public:
  using Params = std::variant<Exponential, Weibull, Pareto>;

  static constexpr double kQuadratureTolerance = 1e-10;

  static LifetimeDist exponential(double rate);
  static LifetimeDist weibull(double scale, double shape);
  // Throws InfiniteMean when shape <= 1.
  static LifetimeDist pareto(double scale, double shape);

  // The single-parameter families used for estimation: Exp(zeta),
  // Weibull(1, zeta), Pareto(1, zeta).
  static LifetimeDist unit_family(LifetimeKind kind, double zeta);

  LifetimeKind kind() const noexcept;
  const Params& params() const noexcept { return params_; }

  double mean() const noexcept { return mean_; }
  // E[Z^2]; +inf for Pareto with shape <= 2.
  double second_moment() const noexcept;

  // E exp(-s Z), s >= 0.
  double lst(double s) const;
  // d/ds E exp(-s Z), s > 0.
  double lst_derivative(double s) const;
  // Transform of the residual-lifetime density (1 - F(t)) / mean, s > 0.
  double residual_lst(double s) const;

  // Inverse-CDF draw.
  double sample(Rng& rng) const;
  // Draw from the residual-lifetime density; throws InversionFailure.
  double sample_residual(Rng& rng) const;

  std::string describe() const;

 private:
  explicit LifetimeDist(Params params);

  Params params_;
  double mean_ = 0.0;
};

namespace detail {

// alpha C^alpha e^{sC} s^alpha Gamma(sC, -alpha) with the exponential folded
// into the integrand; valid for any alpha > 0.
double pareto_lst(double scale, double shape, double s);

}  // namespace detail

}  // namespace dclg
