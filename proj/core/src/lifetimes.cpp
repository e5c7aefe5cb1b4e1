#include "dclg/lifetimes.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "dclg/error.hpp"

namespace dclg {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

boost::math::quadrature::exp_sinh<double>& half_line() {
  thread_local boost::math::quadrature::exp_sinh<double> integrator(12);
  return integrator;
}

template <class F>
double integrate_half_line(const F& f, const char* what) {
  double error = 0.0;
  double l1 = 0.0;
  double value = 0.0;
  try {
    value = half_line().integrate(f, 1e-13, &error, &l1, nullptr);
  } catch (const std::exception& e) {
    fail(ErrorCode::QuadratureFailure, std::string(what) + ": " + e.what());
  }
  if (!std::isfinite(value) || error > LifetimeDist::kQuadratureTolerance) {
    std::ostringstream os;
    os << what << ": estimated error " << error << " above tolerance "
       << LifetimeDist::kQuadratureTolerance;
    fail(ErrorCode::QuadratureFailure, os.str());
  }
  return value;
}

void require_positive(double x, const char* name) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    std::ostringstream os;
    os << name << " must be positive and finite, got " << x;
    fail(ErrorCode::InvalidParameter, os.str());
  }
}

// Weibull transforms are integrated over v = scale t^shape, which removes the
// t^(shape-1) endpoint singularity for shape < 1.
double weibull_lst(const Weibull& w, double s) {
  const double inv_shape = 1.0 / w.shape;
  return integrate_half_line(
      [&](double v) { return std::exp(-v - s * std::pow(v / w.scale, inv_shape)); },
      "Weibull transform");
}

double weibull_lst_derivative(const Weibull& w, double s) {
  const double inv_shape = 1.0 / w.shape;
  return -integrate_half_line(
      [&](double v) {
        const double t = std::pow(v / w.scale, inv_shape);
        const double g = std::exp(-v - s * t);
        return g == 0.0 ? 0.0 : t * g;
      },
      "Weibull transform derivative");
}

// int_0^inf e^{-st} P(Z > t) dt
double weibull_tail_transform(const Weibull& w, double s) {
  return integrate_half_line(
      [&](double t) { return std::exp(-s * t - w.scale * std::pow(t, w.shape)); },
      "Weibull residual transform");
}

}  // namespace

namespace detail {

double pareto_lst(double scale, double shape, double s) {
  if (s == 0.0) return 1.0;
  const double x = s * scale;
  // alpha x^alpha int_0^inf (x + u)^(-alpha-1) e^-u du
  const double integral = integrate_half_line(
      [&](double u) { return std::pow(1.0 + u / x, -shape - 1.0) * std::exp(-u); },
      "Pareto transform");
  return shape * integral / x;
}

}  // namespace detail

LifetimeDist::LifetimeDist(Params params) : params_(params) {
  mean_ = std::visit(overloaded{
                         [](const Exponential& e) { return 1.0 / e.rate; },
                         [](const Weibull& w) {
                           return std::pow(w.scale, -1.0 / w.shape) * std::tgamma(1.0 + 1.0 / w.shape);
                         },
                         [](const Pareto& p) { return p.scale / (p.shape - 1.0); },
                     },
                     params_);
}

LifetimeDist LifetimeDist::exponential(double rate) {
  require_positive(rate, "exponential rate");
  return LifetimeDist(Exponential{rate});
}

LifetimeDist LifetimeDist::weibull(double scale, double shape) {
  require_positive(scale, "Weibull scale");
  require_positive(shape, "Weibull shape");
  return LifetimeDist(Weibull{scale, shape});
}

LifetimeDist LifetimeDist::pareto(double scale, double shape) {
  require_positive(scale, "Pareto scale");
  if (!(shape > 1.0) || !std::isfinite(shape)) {
    std::ostringstream os;
    os << "Pareto shape " << shape << " gives an infinite mean";
    fail(ErrorCode::InfiniteMean, os.str());
  }
  return LifetimeDist(Pareto{scale, shape});
}

LifetimeDist LifetimeDist::unit_family(LifetimeKind kind, double zeta) {
  switch (kind) {
    case LifetimeKind::Exponential: return exponential(zeta);
    case LifetimeKind::Weibull: return weibull(1.0, zeta);
    case LifetimeKind::Pareto: return pareto(1.0, zeta);
  }
  fail(ErrorCode::InvalidParameter, "unknown lifetime family");
}

LifetimeKind LifetimeDist::kind() const noexcept {
  return static_cast<LifetimeKind>(params_.index());
}

double LifetimeDist::second_moment() const noexcept {
  return std::visit(
      overloaded{
          [](const Exponential& e) { return 2.0 / (e.rate * e.rate); },
          [](const Weibull& w) {
            return std::pow(w.scale, -2.0 / w.shape) * std::tgamma(1.0 + 2.0 / w.shape);
          },
          [](const Pareto& p) {
            if (p.shape <= 2.0) return std::numeric_limits<double>::infinity();
            return 2.0 * p.scale * p.scale / ((p.shape - 1.0) * (p.shape - 2.0));
          },
      },
      params_);
}

double LifetimeDist::lst(double s) const {
  if (s < 0.0) fail(ErrorCode::InvalidParameter, "transform argument must be nonnegative");
  if (s == 0.0) return 1.0;
  return std::visit(overloaded{
                        [&](const Exponential& e) { return e.rate / (e.rate + s); },
                        [&](const Weibull& w) { return weibull_lst(w, s); },
                        [&](const Pareto& p) { return detail::pareto_lst(p.scale, p.shape, s); },
                    },
                    params_);
}

double LifetimeDist::lst_derivative(double s) const {
  if (!(s > 0.0)) fail(ErrorCode::InvalidParameter, "transform derivative needs s > 0");
  return std::visit(overloaded{
                        [&](const Exponential& e) {
                          const double d = e.rate + s;
                          return -e.rate / (d * d);
                        },
                        [&](const Weibull& w) { return weibull_lst_derivative(w, s); },
                        [&](const Pareto& p) {
                          // G' = C G + (alpha/s) G - alpha/s
                          const double g = detail::pareto_lst(p.scale, p.shape, s);
                          return p.scale * g + p.shape / s * g - p.shape / s;
                        },
                    },
                    params_);
}

// Equal to (1 - lst(s)) / (s mean); evaluated from the tail integral so that
// small s does not cancel.
double LifetimeDist::residual_lst(double s) const {
  if (!(s > 0.0)) fail(ErrorCode::InvalidParameter, "residual transform needs s > 0");
  return std::visit(
      overloaded{
          [&](const Exponential& e) { return e.rate / (e.rate + s); },
          [&](const Weibull& w) { return weibull_tail_transform(w, s) / mean_; },
          [&](const Pareto& p) { return detail::pareto_lst(p.scale, p.shape - 1.0, s); },
      },
      params_);
}

double LifetimeDist::sample(Rng& rng) const {
  const double u = rng.uniform_pos();
  return std::visit(overloaded{
                        [&](const Exponential& e) { return -std::log(u) / e.rate; },
                        [&](const Weibull& w) {
                          return std::pow(-std::log(u) / w.scale, 1.0 / w.shape);
                        },
                        [&](const Pareto& p) {
                          return p.scale * (std::pow(u, -1.0 / p.shape) - 1.0);
                        },
                    },
                    params_);
}

double LifetimeDist::sample_residual(Rng& rng) const {
  return std::visit(
      overloaded{
          [&](const Exponential&) { return sample(rng); },
          [&](const Weibull& w) {
            // 1 - H(t) = Q(1/shape, scale t^shape)
            const double u = rng.uniform_pos();
            double v = 0.0;
            try {
              v = boost::math::gamma_q_inv(1.0 / w.shape, u);
            } catch (const std::exception& ex) {
              fail(ErrorCode::InversionFailure, ex.what());
            }
            if (!std::isfinite(v)) fail(ErrorCode::InversionFailure, "residual quantile not finite");
            return std::pow(v / w.scale, 1.0 / w.shape);
          },
          [&](const Pareto& p) {
            const double u = rng.uniform_pos();
            return p.scale * (std::pow(u, -1.0 / (p.shape - 1.0)) - 1.0);
          },
      },
      params_);
}

std::string LifetimeDist::describe() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const Exponential& e) { os << "Exp(" << e.rate << ")"; },
                 [&](const Weibull& w) { os << "Weibull(" << w.scale << ", " << w.shape << ")"; },
                 [&](const Pareto& p) { os << "Pareto(" << p.scale << ", " << p.shape << ")"; },
             },
             params_);
  return os.str();
}

}  // namespace dclg
