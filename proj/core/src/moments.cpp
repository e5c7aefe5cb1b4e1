#include "dclg/moments.hpp"

#include <cmath>
#include <sstream>

#include "dclg/error.hpp"
#include "dclg/numeric.hpp"

namespace dclg {
namespace {

constexpr double kClipBelow = -1e-9;

LawTransforms exponential_transforms(double rate, double xi) {
  const double d = rate + xi;
  LawTransforms t;
  t.lst = rate / d;
  t.dlst = -rate / (d * d);
  t.res_lst = t.lst;
  t.dres_lst = t.dlst;
  t.mean = 1.0 / rate;
  return t;
}

double clip_covariance(double rho, double e) {
  if (rho >= 0.0) return rho;
  if (rho < kClipBelow) {
    std::ostringstream os;
    os << "covariance " << rho << " for edge with e = " << e;
    fail(ErrorCode::NegativeCovariance, os.str());
  }
  return 0.0;
}

LawTransforms derived_transforms(const Binding& binding, double e, double xi) {
  return exponential_transforms(derived_rate(binding, e), xi);
}

}  // namespace

SchemeKind scheme_kind(const SamplingScheme& scheme) noexcept {
  return std::holds_alternative<Equidistant>(scheme) ? SchemeKind::Equidistant
                                                     : SchemeKind::Poisson;
}

double exp_switching_rate(const Binding& binding, double e) {
  const double derived = derived_rate(binding, e);
  return binding.homogeneous == Side::On ? derived / e : derived / (1.0 - e);
}

double rho_delta_exp(const GraphModelSpec& spec, double lag) {
  if (!is_exp_exp(spec.binding)) {
    fail(ErrorCode::WrongFamily, "deterministic-lag covariance needs exponential lifetimes");
  }
  CompensatedSum acc;
  for (double e : spec.edges.values()) {
    acc += e * (1.0 - e) * std::exp(-exp_switching_rate(spec.binding, e) * lag);
  }
  return acc.value();
}

AbMoments moment_functions_ab(double theta, double gamma, double mu, double delta,
                              std::size_t n) {
  const double exponent = -1.0 / (gamma - 1.0);
  const double nn = static_cast<double>(n);
  CompensatedSum s_acc;
  for (std::size_t i = 1; i <= n; ++i) s_acc += theta * std::pow(static_cast<double>(i) / nn, exponent);
  const double s = s_acc.value();
  CompensatedSum a, b1, b2;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= n; ++j) {
      const double h = std::pow(static_cast<double>(i * j) / (nn * nn), exponent);
      const double w = theta * theta * h;
      const double rest = s - w;
      a += w;
      b1 += w * rest * std::exp(-mu * s / rest * delta);
      b2 += w * rest * std::exp(-mu * s / rest * 2.0 * delta);
    }
  }
  return {a.value(), b1.value(), b2.value()};
}

FreshProbabilities p_fresh(double on_lst, double off_lst) {
  const double denom = 1.0 - on_lst * off_lst;
  return {(1.0 - on_lst) / denom, (1.0 - off_lst) / denom};
}

LawTransforms law_transforms(const LifetimeDist& law, double xi) {
  if (const auto* ex = std::get_if<Exponential>(&law.params())) {
    return exponential_transforms(ex->rate, xi);
  }
  LawTransforms t;
  t.lst = law.lst(xi);
  t.dlst = law.lst_derivative(xi);
  t.res_lst = law.residual_lst(xi);
  t.mean = law.mean();
  // d/dxi (1 - F) / (xi f) = -F' / (xi f) - F_res / xi
  t.dres_lst = -t.dlst / (xi * t.mean) - t.res_lst / xi;
  return t;
}

EdgeCovariance edge_covariance_t_xi(double e, const LawTransforms& on, const LawTransforms& off) {
  const double f = on.lst;
  const double g = off.lst;
  const double denom = 1.0 - f * g;
  const double p_mm = (1.0 - g) / denom;
  const double dp_mm = (-off.dlst * denom + (1.0 - g) * (on.dlst * g + f * off.dlst)) /
                       (denom * denom);
  const double p_res = 1.0 - p_mm * on.res_lst;
  const double dp_res = -(dp_mm * on.res_lst + p_mm * on.dres_lst);
  return {clip_covariance(e * (p_res - e), e), e * dp_res};
}

double p_res_plus_plus(const LifetimeDist& on, const LifetimeDist& off, double xi) {
  if (!(xi > 0.0)) fail(ErrorCode::InvalidParameter, "xi must be positive");
  const auto t_on = law_transforms(on, xi);
  const auto t_off = law_transforms(off, xi);
  const auto fresh = p_fresh(t_on.lst, t_off.lst);
  return 1.0 - fresh.minus_minus * t_on.res_lst;
}

double rho_T_xi(double e, const LifetimeDist& on, const LifetimeDist& off, double xi) {
  if (!(xi > 0.0)) fail(ErrorCode::InvalidParameter, "xi must be positive");
  return edge_covariance_t_xi(e, law_transforms(on, xi), law_transforms(off, xi)).rho;
}

double rho_T_xi_derivative(double e, const LifetimeDist& on, const LifetimeDist& off, double xi) {
  if (!(xi > 0.0)) fail(ErrorCode::InvalidParameter, "xi must be positive");
  return edge_covariance_t_xi(e, law_transforms(on, xi), law_transforms(off, xi)).drho;
}

double rho_erlang2(double e, const LifetimeDist& on, const LifetimeDist& off, double xi) {
  if (!(xi > 0.0)) fail(ErrorCode::InvalidParameter, "xi must be positive");
  const auto c = edge_covariance_t_xi(e, law_transforms(on, xi), law_transforms(off, xi));
  // Can be slightly negative when the lifetimes are more regular than exponential.
  return c.rho - xi * c.drho;
}

MomentVector model_moments(const GraphModelSpec& spec, const SamplingScheme& scheme,
                           const LawTransforms* homogeneous) {
  validate_scheme(scheme);
  MomentVector out;
  out.s = spec.edges.total();
  out.kind = scheme_kind(scheme);
  if (const auto* eq = std::get_if<Equidistant>(&scheme)) {
    if (!is_exp_exp(spec.binding)) {
      fail(ErrorCode::WrongFamily,
           "equidistant sampling has closed-form moments only for exponential lifetimes");
    }
    CompensatedSum r1, r2;
    for (double e : spec.edges.values()) {
      const double var = e * (1.0 - e);
      const double decay = std::exp(-exp_switching_rate(spec.binding, e) * eq->delta);
      r1 += var * decay;
      r2 += var * decay * decay;
    }
    out.rho1 = r1.value();
    out.rho2 = r2.value();
    return out;
  }
  const double xi = std::get<PoissonTimes>(scheme).xi;
  const LawTransforms fixed = homogeneous ? *homogeneous : law_transforms(spec.binding.law, xi);
  CompensatedSum r1, r2;
  for (double e : spec.edges.values()) {
    const LawTransforms derived = derived_transforms(spec.binding, e, xi);
    const bool on_fixed = spec.binding.homogeneous == Side::On;
    const auto c = edge_covariance_t_xi(e, on_fixed ? fixed : derived, on_fixed ? derived : fixed);
    r1 += c.rho;
    r2 += c.rho - xi * c.drho;
  }
  out.rho1 = r1.value();
  out.rho2 = r2.value();
  return out;
}

}  // namespace dclg
