#include "dclg/degree_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dclg/error.hpp"
#include "dclg/numeric.hpp"

namespace dclg {
namespace {

constexpr double kClampSlack = 1e-12;

void check_power_law(double theta, double gamma, std::size_t n, const char* who) {
  if (!(theta > 0.0) || !std::isfinite(theta)) {
    std::ostringstream os;
    os << who << ": theta must be positive and finite, got " << theta;
    fail(ErrorCode::InvalidParameter, os.str());
  }
  if (!(gamma > 1.0) || !std::isfinite(gamma)) {
    std::ostringstream os;
    os << who << ": gamma must exceed 1, got " << gamma;
    fail(ErrorCode::InvalidParameter, os.str());
  }
  if (n == 0) fail(ErrorCode::InvalidParameter, std::string(who) + ": n must be positive");
}

// Builds e_ij = out_i in_j / scale, clamping rounding slack above one.
EdgeProbabilities build_edges(std::span<const double> out, std::span<const double> in,
                              double scale) {
  const std::size_t n = out.size();
  std::vector<double> values(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      double e = out[i] * in[j] / scale;
      if (!std::isfinite(e) || e > 1.0 + kClampSlack) {
        std::ostringstream os;
        os << "e(" << i << ", " << j << ") = " << e << " exceeds 1";
        fail(ErrorCode::EdgeProbabilityOverflow, os.str());
      }
      values[i * n + j] = std::min(e, 1.0);
    }
  }
  return EdgeProbabilities(n, std::move(values));
}

double compensated_total(std::span<const double> xs) {
  CompensatedSum acc;
  for (double x : xs) acc += x;
  return acc.value();
}

}  // namespace

EdgeProbabilities::EdgeProbabilities(std::size_t n, std::vector<double> values)
    : n_(n), values_(std::move(values)) {
  if (values_.size() != n_ * n_) {
    fail(ErrorCode::InvalidParameter, "edge probability matrix must be n x n");
  }
  total_ = compensated_total(values_);
}

double EdgeProbabilities::at(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) {
    std::ostringstream os;
    os << "vertex pair (" << i << ", " << j << ") outside [0, " << n_ << ")";
    fail(ErrorCode::IndexOutOfRange, os.str());
  }
  return (*this)(i, j);
}

double power_law_weight_sum(double gamma, std::size_t n) {
  const double exponent = -1.0 / (gamma - 1.0);
  const double nn = static_cast<double>(n);
  CompensatedSum acc;
  for (std::size_t k = 1; k <= n; ++k) acc += std::pow(static_cast<double>(k) / nn, exponent);
  return acc.value();
}

std::vector<double> power_law_degrees(double theta, double gamma, std::size_t n) {
  const double exponent = -1.0 / (gamma - 1.0);
  const double nn = static_cast<double>(n);
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = theta * std::pow(static_cast<double>(i + 1) / nn, exponent);
  }
  return d;
}

DegreeModel DegreeModel::power_law(double theta, double gamma, std::size_t n, Divisor divisor) {
  check_power_law(theta, gamma, n, "DegreeModel::power_law");
  DegreeModel model;
  model.theta_ = theta;
  model.gamma_ = gamma;
  model.divisor_ = divisor;
  model.degrees_ = power_law_degrees(theta, gamma, n);
  model.m_ = compensated_total(model.degrees_);
  model.edges_ = build_edges(model.degrees_, model.degrees_, divisor_factor(divisor) * model.m_);
  return model;
}

InOutDegreeModel InOutDegreeModel::power_law(double theta_plus, double gamma_plus,
                                             double gamma_minus, std::size_t n, Divisor divisor) {
  check_power_law(theta_plus, gamma_plus, n, "InOutDegreeModel::power_law");
  check_power_law(1.0, gamma_minus, n, "InOutDegreeModel::power_law");
  InOutDegreeModel model;
  model.theta_plus_ = theta_plus;
  model.gamma_plus_ = gamma_plus;
  model.gamma_minus_ = gamma_minus;
  model.divisor_ = divisor;
  model.theta_minus_ = power_law_weight_sum(gamma_plus, n) * theta_plus /
                       power_law_weight_sum(gamma_minus, n);
  model.out_degrees_ = power_law_degrees(theta_plus, gamma_plus, n);
  model.in_degrees_ = power_law_degrees(model.theta_minus_, gamma_minus, n);
  model.m_ = compensated_total(model.out_degrees_);
  model.edges_ =
      build_edges(model.out_degrees_, model.in_degrees_, divisor_factor(divisor) * model.m_);
  return model;
}

}  // namespace dclg
