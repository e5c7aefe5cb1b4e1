#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "dclg/degree_model.hpp"
#include "dclg/error.hpp"

using namespace dclg;

namespace {

// Plain re-derivation of the degree sequence, independent of the library.
double oracle_m(double theta, double gamma, int n) {
  long double m = 0;
  for (int i = 1; i <= n; ++i) m += theta * std::pow(static_cast<long double>(i) / n, -1.0L / (gamma - 1.0L));
  return static_cast<double>(m);
}

}  // namespace

TEST(DegreeModel, PowerLawN20) {
  const auto model = DegreeModel::power_law(1.0, 3.0, 20);
  EXPECT_NEAR(model.degrees()[0], std::sqrt(20.0), 1e-12);
  EXPECT_NEAR(model.degrees()[19], 1.0, 1e-15);
  EXPECT_NEAR(model.m(), 33.97, 0.005);
  EXPECT_NEAR(model.m(), oracle_m(1.0, 3.0, 20), 1e-12);
  EXPECT_NEAR(model.edge_probability(0, 0), 20.0 / model.m(), 1e-14);
  EXPECT_NEAR(model.edge_probability(0, 0), 0.5888, 2e-4);
  EXPECT_NEAR(model.edge_probability(19, 19), 1.0 / 33.97, 1e-4);
}

TEST(DegreeModel, TwoVertices) {
  const auto model = DegreeModel::power_law(1.0, 3.0, 2);
  EXPECT_NEAR(model.degrees()[0], std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(model.m(), 1.0 + std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(model.edge_probability(0, 0), 2.0 / (1.0 + std::sqrt(2.0)), 1e-14);
  EXPECT_NEAR(model.edge_probability(0, 0), 0.82843, 1e-5);
}

TEST(DegreeModel, LargeGammaFlattens) {
  const auto model = DegreeModel::power_law(1.0, 1e9, 5);
  for (double d : model.degrees()) EXPECT_NEAR(d, 1.0, 1e-8);
  EXPECT_NEAR(model.m(), 5.0, 1e-7);
}

TEST(DegreeModel, RecomputableDegrees) {
  const auto model = DegreeModel::power_law(0.7, 2.4, 13);
  for (std::size_t i = 0; i < 13; ++i) {
    EXPECT_DOUBLE_EQ(model.degrees()[i], 0.7 * std::pow((i + 1) / 13.0, -1.0 / 1.4));
  }
  const double sum = std::accumulate(model.degrees().begin(), model.degrees().end(), 0.0);
  EXPECT_NEAR(model.m(), sum, 1e-12 * 13);
}

TEST(DegreeModel, RowAndColumnSums) {
  for (double gamma : {2.7, 3.0, 5.0}) {
    const auto model = DegreeModel::power_law(1.0, gamma, 20);
    const auto& e = model.edges();
    double total = 0.0;
    for (std::size_t i = 0; i < 20; ++i) {
      double row = 0.0, col = 0.0;
      for (std::size_t j = 0; j < 20; ++j) {
        row += e(i, j);
        col += e(j, i);
      }
      EXPECT_NEAR(row / model.degrees()[i], 1.0, 1e-9);
      EXPECT_NEAR(col / model.degrees()[i], 1.0, 1e-9);
      total += row;
    }
    EXPECT_NEAR(total / model.m(), 1.0, 1e-9);
    EXPECT_NEAR(e.total() / model.m(), 1.0, 1e-12);
  }
}

TEST(DegreeModel, Errors) {
  EXPECT_THROW(DegreeModel::power_law(0.0, 3.0, 20), Error);
  EXPECT_THROW(DegreeModel::power_law(1.0, 1.0, 20), Error);
  EXPECT_THROW(DegreeModel::power_law(1.0, 3.0, 0), Error);
  try {
    DegreeModel::power_law(1.0, 1.5, 20);
    FAIL() << "expected overflow";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EdgeProbabilityOverflow);
  }
  const auto model = DegreeModel::power_law(1.0, 3.0, 4);
  try {
    (void)model.edge_probability(4, 0);
    FAIL() << "expected index error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IndexOutOfRange);
  }
}

// Construction fails exactly when max e_ij = d_1^2 / m exceeds one.
TEST(DegreeModel, RejectsExactlyOverflowingParameters) {
  for (double gamma = 1.6; gamma < 4.0; gamma += 0.05) {
    for (double theta : {0.5, 1.0, 2.0, 4.0}) {
      const double d1 = theta * std::pow(1.0 / 20.0, -1.0 / (gamma - 1.0));
      const double emax = d1 * d1 / oracle_m(theta, gamma, 20);
      if (emax > 1.0 + 1e-9) {
        EXPECT_THROW(DegreeModel::power_law(theta, gamma, 20), Error) << theta << " " << gamma;
      } else if (emax < 1.0 - 1e-9) {
        EXPECT_NO_THROW(DegreeModel::power_law(theta, gamma, 20)) << theta << " " << gamma;
      }
    }
  }
}

TEST(DegreeModel, TwoMDivisorHalvesProbabilities) {
  const auto a = DegreeModel::power_law(1.0, 3.0, 20, Divisor::M);
  const auto b = DegreeModel::power_law(1.0, 3.0, 20, Divisor::TwoM);
  EXPECT_NEAR(b.edge_probability(2, 5), 0.5 * a.edge_probability(2, 5), 1e-15);
  EXPECT_NEAR(b.edges().total(), 0.5 * a.m(), 1e-12);
}

TEST(InOutDegreeModel, ReferenceInstanceIsBalanced) {
  const auto model = InOutDegreeModel::power_law(1.0, 4.0, 2.0, 20);
  const double out = std::accumulate(model.out_degrees().begin(), model.out_degrees().end(), 0.0);
  const double in = std::accumulate(model.in_degrees().begin(), model.in_degrees().end(), 0.0);
  EXPECT_LE(std::abs(out - in), 1e-9 * model.m());
  EXPECT_NEAR(model.m(), out, 1e-12 * out);
  const auto& e = model.edges();
  for (std::size_t i = 0; i < 20; ++i) {
    double row = 0.0, col = 0.0;
    for (std::size_t j = 0; j < 20; ++j) {
      row += e(i, j);
      col += e(j, i);
    }
    EXPECT_NEAR(row / model.out_degrees()[i], 1.0, 1e-9);
    EXPECT_NEAR(col / model.in_degrees()[i], 1.0, 1e-9);
  }
}

TEST(InOutDegreeModel, ThetaMinusBySummation) {
  const auto model = InOutDegreeModel::power_law(1.0, 4.0, 2.0, 3);
  // Hand sums over k = 1..3 of (k/3)^(-1/3) and (k/3)^(-1).
  const double plus = std::cbrt(3.0) + std::cbrt(1.5) + 1.0;
  const double minus = 3.0 + 1.5 + 1.0;
  EXPECT_NEAR(model.theta_minus(), plus / minus, 1e-14);
}

TEST(InOutDegreeModel, EqualGammasReduceToSymmetric) {
  const auto io = InOutDegreeModel::power_law(1.3, 3.0, 3.0, 20);
  const auto sym = DegreeModel::power_law(1.3, 3.0, 20);
  EXPECT_NEAR(io.theta_minus(), io.theta_plus(), 1e-14);
  for (std::size_t i = 0; i < 20; ++i) {
    for (std::size_t j = 0; j < 20; ++j) EXPECT_NEAR(io.edge_probability(i, j), sym.edge_probability(i, j), 1e-14);
  }
}
