#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dclg {

struct KsVerdict {
  double statistic = 0.0;
  double p_value = 1.0;
  bool reject = false;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
  double level = 0.05;
};

// Kolmogorov survival function Q(x) = P(sup |B| > x) = 2 sum (-1)^(j-1) exp(-2 j^2 x^2).
double kolmogorov_q(double x);

// Two-sample Kolmogorov-Smirnov test with the asymptotic p-value at
// effective size n1 n2 / (n1 + n2). Throws SampleTooSmall if either n < 5.
KsVerdict ks_two_sample(std::span<const double> a, std::span<const double> b, double level = 0.05);

// One-sample test against N(mean, std^2), asymptotic p-value at size n.
KsVerdict ks_normal(std::span<const double> sample, double mean, double std, double level = 0.05);

using Point = std::pair<double, double>;

// (mean + std * Phi^-1((i - 0.5) / n), i-th order statistic), i = 1..n.
std::vector<Point> qq_points(std::span<const double> sample, double mean, double std);

// Equal-width bins over [min, max] as (center, density); densities integrate to 1.
// An all-equal sample gives a single bin of width max(1e-12, |v| 1e-9).
std::vector<Point> histogram_density(std::span<const double> sample, std::size_t bins);

// Sample mean and standard deviation with the n - 1 divisor.
std::pair<double, double> mean_and_std(std::span<const double> sample);

// CSV with header "x,y", values printed with 17 significant digits.
void write_points_csv(std::ostream& os, const std::vector<Point>& points);
void write_points_csv(const std::string& path, const std::vector<Point>& points);
std::vector<Point> read_points_csv(std::istream& is);
std::vector<Point> read_points_csv(const std::string& path);

}  // namespace dclg
