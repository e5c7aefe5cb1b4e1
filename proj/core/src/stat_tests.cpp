#include "dclg/stat_tests.hpp"

#include <algorithm>
#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "dclg/error.hpp"
#include "dclg/numeric.hpp"

namespace dclg {
namespace {

void check_level(double level) {
  if (!(level > 0.0 && level <= 0.5)) fail(ErrorCode::InvalidParameter, "level must lie in (0, 0.5]");
}

std::vector<double> sorted_copy(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  for (double x : out) {
    if (std::isnan(x)) fail(ErrorCode::InvalidParameter, "sample contains NaN");
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string format_g17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double kolmogorov_q(double x) {
  if (!(x > 0.0)) return 1.0;
  if (x < 1.18) {
    // Theta-function form; converges fast for small x.
    const double pi2 = std::numbers::pi * std::numbers::pi;
    double sum = 0.0;
    for (int j = 1; j <= 50; ++j) {
      const double odd = 2.0 * j - 1.0;
      const double term = std::exp(-odd * odd * pi2 / (8.0 * x * x));
      sum += term;
      if (term < 1e-16) break;
    }
    return std::clamp(1.0 - std::sqrt(2.0 * std::numbers::pi) / x * sum, 0.0, 1.0);
  }
  double sum = 0.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * x * x);
    sum += (j % 2 == 1) ? term : -term;
    if (term < 1e-12) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsVerdict ks_two_sample(std::span<const double> a, std::span<const double> b, double level) {
  check_level(level);
  if (a.size() < 5 || b.size() < 5) fail(ErrorCode::SampleTooSmall, "each sample needs at least 5 values");
  const auto sa = sorted_copy(a);
  const auto sb = sorted_copy(b);
  const double n1 = static_cast<double>(sa.size()), n2 = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  // Advance through all copies of the next pooled value before comparing.
  while (i < sa.size() && j < sb.size()) {
    const double v = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] == v) ++i;
    while (j < sb.size() && sb[j] == v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / n1 - static_cast<double>(j) / n2));
  }
  KsVerdict verdict;
  verdict.statistic = d;
  verdict.n1 = sa.size();
  verdict.n2 = sb.size();
  verdict.level = level;
  const double ne = n1 * n2 / (n1 + n2);
  verdict.p_value = kolmogorov_q(std::sqrt(ne) * d);
  verdict.reject = verdict.p_value < level;
  return verdict;
}

KsVerdict ks_normal(std::span<const double> sample, double mean, double std, double level) {
  check_level(level);
  if (sample.size() < 5) fail(ErrorCode::SampleTooSmall, "sample needs at least 5 values");
  if (!(std > 0.0) || !std::isfinite(mean)) fail(ErrorCode::InvalidParameter, "reference needs std > 0");
  const auto s = sorted_copy(sample);
  const boost::math::normal_distribution<double> ref(mean, std);
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = boost::math::cdf(ref, s[i]);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  KsVerdict verdict;
  verdict.statistic = d;
  verdict.n1 = s.size();
  verdict.n2 = 0;
  verdict.level = level;
  verdict.p_value = kolmogorov_q(std::sqrt(n) * d);
  verdict.reject = verdict.p_value < level;
  return verdict;
}

std::vector<Point> qq_points(std::span<const double> sample, double mean, double std) {
  if (sample.empty()) fail(ErrorCode::InvalidParameter, "sample is empty");
  if (!(std > 0.0)) fail(ErrorCode::InvalidParameter, "std must be positive");
  const auto s = sorted_copy(sample);
  const boost::math::normal_distribution<double> unit;
  const double n = static_cast<double>(s.size());
  std::vector<Point> out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double p = (static_cast<double>(i) + 0.5) / n;
    out.emplace_back(mean + std * boost::math::quantile(unit, p), s[i]);
  }
  return out;
}

std::vector<Point> histogram_density(std::span<const double> sample, std::size_t bins) {
  if (bins < 1) fail(ErrorCode::InvalidParameter, "bins must be at least 1");
  if (sample.empty()) fail(ErrorCode::InvalidParameter, "sample is empty");
  for (double x : sample) {
    if (!std::isfinite(x)) fail(ErrorCode::InvalidParameter, "sample contains non-finite values");
  }
  const auto [lo_it, hi_it] = std::minmax_element(sample.begin(), sample.end());
  const double lo = *lo_it, hi = *hi_it;
  if (lo == hi) {
    const double width = std::max(1e-12, std::abs(lo) * 1e-9);
    return {{lo, 1.0 / width}};
  }
  const double width = (hi - lo) / static_cast<double>(bins);
  std::vector<std::size_t> counts(bins, 0);
  for (double x : sample) {
    auto b = static_cast<std::size_t>((x - lo) / width);
    counts[std::min(b, bins - 1)]++;
  }
  const double n = static_cast<double>(sample.size());
  std::vector<Point> out;
  out.reserve(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out.emplace_back(lo + (static_cast<double>(b) + 0.5) * width,
                     static_cast<double>(counts[b]) / (n * width));
  }
  return out;
}

std::pair<double, double> mean_and_std(std::span<const double> sample) {
  if (sample.empty()) fail(ErrorCode::InvalidParameter, "sample is empty");
  CompensatedSum sum;
  for (double x : sample) sum += x;
  const double mean = sum.value() / static_cast<double>(sample.size());
  if (sample.size() < 2) return {mean, 0.0};
  CompensatedSum sq;
  for (double x : sample) sq += (x - mean) * (x - mean);
  return {mean, std::sqrt(sq.value() / static_cast<double>(sample.size() - 1))};
}

void write_points_csv(std::ostream& os, const std::vector<Point>& points) {
  os << "x,y\n";
  for (const auto& [x, y] : points) os << format_g17(x) << ',' << format_g17(y) << '\n';
}

void write_points_csv(const std::string& path, const std::vector<Point>& points) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::IoError, "cannot open " + path);
  write_points_csv(os, points);
  if (!os) fail(ErrorCode::IoError, "write failed for " + path);
}

std::vector<Point> read_points_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "x,y") fail(ErrorCode::ParseError, "expected header x,y");
  std::vector<Point> out;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) fail(ErrorCode::ParseError, "row " + std::to_string(row) + ": missing comma");
    try {
      std::size_t used = 0;
      const std::string xs = line.substr(0, comma), ys = line.substr(comma + 1);
      const double x = std::stod(xs, &used);
      if (used != xs.size()) throw std::invalid_argument(xs);
      const double y = std::stod(ys, &used);
      if (used != ys.size()) throw std::invalid_argument(ys);
      out.emplace_back(x, y);
    } catch (const std::logic_error&) {
      fail(ErrorCode::ParseError, "row " + std::to_string(row) + ": bad number");
    }
  }
  return out;
}

std::vector<Point> read_points_csv(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::IoError, "cannot open " + path);
  return read_points_csv(is);
}

}  // namespace dclg
