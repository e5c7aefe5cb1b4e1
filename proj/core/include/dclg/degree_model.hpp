#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dclg {

// Normalization of e_ij = d_i d_j / (c m). The directed model uses c = 1; the
// undirected convention (c = 2) is kept selectable for comparison runs.
enum class Divisor { M = 1, TwoM = 2 };

constexpr double divisor_factor(Divisor d) noexcept { return d == Divisor::TwoM ? 2.0 : 1.0; }

// Row-major N x N matrix of stationary per-edge on-probabilities. Self-loops
// and both orientations of every pair are included.
class EdgeProbabilities {
 public:
  EdgeProbabilities() = default;
  EdgeProbabilities(std::size_t n, std::vector<double> values);

  std::size_t n() const noexcept { return n_; }
  std::size_t edge_count() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }

  // 0-based indices; throws IndexOutOfRange.
  double at(std::size_t i, std::size_t j) const;
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_[i * n_ + j]; }

  // Sum of all e_ij, i.e. the stationary mean edge count.
  double total() const noexcept { return total_; }

 private:
  std::size_t n_ = 0;
  std::vector<double> values_;
  double total_ = 0.0;
};

// sum_{k=1}^{N} (k/N)^{-1/(gamma-1)}
double power_law_weight_sum(double gamma, std::size_t n);

// d_i = theta (i/N)^{-1/(gamma-1)}, i = 1..N (returned 0-based).
std::vector<double> power_law_degrees(double theta, double gamma, std::size_t n);

// Symmetric target degrees: in-degree equals out-degree for every vertex.
class DegreeModel {
 public:
  // Throws InvalidParameter for theta <= 0, gamma <= 1 or n == 0, and
  // EdgeProbabilityOverflow when some e_ij exceeds one.
  static DegreeModel power_law(double theta, double gamma, std::size_t n,
                               Divisor divisor = Divisor::M);

  std::size_t n() const noexcept { return degrees_.size(); }
  double theta() const noexcept { return theta_; }
  double gamma() const noexcept { return gamma_; }
  double m() const noexcept { return m_; }
  Divisor divisor() const noexcept { return divisor_; }
  std::span<const double> degrees() const noexcept { return degrees_; }

  double edge_probability(std::size_t i, std::size_t j) const { return edges_.at(i, j); }
  const EdgeProbabilities& edges() const noexcept { return edges_; }

 private:
  DegreeModel() = default;

  double theta_ = 0.0;
  double gamma_ = 0.0;
  double m_ = 0.0;
  Divisor divisor_ = Divisor::M;
  std::vector<double> degrees_;
  EdgeProbabilities edges_;
};

// Distinct out-degrees d_i^+ and in-degrees d_j^-, balanced so that both sum
// to m. e_ij = d_i^+ d_j^- / (c m).
class InOutDegreeModel {
 public:
  // theta_minus is solved from the balance constraint.
  static InOutDegreeModel power_law(double theta_plus, double gamma_plus, double gamma_minus,
                                    std::size_t n, Divisor divisor = Divisor::M);

  std::size_t n() const noexcept { return out_degrees_.size(); }
  double theta_plus() const noexcept { return theta_plus_; }
  double gamma_plus() const noexcept { return gamma_plus_; }
  double theta_minus() const noexcept { return theta_minus_; }
  double gamma_minus() const noexcept { return gamma_minus_; }
  double m() const noexcept { return m_; }
  Divisor divisor() const noexcept { return divisor_; }
  std::span<const double> out_degrees() const noexcept { return out_degrees_; }
  std::span<const double> in_degrees() const noexcept { return in_degrees_; }

  double edge_probability(std::size_t i, std::size_t j) const { return edges_.at(i, j); }
  const EdgeProbabilities& edges() const noexcept { return edges_; }

 private:
  InOutDegreeModel() = default;

  double theta_plus_ = 0.0;
  double gamma_plus_ = 0.0;
  double theta_minus_ = 0.0;
  double gamma_minus_ = 0.0;
  double m_ = 0.0;
  Divisor divisor_ = Divisor::M;
  std::vector<double> out_degrees_;
  std::vector<double> in_degrees_;
  EdgeProbabilities edges_;
};

}  // namespace dclg
