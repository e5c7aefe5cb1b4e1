#include "dclg/graph_sim.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "dclg/error.hpp"

namespace dclg {
namespace {

constexpr std::uint64_t kTimesDomain = 1;
constexpr std::uint64_t kEdgeDomain = 2;

constexpr std::array<char, 5> kMagic = {'D', 'C', 'L', 'S', '1'};

// First index idx >= from with times[idx] >= x, by galloping then bisection.
std::size_t gallop(const std::vector<double>& times, std::size_t from, double x) {
  const std::size_t n = times.size();
  if (from >= n || times[from] >= x) return from;
  std::size_t lo = from;  // times[lo] < x
  std::size_t step = 1;
  std::size_t hi = from + step;
  while (hi < n && times[hi] < x) {
    lo = hi;
    step <<= 1;
    hi = from + step;
  }
  hi = std::min(hi, n);
  return static_cast<std::size_t>(
      std::lower_bound(times.begin() + static_cast<std::ptrdiff_t>(lo) + 1,
                       times.begin() + static_cast<std::ptrdiff_t>(hi), x) -
      times.begin());
}

void accumulate(std::vector<std::int64_t>& diff, SnapshotSeries& series) {
  std::int64_t running = 0;
  for (std::size_t k = 0; k < series.counts.size(); ++k) {
    running += diff[k];
    series.counts[k] = static_cast<std::uint32_t>(running);
  }
}

void simulate_event_driven(const GraphModelSpec& spec, std::uint64_t seed,
                           SnapshotSeries& series) {
  const auto lifetimes = resolve_binding(spec);
  const auto e = spec.edges.values();
  const auto& times = series.times;
  const std::size_t k_total = times.size();
  std::vector<std::int64_t> diff(k_total + 1, 0);

  for (std::size_t edge = 0; edge < lifetimes.size(); ++edge) {
    Rng rng(derive_seed(seed, kEdgeDomain, edge));
    const auto& [on_law, off_law] = lifetimes[edge];
    bool on = rng.uniform() < e[edge];
    double end = on ? on_law.sample_residual(rng) : off_law.sample_residual(rng);
    std::size_t k = 0;  // first snapshot at or after the current sojourn start
    while (k < k_total) {
      const std::size_t next = gallop(times, k, end);
      if (on && next > k) {
        diff[k] += 1;
        diff[next] -= 1;
      }
      k = next;
      on = !on;
      end += on ? on_law.sample(rng) : off_law.sample(rng);
    }
  }
  accumulate(diff, series);
}

// Edges are advanced in blocks so that their independent state recursions
// overlap; each 64-bit draw supplies 32-bit uniforms for two consecutive steps
// of the same edge.
void simulate_skip_ahead(const GraphModelSpec& spec, std::uint64_t seed, SnapshotSeries& series) {
  constexpr std::size_t kBlock = 4;
  constexpr double kInv32 = 0x1.0p-32;
  const auto e = spec.edges.values();
  const auto& times = series.times;
  const std::size_t k_total = times.size();
  const bool equidistant = std::holds_alternative<Equidistant>(series.scheme);
  Eigen::ArrayXd gaps(static_cast<Eigen::Index>(k_total));
  for (std::size_t k = 0; k < k_total; ++k) gaps[static_cast<Eigen::Index>(k)] = times[k] - (k == 0 ? 0.0 : times[k - 1]);
  std::vector<std::uint32_t> counts(k_total, 0);

  // Sorting by probability lets neighbouring edges share exp(-rate gap).
  std::vector<std::size_t> order(e.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return e[a] < e[b]; });

  std::array<Eigen::ArrayXd, kBlock> decay;
  std::array<Eigen::ArrayXd, kBlock> base;
  std::array<double, kBlock> block_p{};
  for (std::size_t first = 0; first < order.size(); first += kBlock) {
    const std::size_t width = std::min(kBlock, order.size() - first);
    std::array<Rng, kBlock> rng;
    std::array<std::uint32_t, kBlock> on{};
    std::array<std::size_t, kBlock> slot{};
    for (std::size_t b = 0; b < kBlock; ++b) {
      // Padding lanes repeat the last edge and are discarded.
      const std::size_t edge = order[first + std::min(b, width - 1)];
      const double p = e[edge];
      rng[b] = Rng(derive_seed(seed, kEdgeDomain, edge));
      on[b] = rng[b].uniform() < p ? 1u : 0u;
      slot[b] = b;
      if (b > 0 && p == block_p[b - 1]) {
        slot[b] = slot[b - 1];
        block_p[b] = p;
        continue;
      }
      block_p[b] = p;
      const double derived = derived_rate(spec.binding, p);
      // Total switching rate: off-rate + on-rate = derived / (1 - p) or derived / p.
      const double rate = spec.binding.homogeneous == Side::On ? derived / p : derived / (1.0 - p);
      decay[b] = equidistant ? Eigen::ArrayXd::Constant(gaps.size(), std::exp(-rate * gaps[0]))
                             : Eigen::ArrayXd((-rate * gaps).exp());
      // P(on after the gap) = p (1 - x) + state x
      base[b] = p * (1.0 - decay[b]);
    }
    std::array<const double*, kBlock> xs{};
    std::array<const double*, kBlock> bs{};
    std::array<std::uint32_t, kBlock> live{};
    for (std::size_t b = 0; b < kBlock; ++b) {
      xs[b] = decay[slot[b]].data();
      bs[b] = base[slot[b]].data();
      live[b] = b < width ? 1u : 0u;
    }
    std::array<std::uint64_t, kBlock> bits{};
    for (std::size_t k = 0; k < k_total; ++k) {
      const bool high = (k & 1u) == 0;
      std::uint32_t added = 0;
      for (std::size_t b = 0; b < kBlock; ++b) {
        if (high) bits[b] = rng[b]();
        const auto word = static_cast<std::uint32_t>(high ? bits[b] >> 32 : bits[b]);
        const double u = static_cast<double>(word) * kInv32;
        on[b] = u < bs[b][k] + static_cast<double>(on[b]) * xs[b][k] ? 1u : 0u;
        added += on[b] & live[b];
      }
      counts[k] += added;
    }
  }
  series.counts = std::move(counts);
}

void write_le(std::ostream& os, const void* data, std::size_t size) {
  std::array<char, 8> buf{};
  std::memcpy(buf.data(), data, size);
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf.begin(), buf.begin() + size);
  os.write(buf.data(), static_cast<std::streamsize>(size));
}

void read_le(std::istream& is, void* data, std::size_t size) {
  std::array<char, 8> buf{};
  if (!is.read(buf.data(), static_cast<std::streamsize>(size))) {
    fail(ErrorCode::ParseError, "truncated binary series");
  }
  if constexpr (std::endian::native == std::endian::big) std::reverse(buf.begin(), buf.begin() + size);
  std::memcpy(data, buf.data(), size);
}

}  // namespace

bool is_exp_exp(const Binding& binding) noexcept {
  return binding.law.kind() == LifetimeKind::Exponential;
}

double derived_rate(const Binding& binding, double e) {
  if (!(e > 0.0) || !(e < 1.0)) {
    std::ostringstream os;
    os << "edge on-probability " << e << " forces a degenerate rate";
    fail(ErrorCode::DegenerateEdge, os.str());
  }
  const double mean = binding.law.mean();
  if (binding.homogeneous == Side::On) {
    return e / ((1.0 - e) * mean);  // off rate
  }
  return (1.0 - e) / (e * mean);  // on rate
}

std::vector<EdgeLifetimes> resolve_binding(const GraphModelSpec& spec) {
  const auto e = spec.edges.values();
  std::vector<EdgeLifetimes> out;
  out.reserve(e.size());
  for (double p : e) {
    const auto derived = LifetimeDist::exponential(derived_rate(spec.binding, p));
    if (spec.binding.homogeneous == Side::On) {
      out.push_back({spec.binding.law, derived});
    } else {
      out.push_back({derived, spec.binding.law});
    }
  }
  return out;
}

std::size_t snapshot_count(const SamplingScheme& scheme) noexcept {
  return std::visit([](const auto& s) { return s.k; }, scheme);
}

void validate_scheme(const SamplingScheme& scheme) {
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        double rate_or_lag;
        if constexpr (std::is_same_v<T, Equidistant>) {
          rate_or_lag = s.delta;
        } else {
          rate_or_lag = s.xi;
        }
        if (!(rate_or_lag > 0.0) || !std::isfinite(rate_or_lag)) {
          fail(ErrorCode::InvalidParameter, "sampling lag / rate must be positive");
        }
        if (s.k < 1) fail(ErrorCode::InvalidParameter, "at least one snapshot required");
      },
      scheme);
}

std::vector<double> sampling_times(const SamplingScheme& scheme, std::uint64_t seed) {
  validate_scheme(scheme);
  const std::size_t k_total = snapshot_count(scheme);
  std::vector<double> times(k_total);
  if (const auto* eq = std::get_if<Equidistant>(&scheme)) {
    for (std::size_t k = 0; k < k_total; ++k) times[k] = static_cast<double>(k + 1) * eq->delta;
  } else {
    const double xi = std::get<PoissonTimes>(scheme).xi;
    Rng rng(derive_seed(seed, kTimesDomain, 0));
    double t = 0.0;
    for (std::size_t k = 0; k < k_total; ++k) {
      t += -std::log(rng.uniform_pos()) / xi;
      times[k] = t;
    }
  }
  return times;
}

Engine choose_engine(const GraphModelSpec& spec, const SamplingScheme& scheme) {
  if (!is_exp_exp(spec.binding)) return Engine::EventDriven;
  const std::size_t k_total = snapshot_count(scheme);
  const bool equidistant = std::holds_alternative<Equidistant>(scheme);
  const double horizon = equidistant
                             ? static_cast<double>(k_total) * std::get<Equidistant>(scheme).delta
                             : static_cast<double>(k_total) / std::get<PoissonTimes>(scheme).xi;
  // Per-edge costs in units of one skip-ahead step: an event-driven cycle
  // (two sojourns and their snapshot searches) measures about 18 steps.
  const double skip_cost = static_cast<double>(k_total);
  const double mean_h = spec.binding.law.mean();
  double event_cost = 0.0;
  for (double p : spec.edges.values()) {
    const double cycle = spec.binding.homogeneous == Side::On ? mean_h / p : mean_h / (1.0 - p);
    event_cost += 18.0 * horizon / cycle + 50.0;
  }
  event_cost /= static_cast<double>(spec.edges.edge_count());
  return skip_cost <= event_cost ? Engine::SkipAhead : Engine::EventDriven;
}

SnapshotSeries simulate(const GraphModelSpec& spec, const SamplingScheme& scheme,
                        std::uint64_t seed, Engine engine) {
  validate_scheme(scheme);
  SnapshotSeries series;
  series.scheme = scheme;
  series.seed = seed;
  series.times = sampling_times(scheme, seed);
  series.counts.assign(series.times.size(), 0);
  if (engine == Engine::Auto) engine = choose_engine(spec, scheme);
  if (engine == Engine::SkipAhead) {
    if (!is_exp_exp(spec.binding)) {
      fail(ErrorCode::WrongFamily, "skip-ahead engine needs exponential on- and off-times");
    }
    simulate_skip_ahead(spec, seed, series);
  } else {
    simulate_event_driven(spec, seed, series);
  }
  return series;
}

bool exp_skip_ahead_state(bool on, double off_rate, double on_rate, double t, Rng& rng) {
  const double total = off_rate + on_rate;
  const double stationary = off_rate / total;
  const double x = std::exp(-total * t);
  const double p_on = stationary + ((on ? 1.0 : 0.0) - stationary) * x;
  return rng.uniform() < p_on;
}

void write_series_csv(std::ostream& os, const SnapshotSeries& series) {
  os << "k,time,count\n";
  char buf[64];
  for (std::size_t k = 0; k < series.times.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", series.times[k]);
    os << (k + 1) << ',' << buf << ',' << series.counts[k] << '\n';
  }
}

void write_series_csv(const std::string& path, const SnapshotSeries& series) {
  std::ofstream os(path);
  if (!os) fail(ErrorCode::IoError, "cannot open " + path);
  write_series_csv(os, series);
}

SnapshotSeries read_series_csv(std::istream& is, const SamplingScheme& scheme) {
  SnapshotSeries series;
  series.scheme = scheme;
  std::string line;
  if (!std::getline(is, line) || line.rfind("k,time,count", 0) != 0) {
    fail(ErrorCode::ParseError, "series CSV must start with header k,time,count");
  }
  std::size_t expected = 1;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string k_field, time_field, count_field;
    if (!std::getline(row, k_field, ',') || !std::getline(row, time_field, ',') ||
        !std::getline(row, count_field)) {
      fail(ErrorCode::ParseError, "malformed series row: " + line);
    }
    try {
      if (std::stoull(k_field) != expected) fail(ErrorCode::ParseError, "rows out of order");
      series.times.push_back(std::stod(time_field));
      series.counts.push_back(static_cast<std::uint32_t>(std::stoul(count_field)));
    } catch (const std::logic_error&) {
      fail(ErrorCode::ParseError, "malformed series row: " + line);
    }
    ++expected;
  }
  return series;
}

SnapshotSeries read_series_csv(const std::string& path, const SamplingScheme& scheme) {
  std::ifstream is(path);
  if (!is) fail(ErrorCode::IoError, "cannot open " + path);
  return read_series_csv(is, scheme);
}

void write_series_binary(std::ostream& os, const SnapshotSeries& series) {
  os.write(kMagic.data(), kMagic.size());
  const std::uint64_t k_total = series.times.size();
  write_le(os, &k_total, sizeof k_total);
  for (std::size_t k = 0; k < k_total; ++k) {
    write_le(os, &series.times[k], sizeof(double));
    write_le(os, &series.counts[k], sizeof(std::uint32_t));
  }
}

void write_series_binary(const std::string& path, const SnapshotSeries& series) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::IoError, "cannot open " + path);
  write_series_binary(os, series);
}

SnapshotSeries read_series_binary(std::istream& is, const SamplingScheme& scheme) {
  std::array<char, 5> magic{};
  if (!is.read(magic.data(), magic.size()) || magic != kMagic) {
    fail(ErrorCode::ParseError, "missing DCLS1 magic");
  }
  std::uint64_t k_total = 0;
  read_le(is, &k_total, sizeof k_total);
  SnapshotSeries series;
  series.scheme = scheme;
  series.times.resize(k_total);
  series.counts.resize(k_total);
  for (std::size_t k = 0; k < k_total; ++k) {
    read_le(is, &series.times[k], sizeof(double));
    read_le(is, &series.counts[k], sizeof(std::uint32_t));
  }
  return series;
}

SnapshotSeries read_series_binary(const std::string& path, const SamplingScheme& scheme) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoError, "cannot open " + path);
  return read_series_binary(is, scheme);
}

SnapshotSeries read_series(const std::string& path, const SamplingScheme& scheme) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoError, "cannot open " + path);
  std::array<char, 5> head{};
  is.read(head.data(), head.size());
  is.clear();
  is.seekg(0);
  if (head == kMagic) return read_series_binary(is, scheme);
  return read_series_csv(is, scheme);
}

}  // namespace dclg
