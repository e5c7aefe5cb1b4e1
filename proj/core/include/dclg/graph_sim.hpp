#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "dclg/degree_model.hpp"
#include "dclg/lifetimes.hpp"
#include "dclg/rng.hpp"

namespace dclg {

enum class Side { On, Off };

// One side (on or off) follows an edge-independent law; the other side is
// exponential with a per-edge rate fixed by mean_on / (mean_on + mean_off) = e_ij.
struct Binding {
  Side homogeneous = Side::On;
  LifetimeDist law = LifetimeDist::exponential(1.0);
};

struct GraphModelSpec {
  EdgeProbabilities edges;
  Binding binding;
};

struct EdgeLifetimes {
  LifetimeDist on;
  LifetimeDist off;
};

// Rate of the exponential (derived) side for an edge with on-probability e.
// Throws DegenerateEdge when e is 0 or 1.
double derived_rate(const Binding& binding, double e);

// Per-edge (on, off) laws in row-major edge order.
std::vector<EdgeLifetimes> resolve_binding(const GraphModelSpec& spec);

// True when both per-edge lifetimes are exponential.
bool is_exp_exp(const Binding& binding) noexcept;

struct Equidistant {
  double delta = 1.0;
  std::size_t k = 1;
};

struct PoissonTimes {
  double xi = 1.0;
  std::size_t k = 1;
};

using SamplingScheme = std::variant<Equidistant, PoissonTimes>;

std::size_t snapshot_count(const SamplingScheme& scheme) noexcept;
void validate_scheme(const SamplingScheme& scheme);

struct SnapshotSeries {
  std::vector<double> times;
  std::vector<std::uint32_t> counts;
  SamplingScheme scheme;
  std::uint64_t seed = 0;
};

enum class Engine { Auto, SkipAhead, EventDriven };

// Snapshot times for a run: k * delta, or cumulative Exp(xi) gaps drawn from
// the run's sampling-time stream.
std::vector<double> sampling_times(const SamplingScheme& scheme, std::uint64_t seed);

// Simulates the stationary process (every edge started in equilibrium) and
// records the total edge count at each sampling time. Deterministic in
// (spec, scheme, seed, engine). SkipAhead requires exponential lifetimes on
// both sides; Auto picks the cheaper valid engine.
SnapshotSeries simulate(const GraphModelSpec& spec, const SamplingScheme& scheme,
                        std::uint64_t seed, Engine engine = Engine::Auto);

// Engine that Auto resolves to for this spec and scheme.
Engine choose_engine(const GraphModelSpec& spec, const SamplingScheme& scheme);

// State of a two-state Markov edge after time t, drawn from the transition law.
// off_rate is the rate of leaving the off state, on_rate of leaving on.
bool exp_skip_ahead_state(bool on, double off_rate, double on_rate, double t, Rng& rng);

// CSV with header "k,time,count" (k is 1-based).
void write_series_csv(std::ostream& os, const SnapshotSeries& series);
void write_series_csv(const std::string& path, const SnapshotSeries& series);
// Parses times and counts; the returned series carries the given scheme.
SnapshotSeries read_series_csv(std::istream& is, const SamplingScheme& scheme);
SnapshotSeries read_series_csv(const std::string& path, const SamplingScheme& scheme);

// Binary dump: "DCLS1", u64 K, then K records of (f64 time, u32 count), all
// little-endian and unpadded.
void write_series_binary(std::ostream& os, const SnapshotSeries& series);
void write_series_binary(const std::string& path, const SnapshotSeries& series);
SnapshotSeries read_series_binary(std::istream& is, const SamplingScheme& scheme);
SnapshotSeries read_series_binary(const std::string& path, const SamplingScheme& scheme);

// Dispatches on the leading magic bytes.
SnapshotSeries read_series(const std::string& path, const SamplingScheme& scheme);

}  // namespace dclg
