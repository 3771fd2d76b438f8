#pragma once

// Stochastic pair-occupancy timeline of crystal X and Monte Carlo coincidence
// counting. Two independent homogeneous Poisson streams feed the timeline:
// pairs arriving from X' at rate Q_E/4 and pairs born in X at rate 3 Q_E/4,
// each present for the dwell time delta. Everything is deterministic for a
// fixed seed; sub-streams get distinct seeds derived from the master seed via
// splitmix64.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "dcsim/errors.hpp"
#include "dcsim/experiment.hpp"
#include "dcsim/fock_core.hpp"

namespace dcsim {

inline constexpr double kSpeedOfLight = 2.99792458e8;  // m/s

struct TimescaleParams {
  double q_e = 0.0;       // enhanced selected-pair rate, s^-1
  double tau_pcoh = 0.0;  // pair coherence time, s
  double n_refr = 0.0;    // crystal refraction index
  double d_max = 0.0;     // maximal in-crystal path, m
  double c = kSpeedOfLight;
};

struct Timescales {
  double t_mean = 0.0;  // mean interval between selected pairs, 1/Q_E
  double delta = 0.0;   // max dwell time, max(tau_pcoh, n d_max / c)
  double ratio = 0.0;   // t_mean / delta
  bool inequality_holds = false;  // ratio > 100
};

inline Timescales derive_timescales(const TimescaleParams& p) {
  if (!(p.q_e > 0.0) || !(p.tau_pcoh > 0.0) || !(p.n_refr > 0.0) ||
      !(p.d_max > 0.0) || !(p.c > 0.0))
    throw InvalidParams("timescale parameters must all be positive");
  Timescales t;
  t.t_mean = 1.0 / p.q_e;
  t.delta = std::max(p.tau_pcoh, p.n_refr * p.d_max / p.c);
  t.ratio = t.t_mean / t.delta;
  t.inequality_holds = t.ratio > 100.0;
  return t;
}

enum class EventOrigin { FromXPrime, BornInX };

inline const char* to_string(EventOrigin o) {
  return o == EventOrigin::FromXPrime ? "FROM_XPRIME" : "BORN_IN_X";
}

struct TimelineEvent {
  double t_start = 0.0;
  double duration = 0.0;
  EventOrigin origin = EventOrigin::BornInX;
};

struct TimelineStats {
  std::size_t n_incoming = 0;
  std::size_t n_born = 0;
  // Born events whose closed interval [t, t+delta] intersects at least one
  // incoming interval.
  std::size_t n_overlapping_born = 0;
  double overlap_fraction = 0.0;  // n_overlapping_born / n_born, 0 if no born
  double t_mean_measured = 0.0;   // duration / total events, estimates 1/Q_E
};

struct TimelineRun {
  std::vector<TimelineEvent> events;  // merged, sorted by t_start
  TimelineStats stats;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform draw in (0, 1], suitable for -log(u).
inline double uniform_pos(std::mt19937_64& rng) {
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

inline double exponential_gap(std::mt19937_64& rng, double rate) {
  return -std::log(uniform_pos(rng)) / rate;
}

inline std::vector<double> poisson_arrivals(std::mt19937_64& rng, double rate,
                                            double duration) {
  std::vector<double> times;
  double t = exponential_gap(rng, rate);
  while (t <= duration) {
    times.push_back(t);
    t += exponential_gap(rng, rate);
  }
  return times;
}

}  // namespace detail

inline TimelineRun simulate_timeline(const TimescaleParams& p, double duration,
                                     std::uint64_t seed) {
  if (!(duration > 0.0)) throw InvalidParams("duration must be positive");
  const Timescales ts = derive_timescales(p);
  const double delta = ts.delta;

  std::uint64_t mix = seed;
  std::mt19937_64 rng_incoming(detail::splitmix64(mix));
  std::mt19937_64 rng_born(detail::splitmix64(mix));

  const std::vector<double> incoming =
      detail::poisson_arrivals(rng_incoming, p.q_e / 4.0, duration);
  const std::vector<double> born =
      detail::poisson_arrivals(rng_born, 3.0 * p.q_e / 4.0, duration);

  TimelineRun run;
  run.events.reserve(incoming.size() + born.size());
  for (double t : incoming)
    run.events.push_back({t, delta, EventOrigin::FromXPrime});
  for (double t : born) run.events.push_back({t, delta, EventOrigin::BornInX});
  std::sort(run.events.begin(), run.events.end(),
            [](const TimelineEvent& a, const TimelineEvent& b) {
              return a.t_start < b.t_start;
            });

  TimelineStats& st = run.stats;
  st.n_incoming = incoming.size();
  st.n_born = born.size();

  // Both lists are sorted; [t, t+delta] intersects [s, s+delta] iff
  // |t - s| <= delta.
  std::size_t lo = 0;
  for (double t : born) {
    while (lo < incoming.size() && incoming[lo] < t - delta) ++lo;
    if (lo < incoming.size() && incoming[lo] <= t + delta)
      ++st.n_overlapping_born;
  }
  st.overlap_fraction =
      st.n_born == 0
          ? 0.0
          : static_cast<double>(st.n_overlapping_born) /
                static_cast<double>(st.n_born);
  const std::size_t total = st.n_incoming + st.n_born;
  st.t_mean_measured = total == 0 ? 0.0 : duration / static_cast<double>(total);
  return run;
}

struct ChannelEstimate {
  std::string channel;   // "c", "selected", or "nonselected:<mode>"
  std::uint64_t count = 0;
  double rate = 0.0;     // counts/duration scaled back to the unnormalized
                         // rate convention
  double stderr_rate = 0.0;
  double analytic_rate = 0.0;
};

struct McResult {
  std::uint64_t n_trials = 0;
  double duration = 0.0;
  std::vector<ChannelEstimate> channels;

  const ChannelEstimate& channel(const std::string& name) const {
    for (const ChannelEstimate& c : channels)
      if (c.channel == name) return c;
    throw InvalidParams("no such channel: " + name);
  }
};

// Samples UV-photon trials as a Poisson stream at N0 and draws each trial's
// output channel from the Experiment-B distribution. The channel weights sum
// to 1 + |alpha(sel)|^2 (unnormalized input state), so the sampling
// distribution is normalized by the total and the reported rates are scaled
// back by it.
inline McResult coincidence_monte_carlo(const DcCoefficients& coeffs,
                                        double n0, double sigma, double phi,
                                        double duration, std::uint64_t seed) {
  if (!(n0 > 0.0)) throw InvalidRate("n0 must be positive");
  if (!(duration > 0.0)) throw InvalidParams("duration must be positive");

  ExperimentConfig cfg{coeffs, n0, sigma, phi, std::nullopt};
  const ExperimentBResult analytic = run_experiment_b(cfg);

  const std::size_t m = coeffs.mode_count();
  std::vector<double> weights;
  weights.reserve(m + 1);
  weights.push_back(analytic.prob_c);
  weights.push_back(analytic.prob_selected);
  for (std::size_t i = 0; i < m; ++i)
    if (i != coeffs.selected) weights.push_back(analytic.prob_nonselected[i]);
  double total = 0.0;
  for (double w : weights) total += w;

  std::vector<double> cdf(weights.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i] / total;
    cdf[i] = acc;
  }
  cdf.back() = 1.0;  // residual mass after normalization goes to the last bin

  std::uint64_t mix = seed;
  std::mt19937_64 rng_trials(detail::splitmix64(mix));
  std::mt19937_64 rng_channel(detail::splitmix64(mix));

  std::poisson_distribution<std::uint64_t> n_dist(n0 * duration);
  const std::uint64_t n_trials = n_dist(rng_trials);

  std::vector<std::uint64_t> counts(weights.size(), 0);
  for (std::uint64_t t = 0; t < n_trials; ++t) {
    const double u = detail::uniform_pos(rng_channel);
    const std::size_t bin = static_cast<std::size_t>(
        std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
    ++counts[std::min(bin, counts.size() - 1)];
  }

  McResult r;
  r.n_trials = n_trials;
  r.duration = duration;
  auto push = [&](std::string name, std::uint64_t count,
                  double analytic_rate) {
    ChannelEstimate e;
    e.channel = std::move(name);
    e.count = count;
    e.rate = total * static_cast<double>(count) / duration;
    e.stderr_rate =
        total * std::sqrt(static_cast<double>(std::max<std::uint64_t>(count, 1))) /
        duration;
    e.analytic_rate = analytic_rate;
    r.channels.push_back(std::move(e));
  };
  push("c", counts[0], analytic.rate_c);
  push("selected", counts[1], analytic.rate_selected);
  std::size_t bin = 2;
  for (std::size_t i = 0; i < m; ++i) {
    if (i == coeffs.selected) continue;
    push("nonselected:" + std::to_string(i), counts[bin],
         n0 * analytic.prob_nonselected[i]);
    ++bin;
  }
  return r;
}

}  // namespace dcsim
