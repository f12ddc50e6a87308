#pragma once

// Streaming 1-d random-walk engine. Trajectories are never stored: event
// extraction (zero-level crossings, entrances/exits, occupation counts) runs
// over the increments as they are drawn, in O(1) memory.
//
// Sign convention: S_k = 0 lies on the nonnegative side everywhere. An up
// crossing at k means S_{k-1} < 0 <= S_k, a down crossing S_{k-1} >= 0 > S_k.
// Lattice walks advance in exact integer multiples of the span h, so there is
// no floating-point drift over 1e10 steps and the convention needs no
// tolerance. Continuum walks compare raw doubles: {S_k = level} is a null
// event for every continuum family here.
//
// Every extraction takes an explicit step budget and flags a partial result
// instead of looping forever; oscillation makes all these times a.s. finite
// but gives no runtime bound.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "walklab/errors.hpp"
#include "walklab/increment_laws.hpp"
#include "walklab/rng.hpp"
#include "walklab/set_spec.hpp"

namespace walklab {

enum class Direction { up, down };

struct CrossingEvent {
  std::uint64_t index = 0;  // n, starting at 1
  std::uint64_t time = 0;   // T_n
  double undershoot = 0.0;  // S_{T_n - 1}
  double overshoot = 0.0;   // S_{T_n}
  Direction direction = Direction::up;
  friend bool operator==(const CrossingEvent&, const CrossingEvent&) = default;
};

struct EntranceExitEvent {
  std::uint64_t time = 0;    // entrance time T_n
  double exit_point = 0.0;   // S_{T_n - 1}, last position in A^c
  double entrance_point = 0.0;  // S_{T_n}
  friend bool operator==(const EntranceExitEvent&, const EntranceExitEvent&) = default;
};

struct RunStatus {
  std::uint64_t steps = 0;
  bool budget_exhausted = false;
};

inline constexpr std::uint64_t kDefaultStepBudget = 1'000'000'000ull;

// --- hot kernels ------------------------------------------------------------
// All kernels mutate `pos` in place, decrement `steps_left` per step taken,
// and return false when the budget runs out first.

enum class CrossMode { any, up, down };

template <class Value>
struct CrossInfo {
  Value undershoot{};
  Value overshoot{};
  Direction direction = Direction::up;
};

// Advances to the next crossing of zero in the requested mode. The StepHook
// is called as hook(prev, cur) for every transition walked, including the
// crossing transition itself. Increments are scanned chunk-wise through a
// raw pointer so the loop pipelines.
template <CrossMode Mode, class Sampler, class Value, class StepHook>
inline bool advance_to_crossing(Sampler& sampler, RngState& rng, Value& pos,
                                std::uint64_t& steps_left, CrossInfo<Value>& info,
                                StepHook&& hook) {
  Value cur = pos;
  while (steps_left != 0) {
    const auto chunk = sampler.chunk(rng);
    const auto* inc = chunk.data();
    const std::size_t n =
        static_cast<std::size_t>(std::min<std::uint64_t>(chunk.size(), steps_left));
    for (std::size_t i = 0; i < n; ++i) {
      const Value prev = cur;
      cur = static_cast<Value>(prev + inc[i]);
      hook(prev, cur);
      bool crossed;
      if constexpr (Mode == CrossMode::up) {
        crossed = prev < Value(0) && cur >= Value(0);
      } else if constexpr (Mode == CrossMode::down) {
        crossed = prev >= Value(0) && cur < Value(0);
      } else {
        crossed = (prev < Value(0)) != (cur < Value(0));
      }
      if (crossed) {
        sampler.consume(i + 1);
        steps_left -= i + 1;
        info.undershoot = prev;
        info.overshoot = cur;
        info.direction = cur < Value(0) ? Direction::down : Direction::up;
        pos = cur;
        return true;
      }
    }
    sampler.consume(n);
    steps_left -= n;
  }
  pos = cur;
  return false;
}

struct NoStepHook {
  template <class V>
  void operator()(V, V) const noexcept {}
};

template <CrossMode Mode, class Sampler, class Value>
inline bool advance_to_crossing(Sampler& sampler, RngState& rng, Value& pos,
                                std::uint64_t& steps_left, CrossInfo<Value>& info) {
  return advance_to_crossing<Mode>(sampler, rng, pos, steps_left, info, NoStepHook{});
}

// Advances to the next entrance into A from A^c: first k with S_{k-1} not in
// A and S_k in A. Membership is a predicate on Value.
template <class Sampler, class Value, class Member>
inline bool advance_to_entrance(Sampler& sampler, RngState& rng, Value& pos,
                                std::uint64_t& steps_left, Member&& in_A, Value& exit_point,
                                Value& entrance_point) {
  Value cur = pos;
  bool cur_in = in_A(cur);
  while (steps_left != 0) {
    const auto chunk = sampler.chunk(rng);
    const auto* inc = chunk.data();
    const std::size_t n =
        static_cast<std::size_t>(std::min<std::uint64_t>(chunk.size(), steps_left));
    for (std::size_t i = 0; i < n; ++i) {
      const Value prev = cur;
      const bool prev_in = cur_in;
      cur = static_cast<Value>(prev + inc[i]);
      cur_in = in_A(cur);
      if (!prev_in && cur_in) {
        sampler.consume(i + 1);
        steps_left -= i + 1;
        exit_point = prev;
        entrance_point = cur;
        pos = cur;
        return true;
      }
    }
    sampler.consume(n);
    steps_left -= n;
  }
  pos = cur;
  return false;
}

// Walks exactly n steps, counting zero-level crossings; optional hooks see
// every transition. Used by the horizon experiments.
template <class Sampler, class Value, class StepHook>
inline std::uint64_t count_crossings_for_steps(Sampler& sampler, RngState& rng, Value& pos,
                                               std::uint64_t n_steps, StepHook&& hook) {
  Value cur = pos;
  std::uint64_t count = 0;
  std::uint64_t left = n_steps;
  while (left != 0) {
    const auto chunk = sampler.chunk(rng);
    const auto* inc = chunk.data();
    const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(chunk.size(), left));
    for (std::size_t i = 0; i < n; ++i) {
      const Value prev = cur;
      cur = static_cast<Value>(prev + inc[i]);
      const bool crossed = (prev < Value(0)) != (cur < Value(0));
      count += crossed;
      hook(crossed, cur);
    }
    sampler.consume(n);
    left -= n;
  }
  pos = cur;
  return count;
}

// --- lazy position stream (contract surface; not used by the hot loops) -----

class WalkStream {
 public:
  WalkStream(const IncrementLaw& law, double start, RngState rng)
      : law_(law), rng_(rng), lattice_(law.is_lattice()), h_(law.lattice_span()) {
    if (law.dimension() != 1) throw CapabilityError("WalkStream is one-dimensional");
    if (lattice_) {
      pos_index_ = to_lattice_index(law, start);
      lattice_sampler_ = law.make_lattice_sampler();
    } else {
      pos_ = start;
      continuum_sampler_ = law.make_continuum_sampler();
    }
  }

  // S_0 on the first call, then S_1, S_2, ...
  double next() {
    if (!started_) {
      started_ = true;
      return current();
    }
    if (lattice_) {
      std::visit([&](auto& s) { pos_index_ += s.next(rng_); }, lattice_sampler_);
    } else {
      std::visit([&](auto& s) { pos_ += s.next(rng_); }, continuum_sampler_);
    }
    return current();
  }

  double current() const {
    return lattice_ ? static_cast<double>(pos_index_) * h_ : pos_;
  }

  static std::int64_t to_lattice_index(const IncrementLaw& law, double start) {
    const double q = start / law.lattice_span();
    const double r = std::nearbyint(q);
    if (std::abs(q - r) > 1e-9)
      throw ConfigError("start point is not on the walk's lattice");
    return static_cast<std::int64_t>(r);
  }

 private:
  const IncrementLaw& law_;
  RngState rng_;
  bool lattice_;
  double h_;
  bool started_ = false;
  double pos_ = 0.0;
  std::int64_t pos_index_ = 0;
  LatticeSampler lattice_sampler_;
  ContinuumSampler continuum_sampler_;
};

inline std::vector<double> walk_positions(const IncrementLaw& law, double start, RngState rng,
                                          std::size_t n_positions) {
  WalkStream stream(law, start, rng);
  std::vector<double> out;
  out.reserve(n_positions);
  for (std::size_t i = 0; i < n_positions; ++i) out.push_back(stream.next());
  return out;
}

// --- contract operations ----------------------------------------------------

struct CrossingsResult {
  std::vector<CrossingEvent> events;
  RunStatus status;
};

namespace detail {

template <class Sampler, class Value>
CrossingsResult crossings_impl(Sampler sampler, RngState rng, Value start, double scale,
                               std::uint64_t max_events, std::uint64_t max_steps) {
  CrossingsResult out;
  Value pos = start;
  std::uint64_t steps_left = max_steps;
  std::uint64_t time = 0;
  CrossInfo<Value> info;
  for (std::uint64_t n = 1; n <= max_events; ++n) {
    const std::uint64_t before = steps_left;
    if (!advance_to_crossing<CrossMode::any>(sampler, rng, pos, steps_left, info)) {
      out.status.budget_exhausted = true;
      break;
    }
    time += before - steps_left;
    out.events.push_back({n, time, static_cast<double>(info.undershoot) * scale,
                          static_cast<double>(info.overshoot) * scale, info.direction});
  }
  out.status.steps = max_steps - steps_left;
  return out;
}

}  // namespace detail

// The first max_events zero-level crossings of a fresh walk from `start`.
inline CrossingsResult crossings(const IncrementLaw& law, double start, RngState rng,
                                 std::uint64_t max_events,
                                 std::uint64_t max_steps = kDefaultStepBudget) {
  if (law.dimension() != 1) throw CapabilityError("crossings: one-dimensional walks only");
  if (law.is_lattice()) {
    const std::int64_t s0 = WalkStream::to_lattice_index(law, start);
    return with_lattice_sampler(law, [&](auto sampler) {
      return detail::crossings_impl(sampler, rng, s0, law.lattice_span(), max_events, max_steps);
    });
  }
  return with_continuum_sampler(law, [&](auto sampler) {
    return detail::crossings_impl(sampler, rng, start, 1.0, max_events, max_steps);
  });
}

// Same extraction over a fully materialized path (replay oracle surface).
inline std::vector<CrossingEvent> crossings_on_path(std::span<const double> path) {
  std::vector<CrossingEvent> events;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double prev = path[k - 1], cur = path[k];
    if ((prev < 0.0) != (cur < 0.0)) {
      events.push_back({events.size() + 1, k, prev, cur,
                        cur < 0.0 ? Direction::down : Direction::up});
    }
  }
  return events;
}

struct EntranceExitResult {
  std::vector<EntranceExitEvent> events;
  RunStatus status;
};

inline EntranceExitResult entrance_exit_events(const IncrementLaw& law, double start,
                                               RngState rng, const SetSpec& A,
                                               std::uint64_t max_events,
                                               std::uint64_t max_steps = kDefaultStepBudget) {
  if (law.dimension() != 1 || A.dimension() != 1)
    throw CapabilityError("entrance_exit_events: use the multi-d engine for d >= 2");
  EntranceExitResult out;
  std::uint64_t steps_left = max_steps;
  std::uint64_t time = 0;
  const auto run = [&](auto sampler, auto pos, double scale) {
    using Value = decltype(pos);
    const auto member = [&](Value v) { return A.contains(static_cast<double>(v) * scale); };
    Value exit_pt{}, entr_pt{};
    for (std::uint64_t n = 1; n <= max_events; ++n) {
      const std::uint64_t before = steps_left;
      if (!advance_to_entrance(sampler, rng, pos, steps_left, member, exit_pt, entr_pt)) {
        out.status.budget_exhausted = true;
        break;
      }
      time += before - steps_left;
      out.events.push_back({time, static_cast<double>(exit_pt) * scale,
                            static_cast<double>(entr_pt) * scale});
    }
  };
  if (law.is_lattice()) {
    const std::int64_t s0 = WalkStream::to_lattice_index(law, start);
    with_lattice_sampler(law, [&](auto sampler) { run(sampler, s0, law.lattice_span()); });
  } else {
    with_continuum_sampler(law, [&](auto sampler) { run(sampler, start, 1.0); });
  }
  out.status.steps = max_steps - steps_left;
  return out;
}

inline std::vector<EntranceExitEvent> entrance_exit_events_on_path(std::span<const double> path,
                                                                   const SetSpec& A) {
  std::vector<EntranceExitEvent> events;
  for (std::size_t k = 1; k < path.size(); ++k) {
    if (!A.contains(path[k - 1]) && A.contains(path[k]))
      events.push_back({k, path[k - 1], path[k]});
  }
  return events;
}

// L_n: the number of zero-level crossings by time n.
inline std::uint64_t level_crossing_count(const IncrementLaw& law, double start, RngState rng,
                                          std::uint64_t n) {
  if (n < 1) throw ConfigError("level_crossing_count: n >= 1 required");
  const auto run = [&](auto sampler, auto pos) -> std::uint64_t {
    return count_crossings_for_steps(sampler, rng, pos, n, [](bool, auto) {});
  };
  if (law.is_lattice()) {
    std::int64_t s0 = WalkStream::to_lattice_index(law, start);
    return with_lattice_sampler(law, [&](auto sampler) { return run(sampler, s0); });
  }
  double s0 = start;
  return with_continuum_sampler(law, [&](auto sampler) { return run(sampler, s0); });
}

struct CycleCountResult {
  double value = 0.0;          // the count asked for
  std::uint64_t cycle_length = 0;  // T
  RunStatus status;
};

// L_T^up(a): up-crossings of level a over one cycle that ends at the first
// zero up-crossing time T (sum over transitions i -> i+1 with i <= T-1).
inline CycleCountResult upcrossings_of_level(const IncrementLaw& law, double start, RngState rng,
                                             double a,
                                             std::uint64_t max_steps = kDefaultStepBudget) {
  if (law.dimension() != 1) throw CapabilityError("upcrossings_of_level: d = 1 only");
  CycleCountResult out;
  std::uint64_t steps_left = max_steps;
  const auto run = [&](auto sampler, auto pos, auto level_lo) {
    using Value = decltype(pos);
    std::uint64_t count = 0;
    CrossInfo<Value> info;
    const bool done = advance_to_crossing<CrossMode::up>(
        sampler, rng, pos, steps_left, info, [&](Value prev, Value cur) {
          count += prev < level_lo && cur >= level_lo;
        });
    out.value = static_cast<double>(count);
    out.status.budget_exhausted = !done;
  };
  if (law.is_lattice()) {
    const double h = law.lattice_span();
    // S < a  <=>  index < ceil(a/h); exact integer comparisons in the loop.
    const std::int64_t level_lo = static_cast<std::int64_t>(std::ceil(a / h - 1e-12));
    const std::int64_t s0 = WalkStream::to_lattice_index(law, start);
    with_lattice_sampler(law, [&](auto sampler) { run(sampler, s0, level_lo); });
  } else {
    with_continuum_sampler(law, [&](auto sampler) { run(sampler, start, a); });
  }
  out.status.steps = max_steps - steps_left;
  out.cycle_length = out.status.steps;
  return out;
}

// Occupation count of B over one cycle: #{k in [0, T-1] : S_k in B}.
inline CycleCountResult occupation_until_T(const IncrementLaw& law, double start, RngState rng,
                                           const SetSpec& B,
                                           std::uint64_t max_steps = kDefaultStepBudget) {
  if (law.dimension() != 1 || B.dimension() != 1)
    throw CapabilityError("occupation_until_T: d = 1 only");
  CycleCountResult out;
  std::uint64_t steps_left = max_steps;
  const auto run = [&](auto sampler, auto pos, double scale) {
    using Value = decltype(pos);
    std::uint64_t count = 0;
    CrossInfo<Value> info;
    const bool done = advance_to_crossing<CrossMode::up>(
        sampler, rng, pos, steps_left, info, [&](Value prev, Value) {
          count += B.contains(static_cast<double>(prev) * scale);
        });
    out.value = static_cast<double>(count);
    out.status.budget_exhausted = !done;
  };
  if (law.is_lattice()) {
    const std::int64_t s0 = WalkStream::to_lattice_index(law, start);
    with_lattice_sampler(law, [&](auto sampler) { run(sampler, s0, law.lattice_span()); });
  } else {
    with_continuum_sampler(law, [&](auto sampler) { run(sampler, start, 1.0); });
  }
  out.status.steps = max_steps - steps_left;
  out.cycle_length = out.status.steps;
  return out;
}

}  // namespace walklab
