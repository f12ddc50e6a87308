#pragma once

// Multi-dimensional walk engine for product increment laws. Only entrance
// and exit event extraction is needed in d >= 2 (orthant experiments); these
// paths are not performance critical, so positions are plain double vectors.

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "walklab/errors.hpp"
#include "walklab/increment_laws.hpp"
#include "walklab/rng.hpp"
#include "walklab/set_spec.hpp"
#include "walklab/walk.hpp"

namespace walklab {

struct MdEntranceEvent {
  std::uint64_t time = 0;
  std::vector<double> exit_point;
  std::vector<double> entrance_point;
};

struct MdEntranceResult {
  std::vector<MdEntranceEvent> events;
  RunStatus status;
};

namespace detail {

// One coordinate of a product walk: lattice coordinates step in exact index
// units and scale by h on read-out.
class CoordinateSampler {
 public:
  explicit CoordinateSampler(const IncrementLaw& component) {
    if (component.is_lattice()) {
      h_ = component.lattice_span();
      lat_ = component.make_lattice_sampler();
      lattice_ = true;
    } else {
      cont_ = component.make_continuum_sampler();
    }
  }
  double next(RngState& rng) {
    if (lattice_)
      return static_cast<double>(std::visit([&](auto& s) { return s.next(rng); }, lat_)) * h_;
    return std::visit([&](auto& s) { return s.next(rng); }, cont_);
  }

 private:
  bool lattice_ = false;
  double h_ = 0.0;
  LatticeSampler lat_;
  ContinuumSampler cont_;
};

}  // namespace detail

// Entrance events of a d-dimensional product walk into A, with the same
// conventions as the 1-d engine.
inline MdEntranceResult entrance_exit_events_md(const IncrementLaw& law,
                                                std::span<const double> start, RngState rng,
                                                const SetSpec& A, std::uint64_t max_events,
                                                std::uint64_t max_steps = kDefaultStepBudget) {
  const int d = law.dimension();
  if (d < 2) throw CapabilityError("entrance_exit_events_md: use the 1-d engine for d = 1");
  if (A.dimension() != d || static_cast<int>(start.size()) != d)
    throw ConfigError("dimension mismatch between law, set, and start");
  std::vector<detail::CoordinateSampler> coords;
  coords.reserve(d);
  for (int c = 0; c < d; ++c) coords.emplace_back(law.component(c));

  MdEntranceResult out;
  std::vector<double> pos(start.begin(), start.end());
  std::vector<double> prev(pos);
  bool cur_in = A.contains(pos);
  for (std::uint64_t k = 1; k <= max_steps; ++k) {
    prev = pos;
    const bool prev_in = cur_in;
    for (int c = 0; c < d; ++c) pos[c] += coords[c].next(rng);
    cur_in = A.contains(pos);
    out.status.steps = k;
    if (!prev_in && cur_in) {
      out.events.push_back({k, prev, pos});
      if (out.events.size() >= max_events) return out;
    }
  }
  out.status.budget_exhausted = true;
  return out;
}

}  // namespace walklab
