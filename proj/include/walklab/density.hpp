#pragma once

// Closed-form invariant measures of the crossing and entrance chains, as
// densities with respect to the normalized Haar measure on the walk's state
// space (each lattice point carries mass h; the continuum uses Lebesgue).
//
// pi      - invariant law of the two-sided overshoot chain
// pi_plus - invariant law of overshoots at up-crossings   (entrance into [0,inf))
// pi_minus- invariant law of overshoots at down-crossings (entrance into (-inf,0))
// lambda_A^entr / lambda_{A^c}^exit - entrance/exit measures of a general set
//
// All constructions are exact for lattice laws (rational arithmetic) and use
// analytic tails plus adaptive quadrature for the continuum families.

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "walklab/errors.hpp"
#include "walklab/increment_laws.hpp"
#include "walklab/quadrature.hpp"
#include "walklab/rng.hpp"
#include "walklab/set_spec.hpp"

namespace walklab {

class DensityOnGroup {
 public:
  static DensityOnGroup lattice(double h, std::int64_t lo, std::vector<double> atom_mass) {
    DensityOnGroup d;
    d.dim_ = 1;
    d.is_lattice_ = true;
    d.h_ = h;
    d.lo_index_ = lo;
    d.atom_mass_ = std::move(atom_mass);
    d.mass_finite_ = true;
    d.total_mass_ = 0.0;
    for (double m : d.atom_mass_) {
      if (m < 0) throw NumericalError("negative lattice density");
      d.total_mass_ += m;
    }
    d.build_lattice_cdf();
    return d;
  }

  static DensityOnGroup continuum(std::function<double(double)> f, double lo, double hi,
                                  std::vector<double> breaks) {
    DensityOnGroup d;
    d.dim_ = 1;
    d.is_lattice_ = false;
    d.f_ = std::move(f);
    d.lo_ = lo;
    d.hi_ = hi;
    d.breaks_ = std::move(breaks);
    d.mass_finite_ = true;
    d.build_panels();
    return d;
  }

  // Multi-dimensional (or otherwise non-normalizable) density: pointwise
  // evaluation only, flagged as carrying infinite total mass.
  static DensityOnGroup infinite_mass(int dim, std::function<double(std::span<const double>)> f) {
    DensityOnGroup d;
    d.dim_ = dim;
    d.is_lattice_ = false;
    d.f_md_ = std::move(f);
    d.mass_finite_ = false;
    d.total_mass_ = std::numeric_limits<double>::infinity();
    return d;
  }

  int dimension() const { return dim_; }
  bool is_lattice() const { return is_lattice_; }
  bool mass_finite() const { return mass_finite_; }
  double total_mass() const { return total_mass_; }
  double h() const { return h_; }
  std::int64_t lo_index() const { return lo_index_; }
  std::int64_t hi_index() const { return lo_index_ + static_cast<std::int64_t>(atom_mass_.size()) - 1; }
  double support_lo() const { return is_lattice_ ? static_cast<double>(lo_index_) * h_ : lo_; }
  double support_hi() const { return is_lattice_ ? static_cast<double>(hi_index()) * h_ : hi_; }

  // Mass of a single lattice atom (h * density there).
  double mass_of_index(std::int64_t index) const {
    require_lattice("mass_of_index");
    if (index < lo_index_ || index > hi_index()) return 0.0;
    return atom_mass_[static_cast<std::size_t>(index - lo_index_)];
  }

  // Density w.r.t. the normalized Haar measure.
  double density_at(double x) const {
    if (dim_ != 1) throw CapabilityError("density_at: use the span overload for d >= 2");
    if (is_lattice_) {
      const double q = x / h_;
      const double r = std::nearbyint(q);
      if (std::abs(q - r) > 1e-9) return 0.0;
      return mass_of_index(static_cast<std::int64_t>(r)) / h_;
    }
    if (x < lo_ || x > hi_) return 0.0;
    return f_(x);
  }

  double density_at(std::span<const double> x) const {
    if (dim_ == 1) return density_at(x[0]);
    return f_md_(x);
  }

  // Measure of [a, b].
  double integrate(double a, double b) const {
    require_finite("integrate");
    if (dim_ != 1) throw CapabilityError("integrate: d = 1 only");
    if (!(a <= b)) return 0.0;
    if (is_lattice_) {
      double total = 0.0;
      for (std::int64_t i = lo_index_; i <= hi_index(); ++i) {
        const double x = static_cast<double>(i) * h_;
        if (x >= a && x <= b) total += atom_mass_[static_cast<std::size_t>(i - lo_index_)];
      }
      return total;
    }
    return integrate_with_breaks(f_, std::max(a, lo_), std::min(b, hi_), breaks_);
  }

  // Measure of (-inf, x].
  double cdf(double x) const {
    require_finite("cdf");
    if (is_lattice_) {
      double total = 0.0;
      for (std::int64_t i = lo_index_; i <= hi_index(); ++i)
        if (static_cast<double>(i) * h_ <= x) total += atom_mass_[static_cast<std::size_t>(i - lo_index_)];
      return total;
    }
    if (x <= lo_) return 0.0;
    if (x >= hi_) return total_mass_;
    const std::size_t p = panel_of(x);
    return panel_cum_[p] + adaptive_simpson(f_, panel_x_[p], x, 1e-13);
  }

  // integral of |y| against the measure
  double mean_abs() const {
    require_finite("mean_abs");
    if (is_lattice_) {
      double total = 0.0;
      for (std::int64_t i = lo_index_; i <= hi_index(); ++i)
        total += std::abs(static_cast<double>(i) * h_) * atom_mass_[static_cast<std::size_t>(i - lo_index_)];
      return total;
    }
    const auto g = [this](double y) { return std::abs(y) * f_(y); };
    std::vector<double> br = breaks_;
    br.push_back(0.0);
    return integrate_with_breaks(g, lo_, hi_, br);
  }

  // One draw. Lattice: exact inverse cdf over the atom table. Continuum:
  // inverse cdf, bisected on the integrated density until the bracket is
  // below 1e-12.
  double sample1(RngState& rng) const {
    require_finite("sample1");
    if (!(total_mass_ > 0)) throw CapabilityError("sampling from a zero measure");
    if (is_lattice_) {
      const double u = rng.u01() * total_mass_;
      std::size_t i = 0;
      while (i + 1 < lattice_cdf_.size() && u >= lattice_cdf_[i]) ++i;
      return static_cast<double>(lo_index_ + static_cast<std::int64_t>(i)) * h_;
    }
    const double u = rng.u01_open() * total_mass_;
    std::size_t p = panel_of_cum(u);
    double a = panel_x_[p], b = panel_x_[p + 1];
    const double base = panel_cum_[p];
    while (b - a > 1e-12) {
      const double m = 0.5 * (a + b);
      const double cm = base + adaptive_simpson(f_, panel_x_[p], m, 1e-14);
      if (cm < u)
        a = m;
      else
        b = m;
    }
    return 0.5 * (a + b);
  }

  std::vector<double> sample(RngState& rng, std::size_t n) const {
    std::vector<double> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(sample1(rng));
    return out;
  }

 private:
  void require_lattice(const char* what) const {
    if (!is_lattice_) throw CapabilityError(std::string(what) + ": lattice densities only");
  }
  void require_finite(const char* what) const {
    if (!mass_finite_)
      throw CapabilityError(std::string(what) + ": density carries infinite total mass");
  }

  void build_lattice_cdf() {
    lattice_cdf_.clear();
    double c = 0.0;
    for (double m : atom_mass_) {
      c += m;
      lattice_cdf_.push_back(c);
    }
    if (!lattice_cdf_.empty()) lattice_cdf_.back() = total_mass_;
  }

  void build_panels() {
    std::vector<double> cuts{lo_};
    for (double c : breaks_)
      if (c > lo_ && c < hi_) cuts.push_back(c);
    cuts.push_back(hi_);
    std::sort(cuts.begin(), cuts.end());
    constexpr int kPanelsTotal = 2048;
    panel_x_.clear();
    for (std::size_t s = 1; s < cuts.size(); ++s) {
      const double a = cuts[s - 1], b = cuts[s];
      const int k = std::max(8, static_cast<int>(kPanelsTotal * (b - a) / (hi_ - lo_)));
      for (int i = 0; i < k; ++i)
        panel_x_.push_back(a + (b - a) * static_cast<double>(i) / static_cast<double>(k));
    }
    panel_x_.push_back(hi_);
    panel_cum_.assign(panel_x_.size(), 0.0);
    double c = 0.0;
    for (std::size_t i = 0; i + 1 < panel_x_.size(); ++i) {
      panel_cum_[i] = c;
      c += adaptive_simpson(f_, panel_x_[i], panel_x_[i + 1], 1e-14);
    }
    panel_cum_.back() = c;
    total_mass_ = c;
  }

  std::size_t panel_of(double x) const {
    const auto it = std::upper_bound(panel_x_.begin(), panel_x_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - panel_x_.begin());
    return i == 0 ? 0 : std::min(i - 1, panel_x_.size() - 2);
  }

  std::size_t panel_of_cum(double u) const {
    const auto it = std::upper_bound(panel_cum_.begin(), panel_cum_.end(), u);
    const std::size_t i = static_cast<std::size_t>(it - panel_cum_.begin());
    return i == 0 ? 0 : std::min(i - 1, panel_cum_.size() - 2);
  }

  int dim_ = 1;
  bool is_lattice_ = false;
  bool mass_finite_ = true;
  double total_mass_ = 0.0;
  // lattice payload
  double h_ = 0.0;
  std::int64_t lo_index_ = 0;
  std::vector<double> atom_mass_;
  std::vector<double> lattice_cdf_;
  // continuum payload
  std::function<double(double)> f_;
  double lo_ = 0.0, hi_ = 0.0;
  std::vector<double> breaks_;
  std::vector<double> panel_x_;
  std::vector<double> panel_cum_;
  // multi-d payload
  std::function<double(std::span<const double>)> f_md_;
};

namespace detail {

// |x| beyond which P(|X| > x) < 1e-18, per family.
inline double support_cutoff(const IncrementLaw& law) {
  switch (law.family()) {
    case Family::laplace_unit:
    case Family::upward_exponential_mix:
      return 42.0;
    case Family::gaussian_std:
      return 9.5;
    case Family::uniform_symmetric:
      return law.half_width();
    default:
      throw CapabilityError("support_cutoff: continuum families only");
  }
}

// x-positions where the tail functions have kinks.
inline std::vector<double> family_kinks(const IncrementLaw& law) {
  switch (law.family()) {
    case Family::laplace_unit:
    case Family::upward_exponential_mix:
      return {0.0};
    case Family::gaussian_std:
      return {};
    case Family::uniform_symmetric:
      return {-law.half_width(), law.half_width()};
    default:
      return {};
  }
}

inline void require_1d_mean_zero_for_probability(const IncrementLaw& law, const char* what) {
  if (law.dimension() != 1) throw CapabilityError(std::string(what) + ": d = 1 only");
  if (!law.is_mean_zero())
    throw CapabilityError(std::string(what) + ": law must be mean-zero");
}

}  // namespace detail

// --- closed-form invariant measures ------------------------------------------

// pi: density (c1/2) [ P(X > x) on x >= 0 ; P(X <= x) on x < 0 ]. A
// probability exactly when the mean exists (and is zero).
inline DensityOnGroup pi_density(const IncrementLaw& law) {
  detail::require_1d_mean_zero_for_probability(law, "pi_density");
  const double c1 = law.c1();
  if (law.is_lattice()) {
    const double h = law.lattice_span();
    const std::int64_t lo = law.min_index();
    const std::int64_t hi = law.max_index() - 1;
    std::vector<double> mass;
    for (std::int64_t i = lo; i <= hi; ++i) {
      const Rational tail = i >= 0 ? law.tail_up_exact(i) : law.tail_low_exact(i);
      mass.push_back(0.5 * c1 * tail.to_double() * h);
    }
    return DensityOnGroup::lattice(h, lo, std::move(mass));
  }
  const double cut = detail::support_cutoff(law);
  auto kinks = detail::family_kinks(law);
  kinks.push_back(0.0);
  IncrementLaw local = law;
  return DensityOnGroup::continuum(
      [local, c1](double x) {
        return 0.5 * c1 * (x >= 0.0 ? local.tail_up(x) : local.tail_low(x));
      },
      -cut, cut, std::move(kinks));
}

// pi_plus: c1 * (1 - P(X <= x)) on the nonnegative orthant. For d = 1 and a
// mean-zero law this is the probability law of overshoots at up-crossings.
inline DensityOnGroup pi_plus_density(const IncrementLaw& law) {
  if (law.dimension() >= 2) {
    IncrementLaw local = law;
    return DensityOnGroup::infinite_mass(law.dimension(), [local](std::span<const double> x) {
      for (double v : x)
        if (v < 0.0) return 0.0;
      return local.tail_up_md(x);  // c1 = 1 for d >= 2
    });
  }
  detail::require_1d_mean_zero_for_probability(law, "pi_plus_density");
  const double c1 = law.c1();
  if (law.is_lattice()) {
    const double h = law.lattice_span();
    const std::int64_t hi = std::max<std::int64_t>(law.max_index() - 1, 0);
    std::vector<double> mass;
    for (std::int64_t i = 0; i <= hi; ++i)
      mass.push_back(c1 * law.tail_up_exact(i).to_double() * h);
    return DensityOnGroup::lattice(h, 0, std::move(mass));
  }
  const double cut = detail::support_cutoff(law);
  auto kinks = detail::family_kinks(law);
  IncrementLaw local = law;
  return DensityOnGroup::continuum([local, c1](double x) { return c1 * local.tail_up(x); }, 0.0,
                                   cut, std::move(kinks));
}

// pi_minus: c1 * (1 - P(X > x)) on the negative orthant.
inline DensityOnGroup pi_minus_density(const IncrementLaw& law) {
  if (law.dimension() >= 2) {
    IncrementLaw local = law;
    return DensityOnGroup::infinite_mass(law.dimension(), [local](std::span<const double> x) {
      for (double v : x)
        if (v >= 0.0) return 0.0;
      return 1.0 - local.strict_upper_md(x);
    });
  }
  detail::require_1d_mean_zero_for_probability(law, "pi_minus_density");
  const double c1 = law.c1();
  if (law.is_lattice()) {
    const double h = law.lattice_span();
    const std::int64_t lo = law.min_index();
    std::vector<double> mass;
    for (std::int64_t i = lo; i <= -1; ++i)
      mass.push_back(c1 * law.tail_low_exact(i).to_double() * h);
    return DensityOnGroup::lattice(h, lo, std::move(mass));
  }
  const double cut = detail::support_cutoff(law);
  auto kinks = detail::family_kinks(law);
  IncrementLaw local = law;
  return DensityOnGroup::continuum([local, c1](double x) { return c1 * local.tail_low(x); }, -cut,
                                   0.0, std::move(kinks));
}

namespace detail {

// P(X < t) = P(X <= t) - P(X = t)
inline double strict_low(const IncrementLaw& law, double t) {
  return law.tail_low(t) - law.atom_mass(t);
}
// P(X >= t)
inline double tail_up_closed(const IncrementLaw& law, double t) {
  return law.tail_up(t) + law.atom_mass(t);
}

// P(X in x - A^c) for the supported 1-d set kinds.
inline double entrance_weight_1d(const IncrementLaw& law, const SetSpec& A, double x) {
  switch (A.kind()) {
    case SetSpec::Kind::half_line_nonneg:  // A^c = (-inf, 0): x - A^c = (x, inf)
      return law.tail_up(x);
    case SetSpec::Kind::half_line_neg:  // A^c = [0, inf): x - A^c = (-inf, x]
      return law.tail_low(x);
    case SetSpec::Kind::box: {  // A^c = (-inf,l) u (u,inf)
      const double l = A.lower()[0], u = A.upper()[0];
      return law.tail_up(x - l) + strict_low(law, x - u);
    }
    case SetSpec::Kind::half_open_interval: {  // A^c = (-inf,l) u [u,inf)
      const double l = A.lower()[0], u = A.upper()[0];
      return law.tail_up(x - l) + tail_up_closed(law, x - u);
    }
    case SetSpec::Kind::lattice_mask: {  // P = 1 - sum_{a in A} P(X = x - a)
      if (!law.is_lattice())
        throw CapabilityError("lattice_mask entrance density needs a lattice law");
      double inside = 0.0;
      for (std::int64_t p : A.mask_points())
        inside += law.atom_mass(x - static_cast<double>(p) * A.mask_span());
      return 1.0 - inside;
    }
    default:
      throw CapabilityError("entrance density: unsupported set kind for d = 1");
  }
}

// P(X in A - x) for the supported 1-d set kinds.
inline double exit_weight_1d(const IncrementLaw& law, const SetSpec& A, double x) {
  switch (A.kind()) {
    case SetSpec::Kind::half_line_nonneg:  // A - x = [-x, inf)
      return tail_up_closed(law, -x);
    case SetSpec::Kind::half_line_neg:  // A - x = (-inf, -x)
      return strict_low(law, -x);
    case SetSpec::Kind::box: {  // A - x = [l-x, u-x]
      const double l = A.lower()[0], u = A.upper()[0];
      return law.tail_low(u - x) - strict_low(law, l - x);
    }
    case SetSpec::Kind::half_open_interval: {  // A - x = [l-x, u-x)
      const double l = A.lower()[0], u = A.upper()[0];
      return strict_low(law, u - x) - strict_low(law, l - x);
    }
    case SetSpec::Kind::lattice_mask: {
      if (!law.is_lattice())
        throw CapabilityError("lattice_mask exit density needs a lattice law");
      double inside = 0.0;
      for (std::int64_t p : A.mask_points())
        inside += law.atom_mass(static_cast<double>(p) * A.mask_span() - x);
      return inside;
    }
    default:
      throw CapabilityError("exit density: unsupported set kind for d = 1");
  }
}

}  // namespace detail

// lambda_A^entr: density x -> P(X in x - A^c) on A, w.r.t. Haar measure.
inline DensityOnGroup lambda_entr_density(const IncrementLaw& law, const SetSpec& A) {
  if (A.is_complement())
    throw CapabilityError("entrance density for complemented sets is not supported");
  if (law.dimension() >= 2) {
    IncrementLaw local = law;
    if (A.kind() == SetSpec::Kind::orthant_nonneg) {
      return DensityOnGroup::infinite_mass(law.dimension(), [local](std::span<const double> x) {
        for (double v : x)
          if (v < 0.0) return 0.0;
        return local.tail_up_md(x);
      });
    }
    if (A.kind() == SetSpec::Kind::orthant_neg) {
      return DensityOnGroup::infinite_mass(law.dimension(), [local](std::span<const double> x) {
        for (double v : x)
          if (v >= 0.0) return 0.0;
        return 1.0 - local.strict_upper_md(x);
      });
    }
    throw CapabilityError("entrance density in d >= 2: orthants only");
  }
  if (law.is_lattice()) {
    const double h = law.lattice_span();
    // Positive weight requires a one-step jump over the boundary, so the
    // support is contained in [min A-ish bound, ...]; scan a safe index range.
    std::int64_t lo, hi;
    switch (A.kind()) {
      case SetSpec::Kind::half_line_nonneg:
        lo = 0;
        hi = std::max<std::int64_t>(law.max_index() - 1, 0);
        break;
      case SetSpec::Kind::half_line_neg:
        lo = law.min_index();
        hi = -1;
        break;
      case SetSpec::Kind::box:
      case SetSpec::Kind::half_open_interval: {
        lo = static_cast<std::int64_t>(std::ceil(A.lower()[0] / h - 1e-12));
        const bool open_hi = A.kind() == SetSpec::Kind::half_open_interval;
        hi = open_hi ? static_cast<std::int64_t>(std::ceil(A.upper()[0] / h - 1e-12)) - 1
                     : static_cast<std::int64_t>(std::floor(A.upper()[0] / h + 1e-12));
        break;
      }
      case SetSpec::Kind::lattice_mask:
        lo = A.mask_points().front();
        hi = A.mask_points().back();
        break;
      default:
        throw CapabilityError("entrance density: unsupported set kind");
    }
    if (hi < lo) throw CapabilityError("entrance density: set contains no lattice point");
    std::vector<double> mass;
    for (std::int64_t i = lo; i <= hi; ++i) {
      const double x = static_cast<double>(i) * h;
      const bool in_A = A.kind() == SetSpec::Kind::lattice_mask ? A.contains(x) : true;
      mass.push_back(in_A ? detail::entrance_weight_1d(law, A, x) * h : 0.0);
    }
    return DensityOnGroup::lattice(h, lo, std::move(mass));
  }
  // continuum
  const double cut = detail::support_cutoff(law);
  double lo, hi;
  switch (A.kind()) {
    case SetSpec::Kind::half_line_nonneg:
      lo = 0.0;
      hi = cut;
      break;
    case SetSpec::Kind::half_line_neg:
      lo = -cut;
      hi = 0.0;
      break;
    case SetSpec::Kind::box:
    case SetSpec::Kind::half_open_interval:
      lo = A.lower()[0];
      hi = A.upper()[0];
      break;
    default:
      throw CapabilityError("entrance density: unsupported (law, set) pair");
  }
  std::vector<double> kinks;
  for (double k : detail::family_kinks(law)) {
    kinks.push_back(k);  // half-line case: kink at x with x - 0 = k
    if (A.kind() == SetSpec::Kind::box || A.kind() == SetSpec::Kind::half_open_interval) {
      kinks.push_back(A.lower()[0] + k);
      kinks.push_back(A.upper()[0] + k);
    }
  }
  IncrementLaw local = law;
  SetSpec set = A;
  return DensityOnGroup::continuum(
      [local, set](double x) { return detail::entrance_weight_1d(local, set, x); }, lo, hi,
      std::move(kinks));
}

// lambda_{A^c}^exit: density x -> P(X in A - x) on A^c.
inline DensityOnGroup lambda_exit_density(const IncrementLaw& law, const SetSpec& A) {
  if (A.is_complement())
    throw CapabilityError("exit density for complemented sets is not supported");
  if (law.dimension() >= 2) {
    IncrementLaw local = law;
    if (A.kind() == SetSpec::Kind::orthant_nonneg) {
      return DensityOnGroup::infinite_mass(law.dimension(), [local](std::span<const double> x) {
        bool in_A = true;
        for (double v : x) in_A = in_A && v >= 0.0;
        if (in_A) return 0.0;  // density lives on A^c
        double p = 1.0;
        for (std::size_t i = 0; i < x.size(); ++i)
          p *= detail::tail_up_closed(local.component(static_cast<int>(i)), -x[i]);
        return p;
      });
    }
    throw CapabilityError("exit density in d >= 2: nonnegative orthant only");
  }
  if (law.is_lattice()) {
    const double h = law.lattice_span();
    std::int64_t lo, hi;
    switch (A.kind()) {
      case SetSpec::Kind::half_line_nonneg:  // A^c = (-inf,0); weight needs -x <= max support
        lo = -law.max_index();
        hi = -1;
        break;
      case SetSpec::Kind::half_line_neg:  // A^c = [0,inf); weight needs -x >= min support
        lo = 0;
        hi = -law.min_index() - 1;
        break;
      case SetSpec::Kind::box:
      case SetSpec::Kind::half_open_interval:
      case SetSpec::Kind::lattice_mask: {
        // A bounded: reachable exit states lie within one jump of A.
        double a_lo, a_hi;
        if (A.kind() == SetSpec::Kind::lattice_mask) {
          a_lo = static_cast<double>(A.mask_points().front()) * A.mask_span();
          a_hi = static_cast<double>(A.mask_points().back()) * A.mask_span();
        } else {
          a_lo = A.lower()[0];
          a_hi = A.upper()[0];
        }
        lo = static_cast<std::int64_t>(std::floor(a_lo / h)) - law.max_index();
        hi = static_cast<std::int64_t>(std::ceil(a_hi / h)) - law.min_index();
        break;
      }
      default:
        throw CapabilityError("exit density: unsupported set kind");
    }
    if (hi < lo) throw CapabilityError("exit density: empty support");
    std::vector<double> mass;
    for (std::int64_t i = lo; i <= hi; ++i) {
      const double x = static_cast<double>(i) * h;
      mass.push_back(A.contains(x) ? 0.0 : detail::exit_weight_1d(law, A, x) * h);
    }
    return DensityOnGroup::lattice(h, lo, std::move(mass));
  }
  const double cut = detail::support_cutoff(law);
  double lo, hi;
  switch (A.kind()) {
    case SetSpec::Kind::half_line_nonneg:
      lo = -cut;
      hi = 0.0;
      break;
    case SetSpec::Kind::half_line_neg:
      lo = 0.0;
      hi = cut;
      break;
    case SetSpec::Kind::box:
    case SetSpec::Kind::half_open_interval:
      lo = A.lower()[0] - cut;
      hi = A.upper()[0] + cut;
      break;
    default:
      throw CapabilityError("exit density: unsupported (law, set) pair");
  }
  std::vector<double> kinks{A.kind() == SetSpec::Kind::half_line_nonneg ||
                                    A.kind() == SetSpec::Kind::half_line_neg
                                ? 0.0
                                : A.lower()[0],
                            A.kind() == SetSpec::Kind::box ||
                                    A.kind() == SetSpec::Kind::half_open_interval
                                ? A.upper()[0]
                                : 0.0};
  for (double k : detail::family_kinks(law)) {
    kinks.push_back(-k);
    if (A.kind() == SetSpec::Kind::box || A.kind() == SetSpec::Kind::half_open_interval) {
      kinks.push_back(A.lower()[0] - k);
      kinks.push_back(A.upper()[0] - k);
    }
  }
  IncrementLaw local = law;
  SetSpec set = A;
  return DensityOnGroup::continuum(
      [local, set](double x) {
        return set.contains(x) ? 0.0 : detail::exit_weight_1d(local, set, x);
      },
      lo, hi, std::move(kinks));
}

// sigma^2 / (2 E|X|), cross-checked against two independent routes: the
// first absolute moment of pi by summation/quadrature, and the pair of
// integral identities for the means of pi_plus and pi_minus.
struct AbsMomentReport {
  double value = 0.0;           // sigma^2 / (2 E|X|)
  double via_pi = 0.0;          // integral |y| d pi
  double via_integrals = 0.0;   // (E1 + E2) route
};

inline AbsMomentReport abs_first_moment_pi(const IncrementLaw& law) {
  detail::require_1d_mean_zero_for_probability(law, "abs_first_moment_pi");
  const Moments m = law.moments();
  if (!(m.second_moment < std::numeric_limits<double>::infinity()))
    throw CapabilityError("abs_first_moment_pi: infinite variance");
  AbsMomentReport r;
  r.value = m.second_moment / (2.0 * m.abs_mean);
  r.via_pi = pi_density(law).mean_abs();

  const double inv_abs = 1.0 / m.abs_mean;
  if (law.is_lattice()) {
    const double h = law.lattice_span();
    // integral_0^inf (y - h/2) P(X > y) dy   = sum_m m h^2 P(X > m h)
    // integral_0^inf (y + h/2) P(-X > y) dy  = sum_m (m+1) h^2 P(X < -m h)
    double e1 = 0.0, e2 = 0.0;
    for (std::int64_t i = 0; i <= law.max_index(); ++i)
      e1 += static_cast<double>(i) * h * h * law.tail_up_exact(i).to_double();
    for (std::int64_t i = 0; i <= -law.min_index(); ++i) {
      const Rational below = law.tail_low_exact(-i) - law.atom_mass_exact(-i);
      e2 += static_cast<double>(i + 1) * h * h * below.to_double();
    }
    r.via_integrals = inv_abs * (e1 + e2);
  } else {
    const double cut = detail::support_cutoff(law);
    const auto kinks = detail::family_kinks(law);
    IncrementLaw local = law;
    const double e1 = integrate_with_breaks(
        [&local](double y) { return y * local.tail_up(y); }, 0.0, cut, kinks);
    const double e2 = integrate_with_breaks(
        [&local](double y) { return y * local.tail_low(-y); }, 0.0, cut, kinks);
    // h = 0 in the continuum, so the half-span corrections vanish.
    r.via_integrals = inv_abs * (e1 + e2);
  }

  const double scale = std::max(1.0, std::abs(r.value));
  if (std::abs(r.via_pi - r.value) > 1e-8 * scale ||
      std::abs(r.via_integrals - r.value) > 1e-8 * scale)
    throw NumericalError("abs_first_moment_pi: independent routes disagree");
  return r;
}

inline std::vector<double> sample_from(const DensityOnGroup& density, RngState& rng,
                                       std::size_t n) {
  return density.sample(rng, n);
}

}  // namespace walklab
