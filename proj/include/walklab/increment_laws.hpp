#pragma once

// Increment distributions of the random walk. Each law provides exact (or
// 1e-10-accurate) upper/lower tails and moments for the closed-form
// invariant measures, plus a fast sampler for the Monte Carlo engine.
//
// Tail convention: tail_low(x) = P(X <= x) includes the atom at x, and
// tail_up(x) = P(X > x); in one dimension they always sum to one exactly.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "walklab/errors.hpp"
#include "walklab/fastmath.hpp"
#include "walklab/rational.hpp"
#include "walklab/rng.hpp"

namespace walklab {

enum class Family {
  lattice_pmf,
  laplace_unit,
  gaussian_std,
  uniform_symmetric,
  upward_exponential_mix,
  product_of_1d,
};

inline const char* family_name(Family f) {
  switch (f) {
    case Family::lattice_pmf: return "lattice_pmf";
    case Family::laplace_unit: return "laplace_unit";
    case Family::gaussian_std: return "gaussian_std";
    case Family::uniform_symmetric: return "uniform_symmetric";
    case Family::upward_exponential_mix: return "upward_exponential_mix";
    case Family::product_of_1d: return "product_of_1d";
  }
  return "?";
}

struct Moments {
  double mean = 0.0;
  double abs_mean = 0.0;       // E|X|
  double second_moment = 0.0;  // E X^2
};

struct LatticeAtom {
  Rational support;  // position of the atom
  Rational weight;   // probability mass
  std::int64_t index = 0;  // support / h
};

// ---------------------------------------------------------------------------
// Samplers. Lattice samplers emit positions in units of the span h (exact
// integer arithmetic over 1e10 steps); continuum samplers emit doubles.
// Increments are produced in batches: the generation loop pipelines (and
// vectorizes) far better than drawing inside the walk loop, and the sequence
// is a pure function of the call count, so buffering does not affect
// determinism.

// Chunk interface shared by the buffered samplers: chunk() hands out the
// not-yet-consumed part of the batch (refilling when empty) and consume(k)
// advances past the k increments the caller used. The hot kernels scan the
// chunk through a raw pointer, which is what lets the loops pipeline.
template <class Derived, class Value>
struct BufferedSampler {
  using value_type = Value;

  std::span<const Value> chunk(RngState& rng) {
    if (pos_ == buf_.size()) {
      buf_.resize(kSamplerBatch);
      static_cast<Derived*>(this)->refill(buf_.data(), kSamplerBatch, rng);
      pos_ = 0;
    }
    return {buf_.data() + pos_, buf_.size() - pos_};
  }
  void consume(std::size_t k) { pos_ += k; }

  Value next(RngState& rng) {
    const auto c = chunk(rng);
    consume(1);
    return c[0];
  }

 private:
  std::vector<Value> buf_;
  std::size_t pos_ = 0;
};

struct LatticeTwoAtomSampler : BufferedSampler<LatticeTwoAtomSampler, std::int64_t> {
  std::uint64_t threshold = 1ull << 63;  // P(first atom) * 2^64
  std::int64_t a = 1, b = -1;

  void refill(std::int64_t* out, std::size_t n, RngState& rng) {
    scratch_.resize(n);
    rng.fill_u64(scratch_.data(), n);
    const std::uint64_t* s = scratch_.data();
    const std::uint64_t thr = threshold;
    const std::int64_t va = a, vb = b;
    for (std::size_t i = 0; i < n; ++i) out[i] = s[i] < thr ? va : vb;
  }

 private:
  std::vector<std::uint64_t> scratch_;
};

struct LatticeTableSampler : BufferedSampler<LatticeTableSampler, std::int64_t> {
  std::vector<double> cum;  // inverse cdf by scan; pmfs here are tiny
  std::vector<std::int64_t> idx;

  void refill(std::int64_t* out, std::size_t n, RngState& rng) {
    scratch_.resize(n);
    rng.fill_u64(scratch_.data(), n);
    for (std::size_t i = 0; i < n; ++i) {
      const double u = static_cast<double>(scratch_[i] >> 11) * 0x1.0p-53;
      std::size_t k = 0;
      while (k + 1 < cum.size() && u >= cum[k]) ++k;
      out[i] = idx[k];
    }
  }

 private:
  std::vector<std::uint64_t> scratch_;
};

struct LaplaceSampler : BufferedSampler<LaplaceSampler, double> {
  void refill(double* out, std::size_t n, RngState& rng) {
    scratch_.resize(n);
    u_.resize(n);
    rng.fill_u64(scratch_.data(), n);
    const std::uint64_t* s = scratch_.data();
    double* u = u_.data();
    for (std::size_t i = 0; i < n; ++i)
      u[i] = static_cast<double>((s[i] >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    log_batch(u, out, n);
    // magnitude -log u >= 0; the spare low bit of the word carries the side
    for (std::size_t i = 0; i < n; ++i)
      out[i] = std::bit_cast<double>(std::bit_cast<std::uint64_t>(-out[i]) | (s[i] << 63));
  }

 private:
  std::vector<std::uint64_t> scratch_;
  std::vector<double> u_;
};

struct GaussianSampler : BufferedSampler<GaussianSampler, double> {
  void refill(double* out, std::size_t n, RngState& rng) {
    for (std::size_t i = 0; i < n; ++i) out[i] = rng.normal();
  }
};

struct UniformSampler : BufferedSampler<UniformSampler, double> {
  double half_width = 1.0;

  void refill(double* out, std::size_t n, RngState& rng) {
    scratch_.resize(n);
    rng.fill_u64(scratch_.data(), n);
    const std::uint64_t* s = scratch_.data();
    const double hw = half_width;
    for (std::size_t i = 0; i < n; ++i)
      out[i] = hw * (2.0 * (static_cast<double>(s[i] >> 11) * 0x1.0p-53) - 1.0);
  }

 private:
  std::vector<std::uint64_t> scratch_;
};

using LatticeSampler = std::variant<LatticeTwoAtomSampler, LatticeTableSampler>;
using ContinuumSampler = std::variant<LaplaceSampler, GaussianSampler, UniformSampler>;

// ---------------------------------------------------------------------------

class IncrementLaw {
 public:
  // pmf given as (support, weight) pairs; weights must sum to 1 exactly.
  static IncrementLaw lattice(std::vector<std::pair<Rational, Rational>> pmf) {
    IncrementLaw law;
    law.family_ = Family::lattice_pmf;
    if (pmf.empty()) throw ConfigError("lattice_pmf needs at least one atom");
    Rational total(0);
    Rational span(0);
    for (const auto& [s, w] : pmf) {
      if (w < Rational(0) || w.is_zero())
        throw ConfigError("lattice_pmf weights must be positive");
      total = total + w;
      span = Rational::gcd(span, s);
    }
    if (!(total == Rational(1)))
      throw ConfigError("lattice_pmf weights must sum to 1, got " + total.str());
    if (span.is_zero()) throw ConfigError("lattice_pmf must not be a point mass at 0");
    law.h_exact_ = span;
    law.h_ = span.to_double();
    for (const auto& [s, w] : pmf) {
      const Rational q = s / span;
      if (!q.is_integer()) throw NumericalError("lattice span does not divide an atom");
      law.atoms_.push_back({s, w, q.num()});
    }
    std::sort(law.atoms_.begin(), law.atoms_.end(),
              [](const LatticeAtom& x, const LatticeAtom& y) { return x.index < y.index; });
    for (std::size_t i = 1; i < law.atoms_.size(); ++i)
      if (law.atoms_[i].index == law.atoms_[i - 1].index)
        throw ConfigError("duplicate lattice_pmf support point");
    return law;
  }

  static IncrementLaw simple_walk() {  // +1/-1 with probability 1/2 each
    return lattice({{Rational(1), Rational(1, 2)}, {Rational(-1), Rational(1, 2)}});
  }

  static IncrementLaw laplace_unit() {
    IncrementLaw law;
    law.family_ = Family::laplace_unit;
    return law;
  }

  static IncrementLaw upward_exponential_mix() {
    // Same distribution as laplace_unit: +/-Exp(1) with probability 1/2 each.
    IncrementLaw law;
    law.family_ = Family::upward_exponential_mix;
    return law;
  }

  static IncrementLaw gaussian_std() {
    IncrementLaw law;
    law.family_ = Family::gaussian_std;
    return law;
  }

  static IncrementLaw uniform_symmetric(double half_width) {
    if (!(half_width > 0)) throw ConfigError("uniform_symmetric needs half_width > 0");
    IncrementLaw law;
    law.family_ = Family::uniform_symmetric;
    law.half_width_ = half_width;
    return law;
  }

  static IncrementLaw product(std::vector<IncrementLaw> components) {
    if (components.size() < 2) throw ConfigError("product_of_1d needs >= 2 components");
    IncrementLaw law;
    law.family_ = Family::product_of_1d;
    for (const auto& c : components)
      if (c.dimension() != 1) throw ConfigError("product_of_1d components must be 1-d");
    law.components_ = std::move(components);
    // A product of lattice laws is a lattice law; mixed products are not
    // supported (sub-lattice state spaces are out of scope).
    bool all_lattice = true, all_continuum = true;
    for (const auto& c : law.components_) {
      all_lattice = all_lattice && c.is_lattice();
      all_continuum = all_continuum && !c.is_lattice();
    }
    if (!all_lattice && !all_continuum)
      throw CapabilityError("product_of_1d components must be all lattice or all continuum");
    if (all_lattice) {
      law.h_exact_ = law.components_.front().h_exact_;
      for (const auto& c : law.components_)
        if (!(c.h_exact_ == law.h_exact_))
          throw CapabilityError("product_of_1d lattice components must share one span");
      law.h_ = law.h_exact_.to_double();
    }
    return law;
  }

  Family family() const { return family_; }
  int dimension() const {
    return family_ == Family::product_of_1d ? static_cast<int>(components_.size()) : 1;
  }
  bool is_lattice() const {
    if (family_ == Family::lattice_pmf) return true;
    if (family_ == Family::product_of_1d) return components_.front().is_lattice();
    return false;
  }
  double lattice_span() const { return is_lattice() ? h_ : 0.0; }
  const Rational& lattice_span_exact() const { return h_exact_; }
  const std::vector<LatticeAtom>& atoms() const { return atoms_; }
  const IncrementLaw& component(int i) const { return components_.at(i); }
  double half_width() const { return half_width_; }

  // --- tails (d = 1) -------------------------------------------------------

  double tail_up(double x) const {  // P(X > x)
    require_1d("tail_up");
    switch (family_) {
      case Family::lattice_pmf: {
        double t = 0.0;
        for (const LatticeAtom& a : atoms_)
          if (a.support.to_double() > x) t += a.weight.to_double();
        return t;
      }
      case Family::laplace_unit:
      case Family::upward_exponential_mix:
        return x >= 0 ? 0.5 * std::exp(-x) : 1.0 - 0.5 * std::exp(x);
      case Family::gaussian_std:
        return 0.5 * std::erfc(x * 0.70710678118654752440);
      case Family::uniform_symmetric: {
        if (x <= -half_width_) return 1.0;
        if (x >= half_width_) return 0.0;
        return (half_width_ - x) / (2.0 * half_width_);
      }
      default:
        throw CapabilityError("tail_up: unsupported family");
    }
  }

  double tail_low(double x) const { return 1.0 - tail_up(x); }  // P(X <= x)

  // P(X = x); zero for continuum families.
  double atom_mass(double x) const {
    if (family_ != Family::lattice_pmf) return 0.0;
    for (const LatticeAtom& a : atoms_)
      if (a.support.to_double() == x) return a.weight.to_double();
    return 0.0;
  }

  // Exact lattice tails in units of the span: P(X > i*h), P(X <= i*h).
  Rational tail_up_exact(std::int64_t index) const {
    require_family(Family::lattice_pmf, "tail_up_exact");
    Rational t(0);
    for (const LatticeAtom& a : atoms_)
      if (a.index > index) t = t + a.weight;
    return t;
  }
  Rational tail_low_exact(std::int64_t index) const {
    return Rational(1) - tail_up_exact(index);
  }
  Rational atom_mass_exact(std::int64_t index) const {
    require_family(Family::lattice_pmf, "atom_mass_exact");
    for (const LatticeAtom& a : atoms_)
      if (a.index == index) return a.weight;
    return Rational(0);
  }
  std::int64_t min_index() const { return atoms_.front().index; }
  std::int64_t max_index() const { return atoms_.back().index; }

  // --- multi-d tails (product laws); inequalities are coordinate-wise ------

  double tail_low_md(std::span<const double> x) const {  // P(X <= x)
    require_family(Family::product_of_1d, "tail_low_md");
    if (x.size() != components_.size()) throw ConfigError("point dimension mismatch");
    double p = 1.0;
    for (std::size_t i = 0; i < components_.size(); ++i) p *= components_[i].tail_low(x[i]);
    return p;
  }
  double tail_up_md(std::span<const double> x) const { return 1.0 - tail_low_md(x); }
  // P(X > x) coordinate-wise, used for the negative orthant.
  double strict_upper_md(std::span<const double> x) const {
    require_family(Family::product_of_1d, "strict_upper_md");
    if (x.size() != components_.size()) throw ConfigError("point dimension mismatch");
    double p = 1.0;
    for (std::size_t i = 0; i < components_.size(); ++i) p *= components_[i].tail_up(x[i]);
    return p;
  }

  // --- moments --------------------------------------------------------------

  Moments moments() const {
    require_1d("moments");
    switch (family_) {
      case Family::lattice_pmf: {
        Rational m(0), am(0), sm(0);
        for (const LatticeAtom& a : atoms_) {
          m = m + a.support * a.weight;
          am = am + a.support.abs() * a.weight;
          sm = sm + a.support * a.support * a.weight;
        }
        return {m.to_double(), am.to_double(), sm.to_double()};
      }
      case Family::laplace_unit:
      case Family::upward_exponential_mix:
        return {0.0, 1.0, 2.0};
      case Family::gaussian_std:
        return {0.0, std::sqrt(2.0 / 3.14159265358979323846), 1.0};
      case Family::uniform_symmetric:
        return {0.0, half_width_ / 2.0, half_width_ * half_width_ / 3.0};
      default:
        throw CapabilityError("moments: defined for 1-d families only");
    }
  }

  bool is_mean_zero() const {
    if (family_ == Family::product_of_1d) {
      for (const auto& c : components_)
        if (!c.is_mean_zero()) return false;
      return true;
    }
    if (family_ == Family::lattice_pmf) {
      Rational m(0);
      for (const LatticeAtom& a : atoms_) m = m + a.support * a.weight;
      return m.is_zero();
    }
    return true;  // the analytic families are symmetric
  }

  // Normalization constant: 2/E|X| for 1-d laws with finite mean, 1 otherwise.
  double c1() const {
    if (dimension() != 1) return 1.0;
    return 2.0 / moments().abs_mean;
  }

  // Upward skip-free: support contained in {h, 0, -h, -2h, ...}.
  bool is_upward_skip_free() const {
    if (family_ != Family::lattice_pmf) return false;
    return max_index() <= 1;
  }
  // P(X > . | X > 0) exponential; true for the two-sided unit Laplace.
  bool is_upward_exponential() const {
    return family_ == Family::laplace_unit || family_ == Family::upward_exponential_mix;
  }

  // --- sampling --------------------------------------------------------------

  LatticeSampler make_lattice_sampler() const {
    if (!is_lattice() || family_ == Family::product_of_1d)
      throw CapabilityError("make_lattice_sampler: not a 1-d lattice law");
    if (atoms_.size() == 2) {
      const long double p = static_cast<long double>(atoms_[0].weight.num()) /
                            static_cast<long double>(atoms_[0].weight.den());
      LatticeTwoAtomSampler s;
      s.threshold = static_cast<std::uint64_t>(p * 0x1.0p64L);
      s.a = atoms_[0].index;
      s.b = atoms_[1].index;
      return s;
    }
    LatticeTableSampler t;
    double c = 0.0;
    for (const LatticeAtom& a : atoms_) {
      c += a.weight.to_double();
      t.cum.push_back(c);
      t.idx.push_back(a.index);
    }
    t.cum.back() = 1.0;
    return t;
  }

  ContinuumSampler make_continuum_sampler() const {
    switch (family_) {
      case Family::laplace_unit:
      case Family::upward_exponential_mix:
        return LaplaceSampler{};
      case Family::gaussian_std:
        return GaussianSampler{};
      case Family::uniform_symmetric: {
        UniformSampler s;
        s.half_width = half_width_;
        return s;
      }
      default:
        throw CapabilityError("make_continuum_sampler: not a 1-d continuum law");
    }
  }

  // n i.i.d. draws as points (1-d laws and product laws, row-major).
  std::vector<double> sample(RngState& rng, std::size_t n) const;

 private:
  IncrementLaw() = default;
  void require_1d(const char* what) const {
    if (dimension() != 1) throw CapabilityError(std::string(what) + ": 1-d only");
  }
  void require_family(Family f, const char* what) const {
    if (family_ != f) throw CapabilityError(std::string(what) + ": wrong family");
  }

  Family family_ = Family::lattice_pmf;
  Rational h_exact_ = Rational(0);
  double h_ = 0.0;
  std::vector<LatticeAtom> atoms_;
  double half_width_ = 1.0;
  std::vector<IncrementLaw> components_;
};

// Calls f with a concrete (monomorphic) sampler plus the lattice span; the
// hot walk loops are instantiated once per sampler type.
template <class F>
decltype(auto) with_lattice_sampler(const IncrementLaw& law, F&& f) {
  auto s = law.make_lattice_sampler();
  return std::visit([&](auto sampler) -> decltype(auto) { return f(sampler); }, s);
}

template <class F>
decltype(auto) with_continuum_sampler(const IncrementLaw& law, F&& f) {
  auto s = law.make_continuum_sampler();
  return std::visit([&](auto sampler) -> decltype(auto) { return f(sampler); }, s);
}

inline std::vector<double> IncrementLaw::sample(RngState& rng, std::size_t n) const {
  if (n == 0) throw ConfigError("sample: n must be >= 1");
  std::vector<double> out;
  if (family_ == Family::product_of_1d) {
    out.reserve(n * components_.size());
    for (std::size_t i = 0; i < n; ++i)
      for (const auto& c : components_) out.push_back(c.sample(rng, 1)[0]);
    return out;
  }
  out.reserve(n);
  if (is_lattice()) {
    const double h = h_;
    with_lattice_sampler(*this, [&](auto sampler) {
      for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<double>(sampler.next(rng)) * h);
    });
  } else {
    with_continuum_sampler(*this, [&](auto sampler) {
      for (std::size_t i = 0; i < n; ++i) out.push_back(sampler.next(rng));
    });
  }
  return out;
}

}  // namespace walklab
