#pragma once

// Target sets for entrance/exit sampling. Membership is total and pure;
// complement() is always available. Inequalities between points in R^d are
// coordinate-wise, and boundaries follow the walk conventions: half lines
// and orthants carry their boundary on the nonnegative side.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "walklab/errors.hpp"
#include "walklab/increment_laws.hpp"

namespace walklab {

class SetSpec {
 public:
  enum class Kind {
    half_line_nonneg,    // [0, inf)
    half_line_neg,       // (-inf, 0)
    orthant_nonneg,      // [0, inf)^d
    orthant_neg,         // (-inf, 0)^d
    box,                 // closed [lower, upper]
    half_open_interval,  // [lower, upper)
    lattice_mask,        // finite set of lattice points, d = 1
  };

  static SetSpec half_line_nonneg() { return SetSpec(Kind::half_line_nonneg, 1); }
  static SetSpec half_line_neg() { return SetSpec(Kind::half_line_neg, 1); }
  static SetSpec orthant_nonneg(int d) { return SetSpec(Kind::orthant_nonneg, d); }
  static SetSpec orthant_neg(int d) { return SetSpec(Kind::orthant_neg, d); }

  static SetSpec box(std::vector<double> lower, std::vector<double> upper) {
    if (lower.empty() || lower.size() != upper.size())
      throw ConfigError("box needs matching nonempty corner vectors");
    for (std::size_t i = 0; i < lower.size(); ++i)
      if (!(lower[i] <= upper[i])) throw ConfigError("box needs lower <= upper");
    SetSpec s(Kind::box, static_cast<int>(lower.size()));
    s.lower_ = std::move(lower);
    s.upper_ = std::move(upper);
    return s;
  }

  static SetSpec half_open_interval(double lower, double upper) {
    if (!(lower < upper)) throw ConfigError("half_open_interval needs lower < upper");
    SetSpec s(Kind::half_open_interval, 1);
    s.lower_ = {lower};
    s.upper_ = {upper};
    return s;
  }

  // Points given in units of the lattice span h.
  static SetSpec lattice_mask(std::vector<std::int64_t> points, double h) {
    if (points.empty()) throw ConfigError("lattice_mask needs at least one point");
    if (!(h > 0)) throw ConfigError("lattice_mask needs a positive span");
    SetSpec s(Kind::lattice_mask, 1);
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    s.mask_ = std::move(points);
    s.mask_h_ = h;
    return s;
  }

  Kind kind() const { return kind_; }
  int dimension() const { return dim_; }
  bool is_complement() const { return complemented_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<std::int64_t>& mask_points() const { return mask_; }
  double mask_span() const { return mask_h_; }

  SetSpec complement() const {
    SetSpec s = *this;
    s.complemented_ = !s.complemented_;
    return s;
  }

  bool contains(double x) const {
    if (dim_ != 1) throw ConfigError("1-d membership test on a multi-d set");
    return base_contains(std::span<const double>(&x, 1)) != complemented_;
  }

  bool contains(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_) throw ConfigError("point dimension mismatch");
    return base_contains(x) != complemented_;
  }

  // Haar measure of the (non-complemented) set w.r.t. the law's state space:
  // lattice points carry mass h each, the continuum uses Lebesgue measure.
  // Unbounded kinds report an infinite measure.
  double haar_measure(const IncrementLaw& law) const {
    if (complemented_) return std::numeric_limits<double>::infinity();
    switch (kind_) {
      case Kind::half_line_nonneg:
      case Kind::half_line_neg:
      case Kind::orthant_nonneg:
      case Kind::orthant_neg:
        return std::numeric_limits<double>::infinity();
      case Kind::lattice_mask:
        return mask_h_ * static_cast<double>(mask_.size());
      case Kind::box:
      case Kind::half_open_interval: {
        if (law.is_lattice()) {
          const double h = law.lattice_span();
          double count = 1.0;
          for (int c = 0; c < dim_; ++c) {
            const std::int64_t lo = static_cast<std::int64_t>(std::ceil(lower_[c] / h - 1e-12));
            const bool open_hi = kind_ == Kind::half_open_interval;
            const std::int64_t hi = open_hi
                ? static_cast<std::int64_t>(std::ceil(upper_[c] / h - 1e-12)) - 1
                : static_cast<std::int64_t>(std::floor(upper_[c] / h + 1e-12));
            count *= hi >= lo ? static_cast<double>(hi - lo + 1) * h : 0.0;
          }
          return count;
        }
        double vol = 1.0;
        for (int c = 0; c < dim_; ++c) vol *= upper_[c] - lower_[c];
        return vol;
      }
    }
    throw ConfigError("unknown set kind");
  }

  std::string describe() const {
    std::string s;
    switch (kind_) {
      case Kind::half_line_nonneg: s = "[0,inf)"; break;
      case Kind::half_line_neg: s = "(-inf,0)"; break;
      case Kind::orthant_nonneg: s = "[0,inf)^" + std::to_string(dim_); break;
      case Kind::orthant_neg: s = "(-inf,0)^" + std::to_string(dim_); break;
      case Kind::box: {
        s = "box";
        for (int c = 0; c < dim_; ++c)
          s += (c ? "x[" : " [") + std::to_string(lower_[c]) + "," + std::to_string(upper_[c]) + "]";
        break;
      }
      case Kind::half_open_interval:
        s = "[" + std::to_string(lower_[0]) + "," + std::to_string(upper_[0]) + ")";
        break;
      case Kind::lattice_mask:
        s = "mask_of_" + std::to_string(mask_.size()) + "_points";
        break;
    }
    return complemented_ ? "complement_of " + s : s;
  }

 private:
  SetSpec(Kind k, int d) : kind_(k), dim_(d) {
    if (d < 1) throw ConfigError("set dimension must be >= 1");
    if (d != 1 && (k == Kind::half_line_nonneg || k == Kind::half_line_neg ||
                   k == Kind::half_open_interval || k == Kind::lattice_mask))
      throw ConfigError("set kind is one-dimensional");
  }

  bool base_contains(std::span<const double> x) const {
    switch (kind_) {
      case Kind::half_line_nonneg:
        return x[0] >= 0.0;
      case Kind::half_line_neg:
        return x[0] < 0.0;
      case Kind::orthant_nonneg:
        for (double v : x)
          if (!(v >= 0.0)) return false;
        return true;
      case Kind::orthant_neg:
        for (double v : x)
          if (!(v < 0.0)) return false;
        return true;
      case Kind::box:
        for (int c = 0; c < dim_; ++c)
          if (x[c] < lower_[c] || x[c] > upper_[c]) return false;
        return true;
      case Kind::half_open_interval:
        return x[0] >= lower_[0] && x[0] < upper_[0];
      case Kind::lattice_mask: {
        const double q = x[0] / mask_h_;
        const double r = std::nearbyint(q);
        if (std::abs(q - r) > 1e-9) return false;
        const std::int64_t idx = static_cast<std::int64_t>(r);
        return std::binary_search(mask_.begin(), mask_.end(), idx);
      }
    }
    return false;
  }

  Kind kind_;
  int dim_;
  bool complemented_ = false;
  std::vector<double> lower_, upper_;
  std::vector<std::int64_t> mask_;
  double mask_h_ = 1.0;
};

}  // namespace walklab
