#pragma once

// Mergeable sample accumulators and the test statistics built on them.
// Merging is done in replica order by the callers, so any thread schedule
// produces bit-identical statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "walklab/errors.hpp"

namespace walklab {

struct EmpiricalSummary {
  std::uint64_t count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
  bool keep_samples = true;
  std::vector<double> samples;  // in insertion order; sorted on demand
  std::map<std::int64_t, std::uint64_t> atom_counts;  // lattice histogram

  void add(double x) {
    ++count;
    sum += x;
    sum_sq += x * x;
    if (keep_samples) samples.push_back(x);
  }

  void add_atom(std::int64_t index, double value) {
    ++atom_counts[index];
    add(value);
  }

  void merge_in(const EmpiricalSummary& other) {
    count += other.count;
    sum += other.sum;
    sum_sq += other.sum_sq;
    samples.insert(samples.end(), other.samples.begin(), other.samples.end());
    for (const auto& [k, c] : other.atom_counts) atom_counts[k] += c;
  }

  static EmpiricalSummary merge(const EmpiricalSummary& a, const EmpiricalSummary& b) {
    EmpiricalSummary out = a;
    out.merge_in(b);
    return out;
  }

  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  double variance() const {
    if (count < 2) return 0.0;
    const double m = mean();
    return std::max(0.0, sum_sq / static_cast<double>(count) - m * m);
  }

  std::vector<double> sorted() const {
    std::vector<double> s = samples;
    std::sort(s.begin(), s.end());
    return s;
  }
};

// Exact sup distance between the empirical cdf and a target cdf, evaluated
// at the sample points.
inline double ks_distance(const EmpiricalSummary& summary,
                          const std::function<double(double)>& cdf) {
  if (summary.samples.empty()) throw ConfigError("ks_distance: empty sample buffer");
  const std::vector<double> s = summary.sorted();
  const double n = static_cast<double>(s.size());
  double d = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double f = cdf(s[i]);
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
  }
  return d;
}

// Asymptotic null threshold used for the exact-null KS tests.
inline double ks_threshold(std::uint64_t n) { return 1.95 / std::sqrt(static_cast<double>(n)); }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

struct TestVerdict {
  std::string name;
  std::string statistic;  // "ks", "relative_error", "max_z_score", "abs_error"
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;  // invariant: pass <=> value <= threshold
  bool informational = false;  // reported without an assertion (threshold = inf)
  std::uint64_t sample_size = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream_count = 0;
  std::string target;  // human-readable description of the null
  std::map<std::string, double> extra;

  static TestVerdict make(std::string name, std::string statistic, double value,
                          double threshold, std::uint64_t sample_size, std::uint64_t seed,
                          std::uint64_t stream_count, std::string target) {
    TestVerdict v;
    v.name = std::move(name);
    v.statistic = std::move(statistic);
    v.value = value;
    v.threshold = threshold;
    v.pass = value <= threshold;
    v.informational = !std::isfinite(threshold);
    v.sample_size = sample_size;
    v.seed = seed;
    v.stream_count = stream_count;
    v.target = std::move(target);
    return v;
  }
};

}  // namespace walklab
