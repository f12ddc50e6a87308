#pragma once

// Machine-readable experiment reports and plottable CSV dumps. Reports are
// UTF-8 JSON; every number round-trips (17 significant digits where printed
// as text).

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "walklab/errors.hpp"
#include "walklab/experiments.hpp"

namespace walklab {

inline nlohmann::json verdict_to_json(const TestVerdict& v) {
  nlohmann::json j;
  j["name"] = v.name;
  j["statistic"] = v.statistic;
  j["value"] = v.value;
  j["threshold"] = v.threshold;
  j["pass"] = v.pass;
  j["informational"] = v.informational;
  j["sample_size"] = v.sample_size;
  j["seed"] = v.seed;
  j["stream_count"] = v.stream_count;
  j["target"] = v.target;
  j["extra"] = v.extra;
  return j;
}

inline nlohmann::json make_report(const std::string& experiment, std::uint64_t seed,
                                  const ExperimentResult& result, std::uint64_t runtime_ms) {
  nlohmann::json j;
  j["experiment"] = experiment;
  j["seed"] = seed;
  j["verdicts"] = nlohmann::json::array();
  for (const TestVerdict& v : result.verdicts) j["verdicts"].push_back(verdict_to_json(v));
  j["runtime_ms"] = runtime_ms;
  j["partial"] = result.partial;
  j["dropped"] = result.dropped;
  j["pass"] = result.all_pass();
  return j;
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path);
  out << text;
}

inline std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void write_cdf_csv(const std::string& path,
                          const std::vector<std::array<double, 3>>& rows) {
  std::string text = "y,empirical_cdf,target_cdf\n";
  for (const auto& r : rows)
    text += format_g17(r[0]) + "," + format_g17(r[1]) + "," + format_g17(r[2]) + "\n";
  write_text_file(path, text);
}

inline void write_density_csv(const std::string& path, const DensityOnGroup& density,
                              double lo, double hi, std::size_t n_points) {
  if (n_points < 2) throw ConfigError("density grid needs at least 2 points");
  std::string text = "x,density\n";
  for (std::size_t i = 0; i < n_points; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_points - 1);
    text += format_g17(x) + "," + format_g17(density.density_at(x)) + "\n";
  }
  write_text_file(path, text);
}

inline void write_events_csv(const std::string& path, const std::vector<CrossingEvent>& events) {
  std::string text = "n,T_n,U_n,O_n,dir\n";
  for (const CrossingEvent& e : events)
    text += std::to_string(e.index) + "," + std::to_string(e.time) + "," +
            format_g17(e.undershoot) + "," + format_g17(e.overshoot) + "," +
            (e.direction == Direction::up ? "up" : "down") + "\n";
  write_text_file(path, text);
}

inline void write_path_csv(const std::string& path, const std::vector<double>& positions) {
  std::string text = "k,S_k\n";
  for (std::size_t k = 0; k < positions.size(); ++k)
    text += std::to_string(k) + "," + format_g17(positions[k]) + "\n";
  write_text_file(path, text);
}

}  // namespace walklab
