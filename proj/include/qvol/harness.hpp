#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace qvol {

/// Flat key = value experiment description.  `kind`, `seed`, and `workers`
/// are first-class fields; everything else lives in `params`.  The file
/// format is line-based: `key = value`, '#' starts a comment, blank lines
/// are ignored.  serialize() emits a canonical sorted form, so
/// parse(serialize(x)) == x.
struct ExperimentConfig {
  std::string kind;
  std::map<std::string, std::string> params;
  std::uint64_t seed = 0;
  int workers = 1;

  static ExperimentConfig parse(const std::string& text);
  static ExperimentConfig load(const std::string& path);
  std::string serialize() const;

  /// FNV-1a 64-bit hex digest of (kind, params, seed).  The worker count is
  /// an execution detail and deliberately excluded: results must not depend
  /// on it.
  std::string digest() const;

  bool has(const std::string& key) const;
  std::string get_str(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  double get_real(const std::string& key) const;
  double get_real(const std::string& key, double fallback) const;
  std::vector<long long> get_int_list(const std::string& key) const;
};

inline constexpr const char* kArtifactVersion = "0.1.0";

/// One experiment outcome as a newline-delimited JSON record.  `payload` is
/// fully determined by (config, seed) — wall-clock time lives outside it so
/// replays compare byte-identical payloads.
struct ResultRecord {
  std::string kind;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::string artifact_version = kArtifactVersion;
  bool pass = false;
  double wall_ms = 0;
  nlohmann::json payload;

  std::string to_line() const;
  static ResultRecord from_line(const std::string& line);
};

/// The supported experiment kinds, in the order that fixes their stream ids
/// (seed derivation depends on the position; the order is append-only).
const std::vector<std::string>& experiment_kinds();

/// Runs `fn(0..count-1)` on up to `workers` threads.  Callers write results
/// into index-addressed slots, so the outcome is independent of scheduling.
/// The first exception thrown by any index is rethrown.
void parallel_for(std::size_t count, int workers,
                  const std::function<void(std::size_t)>& fn);

/// Dispatches the config to its experiment, with per-sample rng streams
/// derived from (seed, kind position, sample index).  Deterministic given
/// (config, seed) regardless of worker count.
ResultRecord run(const ExperimentConfig& config);

/// Renders one named series of a record as a tab-separated table with a
/// header row.  Unknown series names raise std::invalid_argument.
std::string emit_plot_data(const ResultRecord& record,
                           const std::string& series);

}  // namespace qvol
