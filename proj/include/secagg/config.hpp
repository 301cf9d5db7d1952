#pragma once

#include <cstdint>
#include <string>

#include "secagg/protocol.hpp"

namespace secagg {

enum class WorkloadKind { synthetic, trainer };
enum class Distribution { uniform, wide, gaussian };

const char* workload_kind_name(WorkloadKind kind);
WorkloadKind workload_kind_from_name(const std::string& name);
const char* distribution_name(Distribution dist);
Distribution distribution_from_name(const std::string& name);

struct WorkloadConfig {
  WorkloadKind kind = WorkloadKind::synthetic;
  size_t dimension = 16;
  Distribution distribution = Distribution::uniform;

  bool operator==(const WorkloadConfig&) const = default;
};

/// Everything a simulation run needs. All randomness in a run is derived
/// from the single seed, so equal configs give byte-identical outputs.
struct SimConfig {
  uint64_t seed = 0;
  size_t clients = 10;
  double fraction = 1.0;
  uint32_t group_size = 0;  // 0 = one group per round
  uint32_t min_group_size = 2;
  size_t rounds = 1;
  Mode mode = Mode::scaling;
  double dropout_rate = 0.0;
  bool attested = false;
  bool oracle = true;
  /// Off by default: with timing recorded, metrics are no longer
  /// byte-identical across runs.
  bool record_timing = false;
  double clip_bound = 0.5;   // quantizer section
  uint64_t scale = 10000000;  // scaling section
  WorkloadConfig workload;

  bool operator==(const SimConfig&) const = default;
};

/// Parses the JSON config. Unknown keys, duplicate keys, type mismatches and
/// out-of-range values are all rejected; every problem is listed in the
/// ConfigError message, not just the first. The seed is mandatory.
SimConfig parse_config(const std::string& text);

SimConfig load_config(const std::string& path);

/// Canonical full-form emission; parse_config(emit_config(c)) == c.
std::string emit_config(const SimConfig& cfg);

ProtocolConfig protocol_config(const SimConfig& cfg);

}  // namespace secagg
