#pragma once

#include <string>
#include <vector>

#include "secagg/config.hpp"

namespace secagg {

struct MetricsRow {
  uint64_t round = 0;
  std::string phase;  // masking | recovery | aggregate
  uint64_t hash_count = 0;
  uint64_t bytes_sent = 0;
  uint64_t elapsed_ns = 0;
  double max_abs_error = -1.0;  // negative leaves the column empty
};

/// Fixed header round,phase,hash_count,bytes_sent,elapsed_ns,max_abs_error;
/// one row per line, trailing newline, errors printed with %.17g.
std::string metrics_csv(const std::vector<MetricsRow>& rows);

struct SimResult {
  std::vector<double> model;
  std::vector<MetricsRow> metrics;
  /// Signed record per line; empty unless the run is attested.
  std::string transcript;
  /// Verification key registry for the transcript (signer 0 first).
  std::string signer_registry;
  /// Largest per-round deviation from the plaintext oracle; 0 with the
  /// oracle off.
  double worst_error = 0.0;
};

/// Runs cfg.rounds aggregation rounds over a fresh cohort. Dropouts are drawn
/// per round from the seed; a dropped client keeps its keys and participates
/// again whenever selected. With the oracle on, a plaintext federated
/// averaging pass runs in lockstep on the same local models and the per-round
/// max-abs deviation lands in the aggregate metrics row. Deterministic:
/// identical configs produce byte-identical metrics and transcripts.
SimResult run_sim(const SimConfig& cfg);

struct BenchCounts {
  size_t clients = 0;
  size_t dropped = 0;
  size_t dimension = 0;
  uint32_t group_size = 0;  // 0 = one group
  /// Blinding hashes for one member of the first group.
  uint64_t mask_hashes_per_client = 0;
  /// Recovery hashes for one online member of the first group.
  uint64_t recovery_hashes_per_online = 0;
  /// Modular additions across the whole aggregation.
  uint64_t server_adds = 0;
};

/// Measured (not computed) operation counts for one round with the given
/// shape. The d dropped clients are taken from the first group, which must
/// keep at least one survivor.
BenchCounts bench_counts(size_t clients, size_t dropped, size_t dimension, uint32_t group_size,
                         uint64_t seed);

struct BenchBytes {
  size_t dimension = 0;
  size_t scaling_bytes = 0;  // 32-bit words
  size_t quant16_bytes = 0;
  size_t quant8_bytes = 0;
};

/// Serialized payload sizes of one masked update at each width.
BenchBytes bench_bytes(size_t dimension);

}  // namespace secagg
