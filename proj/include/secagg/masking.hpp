#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "secagg/bytes.hpp"
#include "secagg/group.hpp"

namespace secagg {

/// Message space description for masked values: Z_M with M = 2^modulus_bits.
/// participants is the client's aggregation group, sorted ascending, self
/// included; masks are formed against every other participant.
struct MaskParams {
  uint8_t modulus_bits = 32;
  uint64_t round = 0;
  std::vector<uint64_t> participants;
};

/// All-ones mask for values in Z_{2^bits}.
uint64_t modulus_mask(uint8_t bits);

/// One pairwise blinding term: +-H(ck || b || t) mod 2^bits, negated
/// (as M - x) when self_id > peer_id so the two directions cancel in a sum.
uint64_t blind_factor(const Digest& ck, uint64_t self_id, uint64_t peer_id, uint64_t element,
                      uint64_t round, uint8_t modulus_bits);

struct MaskedUpdate {
  uint64_t client_id = 0;
  uint64_t round = 0;
  uint8_t modulus_bits = 32;
  std::vector<uint64_t> values;

  /// Header (25 bytes) plus values packed big-endian at modulus_bits width.
  Bytes wire() const;
  static MaskedUpdate parse(const Bytes& data);
  /// Packed-values size in bytes, excluding the header.
  size_t payload_bytes() const;
};

/// Adds the client's full mask vector to plain (values already reduced into
/// Z_M). Requires a shared key with every other participant.
MaskedUpdate mask_update(const std::vector<uint64_t>& plain, const KeyMaterial& keys,
                         const MaskParams& params);

/// Element-wise modular sum of updates that agree on round, width and length.
std::vector<uint64_t> aggregate(const std::vector<MaskedUpdate>& updates);

/// Mask residue a surviving client submits so dropped peers' masks can be
/// cancelled without revealing any pairwise key.
struct RecoveryVector {
  uint64_t client_id = 0;
  uint64_t round = 0;
  uint8_t modulus_bits = 32;
  std::vector<uint64_t> dropped;
  std::vector<uint64_t> values;

  Bytes wire() const;
  static RecoveryVector parse(const Bytes& data);
};

RecoveryVector recovery_vector(const KeyMaterial& keys, const std::vector<uint64_t>& dropped,
                               uint64_t round, uint8_t modulus_bits, size_t length);

/// partial - sum(recoveries) mod M: removes dropped clients' mask residue
/// from the aggregate of surviving updates.
std::vector<uint64_t> apply_recovery(const std::vector<uint64_t>& partial,
                                     const std::vector<RecoveryVector>& recoveries,
                                     uint8_t modulus_bits);

/// Operation counters for complexity checks: blinding-hash invocations and
/// element additions performed by aggregate().
struct OpCounters {
  std::atomic<uint64_t> blind_hashes{0};
  std::atomic<uint64_t> aggregate_adds{0};
};
OpCounters& op_counters();
void reset_op_counters();

}  // namespace secagg
