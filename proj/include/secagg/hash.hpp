#pragma once

#include <cstdint>
#include <string_view>

#include "secagg/bytes.hpp"

namespace secagg {

// Domain separation tags. Every hash in the system starts with exactly one of
// these so key derivation, blinding factors, key expansion and simulator
// seeding can never collide on input bytes.
inline constexpr uint8_t kTagSharedKey = 0x01;
inline constexpr uint8_t kTagBlind = 0x02;
inline constexpr uint8_t kTagKeyExpand = 0x03;
inline constexpr uint8_t kTagSubSeed = 0x04;
inline constexpr uint8_t kTagSigSeed = 0x05;

Digest sha256(const uint8_t* data, size_t n);
Digest sha256(const Bytes& data);

/// Streaming SHA-256 for multi-part inputs.
class Sha256 {
 public:
  Sha256();
  Sha256& update(const uint8_t* data, size_t n);
  Sha256& update(const Bytes& data);
  Sha256& update_u64_be(uint64_t v);
  Sha256& update_byte(uint8_t b);
  Digest finish();

 private:
  // Large enough for any libsodium crypto_hash_sha256_state; checked in hash.cpp.
  alignas(16) unsigned char state_[128];
};

/// Deterministic 64-bit sub-seed: SHA-256(tag || master || label || a || b),
/// first 8 bytes big-endian. All simulator randomness funnels through this.
uint64_t sub_seed(uint64_t master, std::string_view label, uint64_t a = 0, uint64_t b = 0);

}  // namespace secagg
