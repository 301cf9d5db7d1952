#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>

#include "secagg/bytes.hpp"

namespace secagg {

using SigPublicKey = std::array<uint8_t, 32>;
using Signature = std::array<uint8_t, 64>;

/// Ed25519 signing identity. Signer 0 is reserved for the aggregator's
/// attestation key; clients sign under their own ids.
struct SigKeypair {
  uint64_t signer = 0;
  SigPublicKey pk{};
  std::array<uint8_t, 64> sk{};
};

/// Deterministic keypair from (signer, seed). Ed25519 signatures are
/// themselves deterministic, so a fixed seed reproduces transcripts bit for
/// bit. Throws ParamError on an empty seed.
SigKeypair gen_signing_keypair(uint64_t signer, const Bytes& seed);

Signature sign_detached(const SigKeypair& kp, const Bytes& msg);
bool verify_detached(const SigPublicKey& pk, const Bytes& msg, const Signature& sig);

/// Verification-key registry, one `id, hex` line per signer, sorted by id.
std::string emit_signer_registry(const std::map<uint64_t, SigPublicKey>& registry);

/// Strict inverse of emit_signer_registry. Throws ConfigError naming the
/// offending line on malformed input.
std::map<uint64_t, SigPublicKey> parse_signer_registry(const std::string& text);

}  // namespace secagg
