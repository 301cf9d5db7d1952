#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "secagg/bytes.hpp"
#include "secagg/signing.hpp"

namespace secagg {

enum class RecordType : uint8_t {
  install = 1,
  client_key = 2,
  key_setup = 3,
  round = 4,
  contribution = 5,
  recovery = 6,
};

const char* record_type_name(RecordType t);
RecordType record_type_from_name(const std::string& name);

/// A signed record. Signer 0 is the aggregator's attestation key; any other
/// signer is a client id. The signature covers a domain-separated encoding of
/// (type, signer, payload), never the payload alone.
struct SignedEnvelope {
  RecordType type = RecordType::install;
  uint64_t signer = 0;
  Bytes payload;
  Signature sig{};
};

Bytes envelope_signing_bytes(RecordType type, uint64_t signer, const Bytes& payload);
SignedEnvelope make_envelope(const SigKeypair& kp, RecordType type, Bytes payload);
bool envelope_valid(const SignedEnvelope& env, const SigPublicKey& pk);

/// One compact JSON object per envelope: {"payload":hex,"sig":hex,
/// "signer":n,"type":name}, keys sorted, lowercase hex, newline-free.
std::string envelope_line(const SignedEnvelope& env);

/// Strict inverse of envelope_line: exactly those four keys, correct types,
/// 64-byte signature, known type name. Throws ConfigError otherwise.
SignedEnvelope parse_envelope_line(const std::string& line);

// Payload layouts (all integers big-endian):
//   install       H(program), 32 bytes
//   client_key    id || dh public key
//   key_setup     0 || recipient || count || (id || dh public key)*
//   round         ctr || count || selected ids || m || model doubles
//   contribution  MaskedUpdate wire bytes
//   recovery      RecoveryVector wire bytes

Bytes install_payload(const Bytes& program);

Bytes client_key_payload(uint64_t client_id, const Bytes& pk);
struct ClientKeyView {
  uint64_t client_id = 0;
  Bytes pk;
};
ClientKeyView parse_client_key(const Bytes& payload);

Bytes key_setup_payload(uint64_t recipient, const std::vector<std::pair<uint64_t, Bytes>>& roster);
struct KeySetupView {
  uint64_t ctr = 0;
  uint64_t recipient = 0;
  std::vector<std::pair<uint64_t, Bytes>> roster;
};
KeySetupView parse_key_setup(const Bytes& payload);

Bytes round_payload(uint64_t ctr, const std::vector<uint64_t>& selected,
                    const std::vector<double>& model);
struct RoundView {
  uint64_t ctr = 0;
  std::vector<uint64_t> selected;
  std::vector<double> model;
};
RoundView parse_round(const Bytes& payload);

struct VerifyResult {
  bool ok = false;
  size_t first_bad_record = SIZE_MAX;
  std::string reason;
};

/// Replays a stored transcript: every signature, the counter chain, record
/// ordering, selection membership of contributions and recoveries, and
/// roster consistency. Stops at the first failing record (0-based line
/// index). An empty or truncated transcript fails with index one past the
/// last parsed record.
VerifyResult verify_transcript(const std::string& text, const SigPublicKey& aggregator_vk,
                               const std::map<uint64_t, SigPublicKey>& client_vks);

}  // namespace secagg
