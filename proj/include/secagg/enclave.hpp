#pragma once

#include <map>
#include <optional>
#include <vector>

#include "secagg/group.hpp"
#include "secagg/protocol.hpp"
#include "secagg/signing.hpp"
#include "secagg/transcript.hpp"

namespace secagg {

struct EnclaveLogEntry {
  uint64_t ctr = 0;
  Digest inputs{};
  Digest outputs{};
  Signature sig{};
  uint64_t rnd_seed = 0;
};

/// Emulated transparent enclave: code attestation and signed compute, nothing
/// else. Everything below is host-readable by design; integrity rests on the
/// signature checks and the monotone counter, never on hiding state. The one
/// secret is the signing key.
///
/// Counter discipline: key setup envelopes carry ctr 0, the first round
/// announcement ctr 1, and each attested round advances by exactly one. The
/// per-compute log records (ctr, input digest, output digest, signature,
/// selection seed) so the host can re-derive every decision.
class Enclave {
 public:
  Enclave(const Bytes& signing_seed, uint64_t master_seed);

  /// Loads a program, archives any previous log and resets the counter.
  /// Returns the attestation token: a signed hash of the program bytes.
  SignedEnvelope install(const Bytes& program);

  /// Checks every client key announcement and returns one signed roster
  /// envelope per client (ascending id), each listing the other clients'
  /// public keys. Any bad announcement rejects the whole batch and leaves
  /// the enclave untouched.
  std::vector<SignedEnvelope> key_setup(const std::vector<SignedEnvelope>& announcements,
                                        const std::map<uint64_t, SigPublicKey>& client_vks,
                                        const GroupParams& params);

  /// Announces round 1 over the initial model. The selection seed is drawn
  /// from the master seed and logged.
  SignedEnvelope start(const ProtocolConfig& cfg, double fraction,
                       const std::vector<double>& model0);

  struct RoundResult {
    SignedEnvelope announcement;  // (ctr+1, next selection, aggregated model)
    RoundOutcome outcome;
  };

  /// Verifies and aggregates one round. ctr must equal the pending round;
  /// anything else throws ReplayError. A bad signature or malformed record
  /// rejects the whole batch without advancing state.
  RoundResult attested_round(uint64_t ctr, const std::vector<SignedEnvelope>& contributions,
                             const std::vector<SignedEnvelope>& recoveries);

  const SigPublicKey& verify_key() const { return kp_.pk; }
  uint64_t counter() const { return ctr_; }
  bool installed() const { return program_.has_value(); }
  /// The pending round announcement (selection, grouping, model).
  const RoundPlan& plan() const;
  const std::vector<EnclaveLogEntry>& log() const { return log_; }
  const std::vector<std::vector<EnclaveLogEntry>>& archived_logs() const { return archive_; }

 private:
  SignedEnvelope emit(RecordType type, Bytes payload);
  void append_log(uint64_t ctr, const Digest& inputs, const Bytes& out_payload,
                  const Signature& sig, uint64_t rnd_seed);

  SigKeypair kp_;
  uint64_t master_seed_ = 0;
  std::optional<Digest> program_;
  std::map<uint64_t, SigPublicKey> client_vks_;
  std::vector<uint64_t> roster_ids_;
  ProtocolConfig cfg_{};
  double fraction_ = 1.0;
  std::optional<RoundPlan> plan_;
  uint64_t ctr_ = 0;
  std::vector<EnclaveLogEntry> log_;
  std::vector<std::vector<EnclaveLogEntry>> archive_;
};

}  // namespace secagg
