#include "secagg/enclave.hpp"

#include <algorithm>

#include "secagg/errors.hpp"
#include "secagg/hash.hpp"

namespace secagg {

Enclave::Enclave(const Bytes& signing_seed, uint64_t master_seed)
    : kp_(gen_signing_keypair(0, signing_seed)), master_seed_(master_seed) {}

SignedEnvelope Enclave::emit(RecordType type, Bytes payload) {
  return make_envelope(kp_, type, std::move(payload));
}

void Enclave::append_log(uint64_t ctr, const Digest& inputs, const Bytes& out_payload,
                         const Signature& sig, uint64_t rnd_seed) {
  EnclaveLogEntry entry;
  entry.ctr = ctr;
  entry.inputs = inputs;
  entry.outputs = sha256(out_payload);
  entry.sig = sig;
  entry.rnd_seed = rnd_seed;
  log_.push_back(entry);
}

const RoundPlan& Enclave::plan() const {
  if (!plan_) throw ProtocolError("no round announced");
  return *plan_;
}

SignedEnvelope Enclave::install(const Bytes& program) {
  if (program.empty()) throw ParamError("empty program");
  if (!log_.empty()) archive_.push_back(std::move(log_));
  log_.clear();
  ctr_ = 0;
  plan_.reset();
  client_vks_.clear();
  roster_ids_.clear();
  program_ = sha256(program);
  return emit(RecordType::install, install_payload(program));
}

std::vector<SignedEnvelope> Enclave::key_setup(const std::vector<SignedEnvelope>& announcements,
                                               const std::map<uint64_t, SigPublicKey>& client_vks,
                                               const GroupParams& params) {
  if (!program_) throw ProtocolError("no program installed");
  if (!roster_ids_.empty()) throw ProtocolError("key setup already done");
  if (announcements.empty()) throw ProtocolError("no client keys announced");

  std::map<uint64_t, Bytes> roster;
  Sha256 inp;
  for (const SignedEnvelope& env : announcements) {
    if (env.type != RecordType::client_key) throw ProtocolError("expected client key record");
    if (env.signer == 0) throw ProtocolError("client key signed by the aggregator");
    auto vk = client_vks.find(env.signer);
    if (vk == client_vks.end()) throw ProtocolError("unknown client signer");
    if (!envelope_valid(env, vk->second)) throw ProtocolError("bad client key signature");
    ClientKeyView view = parse_client_key(env.payload);
    if (view.client_id != env.signer) throw ProtocolError("client key id mismatch");
    if (view.pk.size() != params.element_bytes()) throw ProtocolError("wrong public key size");
    mpz_class pk = decode_element(params, view.pk);
    if (pk <= 1 || pk >= params.modulus()) throw ProtocolError("public key out of range");
    if (!roster.emplace(view.client_id, view.pk).second) {
      throw ProtocolError("duplicate client key");
    }
    std::string line = envelope_line(env);
    inp.update(reinterpret_cast<const uint8_t*>(line.data()), line.size()).update_byte('\n');
  }

  std::vector<SignedEnvelope> out;
  out.reserve(roster.size());
  Sha256 outp;
  for (const auto& [recipient, pk] : roster) {
    std::vector<std::pair<uint64_t, Bytes>> others;
    others.reserve(roster.size() - 1);
    for (const auto& [id, other_pk] : roster) {
      if (id != recipient) others.emplace_back(id, other_pk);
    }
    Bytes payload = key_setup_payload(recipient, others);
    outp.update(payload);
    out.push_back(emit(RecordType::key_setup, std::move(payload)));
  }

  client_vks_ = client_vks;
  roster_ids_.clear();
  roster_ids_.reserve(roster.size());
  for (const auto& [id, pk] : roster) roster_ids_.push_back(id);

  Digest outputs = outp.finish();
  EnclaveLogEntry entry;
  entry.ctr = 0;
  entry.inputs = inp.finish();
  entry.outputs = outputs;
  entry.sig = out.back().sig;
  entry.rnd_seed = 0;
  log_.push_back(entry);
  return out;
}

SignedEnvelope Enclave::start(const ProtocolConfig& cfg, double fraction,
                              const std::vector<double>& model0) {
  if (roster_ids_.empty()) throw ProtocolError("key setup not done");
  if (plan_) throw ProtocolError("already started");
  if (model0.empty()) throw ParamError("empty initial model");
  cfg_ = cfg;
  fraction_ = fraction;

  uint64_t seed = sub_seed(master_seed_, "select", 1);
  RoundPlan plan = make_round_plan(roster_ids_, fraction_, cfg_.group_size, 1, seed, model0);
  Bytes payload = round_payload(1, plan.selected, model0);
  SignedEnvelope env = emit(RecordType::round, payload);
  append_log(1, sha256(Bytes{}), payload, env.sig, seed);
  plan_ = std::move(plan);
  ctr_ = 1;
  return env;
}

Enclave::RoundResult Enclave::attested_round(uint64_t ctr,
                                             const std::vector<SignedEnvelope>& contributions,
                                             const std::vector<SignedEnvelope>& recoveries) {
  if (!plan_) throw ProtocolError("no round announced");
  if (ctr != ctr_) {
    throw ReplayError("compute counter " + std::to_string(ctr) + " does not match pending round " +
                      std::to_string(ctr_));
  }

  Sha256 inp;
  auto check_signed = [&](const SignedEnvelope& env, RecordType want) {
    if (env.type != want) throw ProtocolError("unexpected record type in round batch");
    auto vk = client_vks_.find(env.signer);
    if (env.signer == 0 || vk == client_vks_.end()) throw ProtocolError("unknown client signer");
    if (!envelope_valid(env, vk->second)) throw ProtocolError("bad signature in round batch");
    std::string line = envelope_line(env);
    inp.update(reinterpret_cast<const uint8_t*>(line.data()), line.size()).update_byte('\n');
  };

  std::vector<MaskedUpdate> updates;
  updates.reserve(contributions.size());
  for (const SignedEnvelope& env : contributions) {
    check_signed(env, RecordType::contribution);
    MaskedUpdate u = MaskedUpdate::parse(env.payload);
    if (u.client_id != env.signer) throw ProtocolError("contribution id does not match signer");
    if (u.round != ctr) throw ProtocolError("contribution for the wrong round");
    updates.push_back(std::move(u));
  }
  std::vector<RecoveryVector> recovs;
  recovs.reserve(recoveries.size());
  for (const SignedEnvelope& env : recoveries) {
    check_signed(env, RecordType::recovery);
    RecoveryVector r = RecoveryVector::parse(env.payload);
    if (r.client_id != env.signer) throw ProtocolError("recovery id does not match signer");
    if (r.round != ctr) throw ProtocolError("recovery for the wrong round");
    recovs.push_back(std::move(r));
  }

  RoundOutcome outcome = server_round(*plan_, updates, recovs, cfg_);

  uint64_t next = ctr + 1;
  uint64_t seed = sub_seed(master_seed_, "select", next);
  RoundPlan next_plan =
      make_round_plan(roster_ids_, fraction_, cfg_.group_size, next, seed, outcome.model);
  Bytes payload = round_payload(next, next_plan.selected, outcome.model);
  SignedEnvelope env = emit(RecordType::round, payload);
  append_log(next, inp.finish(), payload, env.sig, seed);
  plan_ = std::move(next_plan);
  ctr_ = next;
  return {std::move(env), std::move(outcome)};
}

}  // namespace secagg
