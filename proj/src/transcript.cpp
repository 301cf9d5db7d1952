#include "secagg/transcript.hpp"

#include <json.hpp>

#include <algorithm>
#include <bit>
#include <set>

#include "secagg/errors.hpp"
#include "secagg/hash.hpp"
#include "secagg/masking.hpp"

namespace secagg {

using nlohmann::json;

static constexpr char kEnvDomain[] = "SECAGG-ENV-v1";

const char* record_type_name(RecordType t) {
  switch (t) {
    case RecordType::install: return "install";
    case RecordType::client_key: return "client_key";
    case RecordType::key_setup: return "key_setup";
    case RecordType::round: return "round";
    case RecordType::contribution: return "contribution";
    case RecordType::recovery: return "recovery";
  }
  throw ParamError("unknown record type");
}

RecordType record_type_from_name(const std::string& name) {
  for (RecordType t : {RecordType::install, RecordType::client_key, RecordType::key_setup,
                       RecordType::round, RecordType::contribution, RecordType::recovery}) {
    if (name == record_type_name(t)) return t;
  }
  throw ConfigError("unknown record type: " + name);
}

Bytes envelope_signing_bytes(RecordType type, uint64_t signer, const Bytes& payload) {
  Bytes out;
  out.reserve(sizeof(kEnvDomain) + 17 + payload.size());
  out.insert(out.end(), kEnvDomain, kEnvDomain + sizeof(kEnvDomain) - 1);
  out.push_back(static_cast<uint8_t>(type));
  append_u64_be(out, signer);
  append_u64_be(out, payload.size());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

SignedEnvelope make_envelope(const SigKeypair& kp, RecordType type, Bytes payload) {
  SignedEnvelope env;
  env.type = type;
  env.signer = kp.signer;
  env.sig = sign_detached(kp, envelope_signing_bytes(type, kp.signer, payload));
  env.payload = std::move(payload);
  return env;
}

bool envelope_valid(const SignedEnvelope& env, const SigPublicKey& pk) {
  return verify_detached(pk, envelope_signing_bytes(env.type, env.signer, env.payload), env.sig);
}

std::string envelope_line(const SignedEnvelope& env) {
  json j;
  j["payload"] = to_hex(env.payload);
  j["sig"] = to_hex(Bytes(env.sig.begin(), env.sig.end()));
  j["signer"] = env.signer;
  j["type"] = record_type_name(env.type);
  return j.dump();
}

SignedEnvelope parse_envelope_line(const std::string& line) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ConfigError("record is not valid json");
  if (!j.is_object() || j.size() != 4 || !j.contains("payload") || !j.contains("sig") ||
      !j.contains("signer") || !j.contains("type")) {
    throw ConfigError("record must have exactly payload, sig, signer and type");
  }
  const json& payload = j["payload"];
  const json& sig = j["sig"];
  const json& signer = j["signer"];
  const json& type = j["type"];
  if (!payload.is_string() || !sig.is_string() || !type.is_string()) {
    throw ConfigError("payload, sig and type must be strings");
  }
  if (!signer.is_number_unsigned()) throw ConfigError("signer must be an unsigned integer");

  SignedEnvelope env;
  env.type = record_type_from_name(type.get<std::string>());
  env.signer = signer.get<uint64_t>();
  Bytes raw_sig;
  try {
    env.payload = from_hex(payload.get<std::string>());
    raw_sig = from_hex(sig.get<std::string>());
  } catch (const ParamError& e) {
    throw ConfigError(e.what());
  }
  if (raw_sig.size() != env.sig.size()) throw ConfigError("signature must be 64 bytes");
  std::copy(raw_sig.begin(), raw_sig.end(), env.sig.begin());
  return env;
}

namespace {

/// Bounds-checked big-endian reader for payload parsing.
class Cursor {
 public:
  explicit Cursor(const Bytes& data) : data_(data) {}

  uint64_t u64() {
    need(8);
    uint64_t v = read_u64_be(data_.data() + pos_);
    pos_ += 8;
    return v;
  }

  Bytes take(size_t n) {
    need(n);
    Bytes out(data_.begin() + static_cast<ptrdiff_t>(pos_),
              data_.begin() + static_cast<ptrdiff_t>(pos_ + n));
    pos_ += n;
    return out;
  }

  size_t remaining() const { return data_.size() - pos_; }

  void done() const {
    if (pos_ != data_.size()) throw ConfigError("trailing bytes in payload");
  }

 private:
  void need(size_t n) const {
    if (data_.size() - pos_ < n) throw ConfigError("short payload");
  }

  const Bytes& data_;
  size_t pos_ = 0;
};

}  // namespace

Bytes install_payload(const Bytes& program) {
  Digest d = sha256(program);
  return Bytes(d.begin(), d.end());
}

Bytes client_key_payload(uint64_t client_id, const Bytes& pk) {
  if (pk.empty()) throw ParamError("empty public key");
  Bytes out;
  append_u64_be(out, client_id);
  out.insert(out.end(), pk.begin(), pk.end());
  return out;
}

ClientKeyView parse_client_key(const Bytes& payload) {
  Cursor c(payload);
  ClientKeyView view;
  view.client_id = c.u64();
  if (c.remaining() == 0) throw ConfigError("client key record has no public key");
  view.pk = c.take(c.remaining());
  return view;
}

Bytes key_setup_payload(uint64_t recipient, const std::vector<std::pair<uint64_t, Bytes>>& roster) {
  Bytes out;
  append_u64_be(out, 0);
  append_u64_be(out, recipient);
  append_u64_be(out, roster.size());
  for (const auto& [id, pk] : roster) {
    append_u64_be(out, id);
    out.insert(out.end(), pk.begin(), pk.end());
  }
  return out;
}

KeySetupView parse_key_setup(const Bytes& payload) {
  Cursor c(payload);
  KeySetupView view;
  view.ctr = c.u64();
  view.recipient = c.u64();
  uint64_t count = c.u64();
  if (count == 0) {
    c.done();
    return view;
  }
  size_t rest = c.remaining();
  if (rest % count != 0 || rest / count <= 8) throw ConfigError("uneven key setup roster");
  size_t pk_len = rest / count - 8;
  view.roster.reserve(count);
  for (uint64_t i = 0; i < count; ++i) {
    uint64_t id = c.u64();
    view.roster.emplace_back(id, c.take(pk_len));
  }
  c.done();
  return view;
}

Bytes round_payload(uint64_t ctr, const std::vector<uint64_t>& selected,
                    const std::vector<double>& model) {
  Bytes out;
  append_u64_be(out, ctr);
  append_u64_be(out, selected.size());
  for (uint64_t id : selected) append_u64_be(out, id);
  append_u64_be(out, model.size());
  for (double v : model) append_u64_be(out, std::bit_cast<uint64_t>(v));
  return out;
}

RoundView parse_round(const Bytes& payload) {
  Cursor c(payload);
  RoundView view;
  view.ctr = c.u64();
  uint64_t nsel = c.u64();
  if (nsel > c.remaining() / 8) throw ConfigError("short payload");
  view.selected.reserve(nsel);
  for (uint64_t i = 0; i < nsel; ++i) view.selected.push_back(c.u64());
  uint64_t dim = c.u64();
  if (dim > c.remaining() / 8) throw ConfigError("short payload");
  view.model.reserve(dim);
  for (uint64_t i = 0; i < dim; ++i) view.model.push_back(std::bit_cast<double>(c.u64()));
  c.done();
  return view;
}

namespace {

struct Checker {
  const SigPublicKey& aggregator_vk;
  const std::map<uint64_t, SigPublicKey>& client_vks;

  Checker(const SigPublicKey& vk, const std::map<uint64_t, SigPublicKey>& clients)
      : aggregator_vk(vk), client_vks(clients) {}

  enum class Phase { install, client_keys, key_setups, rounds } phase = Phase::install;

  std::map<uint64_t, Bytes> announced;
  std::vector<uint64_t> client_order;
  size_t setups_seen = 0;
  bool any_round = false;
  uint64_t round_ctr = 0;
  std::vector<uint64_t> selected;
  std::set<uint64_t> contributed;
  std::set<uint64_t> recovered;
  size_t model_dim = 0;
  uint8_t update_bits = 0;

  std::string check(const SignedEnvelope& env) {
    const SigPublicKey* pk = nullptr;
    if (env.signer == 0) {
      pk = &aggregator_vk;
    } else {
      auto it = client_vks.find(env.signer);
      if (it == client_vks.end()) return "unknown signer";
      pk = &it->second;
    }
    if (!envelope_valid(env, *pk)) return "signature check failed";

    switch (phase) {
      case Phase::install: return check_install(env);
      case Phase::client_keys: return check_client_keys(env);
      case Phase::key_setups: return check_key_setups(env);
      case Phase::rounds: return check_rounds(env);
    }
    return "internal";
  }

  std::string check_install(const SignedEnvelope& env) {
    if (env.type != RecordType::install) return "transcript must start with an install record";
    if (env.signer != 0) return "install must be signed by the aggregator";
    if (env.payload.size() != 32) return "install payload must be a 32 byte hash";
    phase = Phase::client_keys;
    return {};
  }

  std::string check_client_keys(const SignedEnvelope& env) {
    if (env.type == RecordType::client_key) {
      if (env.signer == 0) return "client key cannot be signed by the aggregator";
      ClientKeyView view = parse_client_key(env.payload);
      if (view.client_id != env.signer) return "client key id does not match signer";
      if (!announced.emplace(view.client_id, std::move(view.pk)).second) {
        return "duplicate client key";
      }
      return {};
    }
    if (env.type == RecordType::key_setup) {
      if (announced.empty()) return "key setup before any client key";
      for (const auto& entry : announced) client_order.push_back(entry.first);
      phase = Phase::key_setups;
      return check_key_setups(env);
    }
    return "unexpected record during key announcement";
  }

  std::string check_key_setups(const SignedEnvelope& env) {
    if (env.type != RecordType::key_setup) {
      return "expected " + std::to_string(announced.size() - setups_seen) +
             " more key setup records";
    }
    if (env.signer != 0) return "key setup must be signed by the aggregator";
    if (setups_seen == client_order.size()) return "extra key setup record";
    KeySetupView view = parse_key_setup(env.payload);
    if (view.ctr != 0) return "key setup counter must be 0";
    if (view.recipient != client_order[setups_seen]) return "key setup recipient out of order";
    if (view.roster.size() != announced.size() - 1) return "key setup roster size mismatch";
    size_t idx = 0;
    for (const auto& [id, pk] : announced) {
      if (id == view.recipient) continue;
      const auto& [rid, rpk] = view.roster[idx++];
      if (rid != id || rpk != pk) return "key setup roster does not match announced keys";
    }
    ++setups_seen;
    if (setups_seen == client_order.size()) phase = Phase::rounds;
    return {};
  }

  std::string check_rounds(const SignedEnvelope& env) {
    switch (env.type) {
      case RecordType::round: {
        if (env.signer != 0) return "round must be signed by the aggregator";
        RoundView view = parse_round(env.payload);
        if (view.ctr != round_ctr + 1) {
          return "round counter " + std::to_string(view.ctr) + " after " +
                 std::to_string(round_ctr);
        }
        if (view.selected.empty()) return "round selects no clients";
        for (size_t i = 0; i < view.selected.size(); ++i) {
          if (i > 0 && view.selected[i] <= view.selected[i - 1]) return "selection not sorted";
          if (!announced.count(view.selected[i])) return "selected client never announced a key";
        }
        if (view.model.empty()) return "round has an empty model";
        if (any_round && view.model.size() != model_dim) return "model dimension changed";
        model_dim = view.model.size();
        round_ctr = view.ctr;
        any_round = true;
        selected = std::move(view.selected);
        contributed.clear();
        recovered.clear();
        return {};
      }
      case RecordType::contribution: {
        MaskedUpdate u = MaskedUpdate::parse(env.payload);
        if (u.client_id != env.signer) return "contribution id does not match signer";
        if (!std::binary_search(selected.begin(), selected.end(), env.signer)) {
          return "contributor was not selected";
        }
        if (u.round != round_ctr) return "contribution for the wrong round";
        if (u.values.size() != model_dim) return "contribution length mismatch";
        if (update_bits == 0) update_bits = u.modulus_bits;
        if (u.modulus_bits != update_bits) return "contribution width changed";
        if (!contributed.insert(env.signer).second) return "duplicate contribution";
        return {};
      }
      case RecordType::recovery: {
        RecoveryVector r = RecoveryVector::parse(env.payload);
        if (r.client_id != env.signer) return "recovery id does not match signer";
        if (!std::binary_search(selected.begin(), selected.end(), env.signer)) {
          return "recovering client was not selected";
        }
        if (r.round != round_ctr) return "recovery for the wrong round";
        if (r.values.size() != model_dim) return "recovery length mismatch";
        if (r.modulus_bits != update_bits) return "recovery width mismatch";
        for (size_t i = 0; i < r.dropped.size(); ++i) {
          if (i > 0 && r.dropped[i] <= r.dropped[i - 1]) return "dropped set not sorted";
          if (!std::binary_search(selected.begin(), selected.end(), r.dropped[i])) {
            return "dropped client was not selected";
          }
          if (r.dropped[i] == env.signer) return "client cannot drop itself";
          if (contributed.count(r.dropped[i])) return "dropped client already contributed";
        }
        if (!recovered.insert(env.signer).second) return "duplicate recovery";
        return {};
      }
      default:
        return "unexpected record after setup";
    }
  }
};

}  // namespace

VerifyResult verify_transcript(const std::string& text, const SigPublicKey& aggregator_vk,
                               const std::map<uint64_t, SigPublicKey>& client_vks) {
  Checker checker{aggregator_vk, client_vks};
  size_t index = 0;
  size_t start = 0;
  while (start < text.size()) {
    size_t end = text.find('\n', start);
    std::string line = text.substr(start, end == std::string::npos ? std::string::npos
                                                                   : end - start);
    start = end == std::string::npos ? text.size() : end + 1;
    std::string reason;
    try {
      SignedEnvelope env = parse_envelope_line(line);
      reason = checker.check(env);
    } catch (const std::exception& e) {
      reason = e.what();
    }
    if (!reason.empty()) return {false, index, std::move(reason)};
    ++index;
  }
  if (checker.phase != Checker::Phase::rounds || !checker.any_round) {
    return {false, index, "truncated transcript"};
  }
  return {true, SIZE_MAX, {}};
}

}  // namespace secagg
