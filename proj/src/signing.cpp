#include "secagg/signing.hpp"

#include <sodium.h>

#include <mutex>
#include <sstream>
#include <stdexcept>

#include "secagg/errors.hpp"
#include "secagg/hash.hpp"

namespace secagg {

static void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("sodium_init failed");
  });
}

static_assert(crypto_sign_PUBLICKEYBYTES == 32);
static_assert(crypto_sign_SECRETKEYBYTES == 64);
static_assert(crypto_sign_BYTES == 64);
static_assert(crypto_sign_SEEDBYTES == 32);

SigKeypair gen_signing_keypair(uint64_t signer, const Bytes& seed) {
  if (seed.empty()) throw ParamError("signing seed must not be empty");
  ensure_sodium();
  Sha256 h;
  h.update_byte(kTagSigSeed);
  h.update_u64_be(signer);
  h.update(seed);
  Digest d = h.finish();
  SigKeypair kp;
  kp.signer = signer;
  crypto_sign_seed_keypair(kp.pk.data(), kp.sk.data(), d.data());
  return kp;
}

Signature sign_detached(const SigKeypair& kp, const Bytes& msg) {
  ensure_sodium();
  Signature sig;
  crypto_sign_detached(sig.data(), nullptr, msg.data(), msg.size(), kp.sk.data());
  return sig;
}

bool verify_detached(const SigPublicKey& pk, const Bytes& msg, const Signature& sig) {
  ensure_sodium();
  return crypto_sign_verify_detached(sig.data(), msg.data(), msg.size(), pk.data()) == 0;
}

std::string emit_signer_registry(const std::map<uint64_t, SigPublicKey>& registry) {
  std::ostringstream out;
  for (const auto& [id, pk] : registry) {
    out << id << ", " << to_hex(Bytes(pk.begin(), pk.end())) << "\n";
  }
  return out.str();
}

std::map<uint64_t, SigPublicKey> parse_signer_registry(const std::string& text) {
  std::map<uint64_t, SigPublicKey> out;
  std::istringstream in(text);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    size_t comma = line.find(',');
    if (comma == std::string::npos) {
      throw ConfigError("registry line " + std::to_string(lineno) + ": missing comma");
    }
    std::string id_part = line.substr(0, comma);
    std::string hex_part = line.substr(comma + 1);
    while (!hex_part.empty() && hex_part.front() == ' ') hex_part.erase(hex_part.begin());
    uint64_t id = 0;
    try {
      size_t used = 0;
      id = std::stoull(id_part, &used);
      if (used != id_part.size()) throw std::invalid_argument("trailing junk");
    } catch (const std::exception&) {
      throw ConfigError("registry line " + std::to_string(lineno) + ": bad signer id");
    }
    if (out.count(id)) {
      throw ConfigError("registry line " + std::to_string(lineno) + ": duplicate signer id");
    }
    Bytes raw;
    try {
      raw = from_hex(hex_part);
    } catch (const std::exception& e) {
      throw ConfigError("registry line " + std::to_string(lineno) + ": " + e.what());
    }
    if (raw.size() != 32) {
      throw ConfigError("registry line " + std::to_string(lineno) + ": key must be 32 bytes");
    }
    SigPublicKey pk;
    std::copy(raw.begin(), raw.end(), pk.begin());
    out.emplace(id, pk);
  }
  return out;
}

}  // namespace secagg
