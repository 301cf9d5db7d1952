#include "secagg/hash.hpp"

#include <sodium.h>

#include <mutex>
#include <stdexcept>

namespace secagg {

static void ensure_sodium() {
  static std::once_flag once;
  std::call_once(once, [] {
    if (sodium_init() < 0) throw std::runtime_error("sodium_init failed");
  });
}

static_assert(sizeof(crypto_hash_sha256_state) <= 128, "Sha256 state buffer too small");

Digest sha256(const uint8_t* data, size_t n) {
  ensure_sodium();
  Digest out;
  crypto_hash_sha256(out.data(), data, n);
  return out;
}

Digest sha256(const Bytes& data) { return sha256(data.data(), data.size()); }

Sha256::Sha256() {
  ensure_sodium();
  crypto_hash_sha256_init(reinterpret_cast<crypto_hash_sha256_state*>(state_));
}

Sha256& Sha256::update(const uint8_t* data, size_t n) {
  crypto_hash_sha256_update(reinterpret_cast<crypto_hash_sha256_state*>(state_), data, n);
  return *this;
}

Sha256& Sha256::update(const Bytes& data) { return update(data.data(), data.size()); }

Sha256& Sha256::update_u64_be(uint64_t v) {
  uint8_t buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<uint8_t>(v >> (56 - 8 * i));
  return update(buf, 8);
}

Sha256& Sha256::update_byte(uint8_t b) { return update(&b, 1); }

Digest Sha256::finish() {
  Digest out;
  crypto_hash_sha256_final(reinterpret_cast<crypto_hash_sha256_state*>(state_), out.data());
  return out;
}

uint64_t sub_seed(uint64_t master, std::string_view label, uint64_t a, uint64_t b) {
  Sha256 h;
  h.update_byte(kTagSubSeed);
  h.update_u64_be(master);
  h.update(reinterpret_cast<const uint8_t*>(label.data()), label.size());
  h.update_u64_be(a);
  h.update_u64_be(b);
  Digest d = h.finish();
  return read_u64_be(d.data());
}

}  // namespace secagg
