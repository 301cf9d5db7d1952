#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "secagg/bytes.hpp"

namespace secagg {

/// Multiplicative group used for pairwise key agreement: a prime-order
/// subgroup of Z_modulus^* where modulus is a safe prime and the generator
/// is a quadratic residue, so it generates the subgroup of prime order
/// (modulus - 1) / 2. Exponents live in [1, order - 1].
class GroupParams {
 public:
  GroupParams(mpz_class modulus, mpz_class generator, mpz_class order);

  /// 61-bit safe prime group, cheap enough for exhaustive tests.
  static const GroupParams& test_grade();
  /// RFC 3526 2048-bit MODP safe prime, generator 4.
  static const GroupParams& modp_2048();

  const mpz_class& modulus() const { return modulus_; }
  const mpz_class& generator() const { return generator_; }
  const mpz_class& order() const { return order_; }

  /// Fixed byte width of a canonically encoded element.
  size_t element_bytes() const { return element_bytes_; }

  bool operator==(const GroupParams& other) const;

 private:
  mpz_class modulus_;
  mpz_class generator_;
  mpz_class order_;
  size_t element_bytes_;
};

/// Fixed-width big-endian encoding of a group element.
Bytes encode_element(const GroupParams& params, const mpz_class& e);
mpz_class decode_element(const GroupParams& params, const Bytes& data);

/// One client's key agreement state. shared maps peer id to the 32-byte
/// pairwise key derived with that peer.
struct KeyMaterial {
  uint64_t client_id = 0;
  mpz_class sk;
  mpz_class pk;
  std::map<uint64_t, Digest> shared;
};

/// Deterministic keypair from a seed: the seed is expanded by SHA-256 in
/// counter mode to order-size + 128 bits and reduced into [1, order - 1].
KeyMaterial gen_keypair(const GroupParams& params, uint64_t client_id, const Bytes& seed);

/// Derives the pairwise key H(peer_pk ^ my_sk) and records it under peer_id.
Digest derive_shared(const GroupParams& params, KeyMaterial& me, uint64_t peer_id,
                     const mpz_class& peer_pk);

/// Public key registry, one line per client: "<id>, <fixed-width lowercase hex>".
std::string emit_registry(const GroupParams& params, const std::map<uint64_t, mpz_class>& pks);
std::map<uint64_t, mpz_class> parse_registry(const GroupParams& params, const std::string& text);

}  // namespace secagg
