#include <doctest.h>
#include <openssl/bn.h>

#include "secagg/errors.hpp"
#include "secagg/group.hpp"
#include "secagg/hash.hpp"

using namespace secagg;

static Bytes seed_of(uint8_t b) { return Bytes{b, 0x5e, 0xed}; }

TEST_CASE("test-grade group parameters are a valid prime-order setup") {
  const GroupParams& g = GroupParams::test_grade();
  CHECK(g.modulus() == mpz_class("1152921504606849707"));
  CHECK(g.order() * 2 + 1 == g.modulus());
  CHECK(g.element_bytes() == 8);
}

TEST_CASE("2048-bit modulus matches the OpenSSL built-in constant") {
  BIGNUM* p = BN_get_rfc3526_prime_2048(nullptr);
  char* hex = BN_bn2hex(p);
  std::string expect(hex);
  for (char& c : expect) c = static_cast<char>(tolower(c));
  OPENSSL_free(hex);
  BN_free(p);
  CHECK(GroupParams::modp_2048().modulus().get_str(16) == expect);
  CHECK(GroupParams::modp_2048().element_bytes() == 256);
}

TEST_CASE("invalid group parameters are rejected at construction") {
  CHECK_THROWS_AS(GroupParams(15, 4, 7), ParamError);                  // composite modulus
  CHECK_THROWS_AS(GroupParams(23, 4, 7), ParamError);                  // order mismatch
  CHECK_THROWS_AS(GroupParams(23, 1, 11), ParamError);                 // degenerate generator
  CHECK_THROWS_AS(GroupParams(23, 5, 11), ParamError);                 // 5 is not a QR mod 23
  CHECK_NOTHROW(GroupParams(23, 4, 11));
}

TEST_CASE("keygen is deterministic and in range") {
  const GroupParams& g = GroupParams::test_grade();
  KeyMaterial a1 = gen_keypair(g, 1, seed_of(1));
  KeyMaterial a2 = gen_keypair(g, 1, seed_of(1));
  KeyMaterial b = gen_keypair(g, 2, seed_of(2));
  CHECK(a1.sk == a2.sk);
  CHECK(a1.pk == a2.pk);
  CHECK(a1.sk != b.sk);
  CHECK(a1.sk >= 1);
  CHECK(a1.sk < g.order());
  mpz_class expect;
  mpz_powm(expect.get_mpz_t(), g.generator().get_mpz_t(), a1.sk.get_mpz_t(),
           g.modulus().get_mpz_t());
  CHECK(a1.pk == expect);
  CHECK_THROWS_AS(gen_keypair(g, 1, Bytes{}), ParamError);
}

TEST_CASE("pairwise key derivation is symmetric") {
  const GroupParams& g = GroupParams::test_grade();
  for (uint8_t trial = 0; trial < 20; ++trial) {
    KeyMaterial a = gen_keypair(g, 1, seed_of(trial));
    KeyMaterial b = gen_keypair(g, 2, seed_of(static_cast<uint8_t>(trial + 100)));
    Digest ab = derive_shared(g, a, 2, b.pk);
    Digest ba = derive_shared(g, b, 1, a.pk);
    CHECK(ab == ba);
    CHECK(a.shared.at(2) == ab);
    CHECK(b.shared.at(1) == ab);
  }
}

TEST_CASE("pairwise key derivation works on the 2048-bit group") {
  const GroupParams& g = GroupParams::modp_2048();
  KeyMaterial a = gen_keypair(g, 1, seed_of(7));
  KeyMaterial b = gen_keypair(g, 2, seed_of(8));
  CHECK(derive_shared(g, a, 2, b.pk) == derive_shared(g, b, 1, a.pk));
}

TEST_CASE("derive_shared rejects bad input") {
  const GroupParams& g = GroupParams::test_grade();
  KeyMaterial a = gen_keypair(g, 1, seed_of(1));
  CHECK_THROWS_AS(derive_shared(g, a, 1, a.pk), ParamError);
  CHECK_THROWS_AS(derive_shared(g, a, 2, mpz_class(0)), KeyError);
  CHECK_THROWS_AS(derive_shared(g, a, 2, g.modulus()), KeyError);
}

TEST_CASE("different pairs derive different keys") {
  const GroupParams& g = GroupParams::test_grade();
  KeyMaterial a = gen_keypair(g, 1, seed_of(1));
  KeyMaterial b = gen_keypair(g, 2, seed_of(2));
  KeyMaterial c = gen_keypair(g, 3, seed_of(3));
  CHECK(derive_shared(g, a, 2, b.pk) != derive_shared(g, a, 3, c.pk));
}

TEST_CASE("element encoding is fixed width and round-trips") {
  const GroupParams& g = GroupParams::test_grade();
  mpz_class small(5);
  Bytes enc = encode_element(g, small);
  CHECK(enc.size() == 8);
  CHECK(decode_element(g, enc) == small);
  KeyMaterial a = gen_keypair(g, 1, seed_of(9));
  CHECK(decode_element(g, encode_element(g, a.pk)) == a.pk);
  CHECK_THROWS_AS(decode_element(g, Bytes{1, 2, 3}), ShapeError);
  CHECK_THROWS_AS(encode_element(g, g.modulus()), RangeError);
}

TEST_CASE("registry round-trips and rejects malformed lines") {
  const GroupParams& g = GroupParams::test_grade();
  std::map<uint64_t, mpz_class> pks;
  for (uint64_t id = 1; id <= 5; ++id) pks[id] = gen_keypair(g, id, seed_of(id)).pk;
  std::string text = emit_registry(g, pks);
  CHECK(parse_registry(g, text) == pks);
  CHECK_THROWS_AS(parse_registry(g, "1 deadbeef\n"), ConfigError);
  CHECK_THROWS_AS(parse_registry(g, "x, 00000000000000ff\n"), ConfigError);
  CHECK_THROWS_AS(parse_registry(g, "1, zz\n"), ConfigError);
  CHECK_THROWS_AS(parse_registry(g, "1, 00000000000000ff\n1, 00000000000000ff\n"), ConfigError);
}
