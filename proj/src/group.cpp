#include "secagg/group.hpp"

#include <sstream>

#include "secagg/errors.hpp"
#include "secagg/hash.hpp"

namespace secagg {

namespace {

// Smallest safe prime above 2^60; order = (p - 1) / 2 is prime, generator 4
// is a quadratic residue so it generates the prime-order subgroup.
const char kTestModulusHex[] = "1000000000000aab";

// RFC 3526 group 14 modulus (2048-bit safe prime).
const char kModp2048Hex[] =
    "ffffffffffffffffc90fdaa22168c234c4c6628b80dc1cd129024e088a67cc74"
    "020bbea63b139b22514a08798e3404ddef9519b3cd3a431b302b0a6df25f1437"
    "4fe1356d6d51c245e485b576625e7ec6f44c42e9a637ed6b0bff5cb6f406b7ed"
    "ee386bfb5a899fa5ae9f24117c4b1fe649286651ece45b3dc2007cb8a163bf05"
    "98da48361c55d39a69163fa8fd24cf5f83655d23dca3ad961c62f356208552bb"
    "9ed529077096966d670c354e4abc9804f1746c08ca18217c32905e462e36ce3b"
    "e39e772c180e86039b2783a2ec07a28fb5c55df06f4c52c9de2bcbf695581718"
    "3995497cea956ae515d2261898fa051015728e5a8aacaa68ffffffffffffffff";

bool probably_prime(const mpz_class& n) {
  return mpz_probab_prime_p(n.get_mpz_t(), 30) > 0;
}

mpz_class powm(const mpz_class& base, const mpz_class& exp, const mpz_class& mod) {
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return out;
}

}  // namespace

GroupParams::GroupParams(mpz_class modulus, mpz_class generator, mpz_class order)
    : modulus_(std::move(modulus)), generator_(std::move(generator)), order_(std::move(order)) {
  if (modulus_ < 5) throw ParamError("group modulus too small");
  if (!probably_prime(modulus_)) throw ParamError("group modulus is not prime");
  if (!probably_prime(order_)) throw ParamError("group order is not prime");
  if (mpz_class(2 * order_ + 1) != modulus_) throw ParamError("order must be (modulus - 1) / 2");
  if (generator_ <= 1 || generator_ >= modulus_) throw ParamError("generator out of range");
  if (powm(generator_, order_, modulus_) != 1) {
    throw ParamError("generator does not generate the prime-order subgroup");
  }
  element_bytes_ = (mpz_sizeinbase(modulus_.get_mpz_t(), 2) + 7) / 8;
}

const GroupParams& GroupParams::test_grade() {
  static const GroupParams params = [] {
    mpz_class p(kTestModulusHex, 16);
    return GroupParams(p, 4, (p - 1) / 2);
  }();
  return params;
}

const GroupParams& GroupParams::modp_2048() {
  static const GroupParams params = [] {
    mpz_class p(kModp2048Hex, 16);
    return GroupParams(p, 4, (p - 1) / 2);
  }();
  return params;
}

bool GroupParams::operator==(const GroupParams& other) const {
  return modulus_ == other.modulus_ && generator_ == other.generator_ && order_ == other.order_;
}

Bytes encode_element(const GroupParams& params, const mpz_class& e) {
  if (e < 0 || e >= params.modulus()) throw RangeError("group element out of range");
  Bytes out(params.element_bytes(), 0);
  size_t count = 0;
  mpz_export(out.data() + out.size() - ((mpz_sizeinbase(e.get_mpz_t(), 2) + 7) / 8), &count, 1,
             1, 1, 0, e.get_mpz_t());
  return out;
}

mpz_class decode_element(const GroupParams& params, const Bytes& data) {
  if (data.size() != params.element_bytes()) throw ShapeError("encoded element has wrong width");
  mpz_class e;
  mpz_import(e.get_mpz_t(), data.size(), 1, 1, 1, 0, data.data());
  if (e >= params.modulus()) throw RangeError("decoded element out of range");
  return e;
}

KeyMaterial gen_keypair(const GroupParams& params, uint64_t client_id, const Bytes& seed) {
  if (seed.empty()) throw ParamError("empty key seed");
  // Expand to order bits + 128 so the reduction bias is below 2^-128.
  size_t want = (mpz_sizeinbase(params.order().get_mpz_t(), 2) + 128 + 7) / 8;
  Bytes stream;
  for (uint32_t counter = 0; stream.size() < want; ++counter) {
    Sha256 h;
    h.update_byte(kTagKeyExpand);
    h.update(seed);
    h.update_u64_be(counter);
    Digest block = h.finish();
    stream.insert(stream.end(), block.begin(), block.end());
  }
  stream.resize(want);

  mpz_class wide;
  mpz_import(wide.get_mpz_t(), stream.size(), 1, 1, 1, 0, stream.data());

  KeyMaterial km;
  km.client_id = client_id;
  km.sk = wide % (params.order() - 1) + 1;
  mpz_powm(km.pk.get_mpz_t(), params.generator().get_mpz_t(), km.sk.get_mpz_t(),
           params.modulus().get_mpz_t());
  return km;
}

Digest derive_shared(const GroupParams& params, KeyMaterial& me, uint64_t peer_id,
                     const mpz_class& peer_pk) {
  if (peer_id == me.client_id) throw ParamError("cannot derive a shared key with self");
  if (peer_pk <= 1 || peer_pk >= params.modulus()) throw KeyError("peer public key out of range");
  mpz_class point;
  mpz_powm(point.get_mpz_t(), peer_pk.get_mpz_t(), me.sk.get_mpz_t(),
           params.modulus().get_mpz_t());
  Bytes encoded = encode_element(params, point);
  Sha256 h;
  h.update_byte(kTagSharedKey);
  h.update(encoded);
  Digest ck = h.finish();
  me.shared[peer_id] = ck;
  return ck;
}

std::string emit_registry(const GroupParams& params, const std::map<uint64_t, mpz_class>& pks) {
  std::ostringstream out;
  for (const auto& [id, pk] : pks) {
    out << id << ", " << to_hex(encode_element(params, pk)) << "\n";
  }
  return out.str();
}

std::map<uint64_t, mpz_class> parse_registry(const GroupParams& params, const std::string& text) {
  std::map<uint64_t, mpz_class> out;
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
      throw ConfigError("registry line " + std::to_string(lineno) + ": bad client id");
    }
    if (out.count(id)) {
      throw ConfigError("registry line " + std::to_string(lineno) + ": duplicate client id");
    }
    try {
      out.emplace(id, decode_element(params, from_hex(hex_part)));
    } catch (const std::exception& e) {
      throw ConfigError("registry line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace secagg
