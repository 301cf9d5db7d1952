#include "secagg/masking.hpp"

#include <algorithm>

#include "secagg/errors.hpp"
#include "secagg/hash.hpp"

namespace secagg {

namespace {

void check_bits(uint8_t bits) {
  if (bits != 8 && bits != 16 && bits != 32 && bits != 64) {
    throw ParamError("modulus_bits must be 8, 16, 32 or 64");
  }
}

size_t value_width(uint8_t bits) { return bits / 8; }

void pack_values(Bytes& out, const std::vector<uint64_t>& values, uint8_t bits) {
  size_t width = value_width(bits);
  for (uint64_t v : values) {
    for (size_t i = 0; i < width; ++i) {
      out.push_back(static_cast<uint8_t>(v >> (8 * (width - 1 - i))));
    }
  }
}

std::vector<uint64_t> unpack_values(const uint8_t* data, size_t count, uint8_t bits) {
  size_t width = value_width(bits);
  std::vector<uint64_t> values(count);
  for (size_t i = 0; i < count; ++i) {
    uint64_t v = 0;
    for (size_t j = 0; j < width; ++j) v = (v << 8) | data[i * width + j];
    values[i] = v;
  }
  return values;
}

void check_sorted_unique(const std::vector<uint64_t>& ids, const char* what) {
  for (size_t i = 1; i < ids.size(); ++i) {
    if (ids[i] <= ids[i - 1]) throw ParamError(std::string(what) + " must be sorted and unique");
  }
}

}  // namespace

uint64_t modulus_mask(uint8_t bits) {
  check_bits(bits);
  return bits == 64 ? ~0ULL : (1ULL << bits) - 1;
}

uint64_t blind_factor(const Digest& ck, uint64_t self_id, uint64_t peer_id, uint64_t element,
                      uint64_t round, uint8_t modulus_bits) {
  uint64_t mask = modulus_mask(modulus_bits);
  if (self_id == peer_id) throw ParamError("blind factor requires distinct ids");
  Sha256 h;
  h.update_byte(kTagBlind);
  h.update(ck.data(), ck.size());
  h.update_u64_be(element);
  h.update_u64_be(round);
  Digest d = h.finish();
  op_counters().blind_hashes.fetch_add(1, std::memory_order_relaxed);
  // Digest read as a big-endian integer; mod 2^k keeps the low k bits, which
  // divides 2^256 exactly, so the reduction is uniform for every supported M.
  uint64_t value = read_u64_be(d.data() + 24) & mask;
  if (self_id > peer_id) value = (0 - value) & mask;
  return value;
}

Bytes MaskedUpdate::wire() const {
  check_bits(modulus_bits);
  Bytes out;
  out.reserve(25 + payload_bytes());
  append_u64_be(out, client_id);
  append_u64_be(out, round);
  out.push_back(modulus_bits);
  append_u64_be(out, values.size());
  pack_values(out, values, modulus_bits);
  return out;
}

size_t MaskedUpdate::payload_bytes() const { return values.size() * value_width(modulus_bits); }

MaskedUpdate MaskedUpdate::parse(const Bytes& data) {
  if (data.size() < 25) throw ShapeError("masked update shorter than header");
  MaskedUpdate mu;
  mu.client_id = read_u64_be(data.data());
  mu.round = read_u64_be(data.data() + 8);
  mu.modulus_bits = data[16];
  check_bits(mu.modulus_bits);
  uint64_t count = read_u64_be(data.data() + 17);
  size_t width = value_width(mu.modulus_bits);
  if (data.size() != 25 + count * width) throw ShapeError("masked update length mismatch");
  mu.values = unpack_values(data.data() + 25, count, mu.modulus_bits);
  return mu;
}

MaskedUpdate mask_update(const std::vector<uint64_t>& plain, const KeyMaterial& keys,
                         const MaskParams& params) {
  uint64_t mask = modulus_mask(params.modulus_bits);
  check_sorted_unique(params.participants, "participants");
  if (std::find(params.participants.begin(), params.participants.end(), keys.client_id) ==
      params.participants.end()) {
    throw ParamError("masking client must be among the participants");
  }
  for (uint64_t peer : params.participants) {
    if (peer != keys.client_id && !keys.shared.count(peer)) {
      throw KeyError("no shared key with participant " + std::to_string(peer));
    }
  }
  MaskedUpdate mu;
  mu.client_id = keys.client_id;
  mu.round = params.round;
  mu.modulus_bits = params.modulus_bits;
  mu.values.resize(plain.size());
  for (size_t b = 0; b < plain.size(); ++b) {
    if (plain[b] > mask) throw RangeError("plain value exceeds message space");
    uint64_t acc = plain[b];
    for (uint64_t peer : params.participants) {
      if (peer == keys.client_id) continue;
      acc = (acc + blind_factor(keys.shared.at(peer), keys.client_id, peer, b, params.round,
                                params.modulus_bits)) &
            mask;
    }
    mu.values[b] = acc;
  }
  return mu;
}

std::vector<uint64_t> aggregate(const std::vector<MaskedUpdate>& updates) {
  if (updates.empty()) throw ParamError("aggregate requires at least one update");
  const MaskedUpdate& first = updates.front();
  uint64_t mask = modulus_mask(first.modulus_bits);
  std::vector<uint64_t> sum(first.values.size(), 0);
  std::vector<uint64_t> seen;
  for (const MaskedUpdate& mu : updates) {
    if (mu.round != first.round) throw ShapeError("aggregate round mismatch");
    if (mu.modulus_bits != first.modulus_bits) throw ShapeError("aggregate width mismatch");
    if (mu.values.size() != sum.size()) throw ShapeError("aggregate length mismatch");
    if (std::find(seen.begin(), seen.end(), mu.client_id) != seen.end()) {
      throw ProtocolError("duplicate update from client " + std::to_string(mu.client_id));
    }
    seen.push_back(mu.client_id);
    for (size_t b = 0; b < sum.size(); ++b) {
      sum[b] = (sum[b] + mu.values[b]) & mask;
      op_counters().aggregate_adds.fetch_add(1, std::memory_order_relaxed);
    }
  }
  return sum;
}

Bytes RecoveryVector::wire() const {
  check_bits(modulus_bits);
  Bytes out;
  append_u64_be(out, client_id);
  append_u64_be(out, round);
  out.push_back(modulus_bits);
  append_u64_be(out, values.size());
  append_u64_be(out, dropped.size());
  for (uint64_t id : dropped) append_u64_be(out, id);
  pack_values(out, values, modulus_bits);
  return out;
}

RecoveryVector RecoveryVector::parse(const Bytes& data) {
  if (data.size() < 33) throw ShapeError("recovery vector shorter than header");
  RecoveryVector rv;
  rv.client_id = read_u64_be(data.data());
  rv.round = read_u64_be(data.data() + 8);
  rv.modulus_bits = data[16];
  check_bits(rv.modulus_bits);
  uint64_t count = read_u64_be(data.data() + 17);
  uint64_t ndropped = read_u64_be(data.data() + 25);
  size_t width = value_width(rv.modulus_bits);
  if (data.size() != 33 + ndropped * 8 + count * width) {
    throw ShapeError("recovery vector length mismatch");
  }
  rv.dropped.resize(ndropped);
  for (size_t i = 0; i < ndropped; ++i) rv.dropped[i] = read_u64_be(data.data() + 33 + 8 * i);
  rv.values = unpack_values(data.data() + 33 + 8 * ndropped, count, rv.modulus_bits);
  return rv;
}

RecoveryVector recovery_vector(const KeyMaterial& keys, const std::vector<uint64_t>& dropped,
                               uint64_t round, uint8_t modulus_bits, size_t length) {
  uint64_t mask = modulus_mask(modulus_bits);
  check_sorted_unique(dropped, "dropped ids");
  if (dropped.empty()) throw ParamError("recovery requires at least one dropped client");
  for (uint64_t id : dropped) {
    if (id == keys.client_id) throw ParamError("a dropped client cannot supply recovery");
    if (!keys.shared.count(id)) throw KeyError("no shared key with dropped client " + std::to_string(id));
  }
  RecoveryVector rv;
  rv.client_id = keys.client_id;
  rv.round = round;
  rv.modulus_bits = modulus_bits;
  rv.dropped = dropped;
  rv.values.resize(length);
  for (size_t b = 0; b < length; ++b) {
    uint64_t acc = 0;
    for (uint64_t id : dropped) {
      acc = (acc + blind_factor(keys.shared.at(id), keys.client_id, id, b, round, modulus_bits)) &
            mask;
    }
    rv.values[b] = acc;
  }
  return rv;
}

std::vector<uint64_t> apply_recovery(const std::vector<uint64_t>& partial,
                                     const std::vector<RecoveryVector>& recoveries,
                                     uint8_t modulus_bits) {
  uint64_t mask = modulus_mask(modulus_bits);
  std::vector<uint64_t> out = partial;
  for (const RecoveryVector& rv : recoveries) {
    if (rv.modulus_bits != modulus_bits) throw ShapeError("recovery width mismatch");
    if (rv.values.size() != partial.size()) throw ShapeError("recovery length mismatch");
    for (size_t b = 0; b < out.size(); ++b) {
      out[b] = (out[b] - rv.values[b]) & mask;
    }
  }
  return out;
}

OpCounters& op_counters() {
  static OpCounters counters;
  return counters;
}

void reset_op_counters() {
  op_counters().blind_hashes.store(0, std::memory_order_relaxed);
  op_counters().aggregate_adds.store(0, std::memory_order_relaxed);
}

}  // namespace secagg
