#include <doctest.h>

#include <algorithm>
#include <random>

#include "secagg/errors.hpp"
#include "secagg/masking.hpp"

using namespace secagg;

namespace {

// Fully keyed cohort of n clients with ids 1..n over the test-grade group.
std::map<uint64_t, KeyMaterial> make_cohort(size_t n, uint64_t seed_salt = 0) {
  const GroupParams& g = GroupParams::test_grade();
  std::map<uint64_t, KeyMaterial> cohort;
  for (uint64_t id = 1; id <= n; ++id) {
    Bytes seed{static_cast<uint8_t>(id), static_cast<uint8_t>(seed_salt), 0x01};
    cohort.emplace(id, gen_keypair(g, id, seed));
  }
  for (auto& [ida, a] : cohort) {
    for (auto& [idb, b] : cohort) {
      if (ida < idb) {
        derive_shared(g, a, idb, b.pk);
        derive_shared(g, b, ida, a.pk);
      }
    }
  }
  return cohort;
}

std::vector<uint64_t> all_ids(const std::map<uint64_t, KeyMaterial>& cohort) {
  std::vector<uint64_t> ids;
  for (const auto& [id, km] : cohort) ids.push_back(id);
  return ids;
}

std::vector<uint64_t> random_plain(size_t m, uint64_t mask, std::mt19937_64& rng) {
  std::vector<uint64_t> v(m);
  for (auto& x : v) x = rng() & mask;
  return v;
}

}  // namespace

TEST_CASE("masks cancel across the full participant set") {
  auto cohort = make_cohort(5);
  std::vector<uint64_t> ids = all_ids(cohort);
  std::mt19937_64 rng(7);
  for (uint8_t bits : {8, 16, 32, 64}) {
    uint64_t mask = modulus_mask(bits);
    MaskParams mp{bits, 3, ids};
    size_t m = 9;
    std::vector<uint64_t> plain_sum(m, 0);
    std::vector<MaskedUpdate> updates;
    for (const auto& [id, km] : cohort) {
      std::vector<uint64_t> plain = random_plain(m, mask, rng);
      for (size_t b = 0; b < m; ++b) plain_sum[b] = (plain_sum[b] + plain[b]) & mask;
      updates.push_back(mask_update(plain, km, mp));
    }
    CHECK(aggregate(updates) == plain_sum);
  }
}

TEST_CASE("sum of pure mask vectors is zero") {
  auto cohort = make_cohort(4);
  MaskParams mp{16, 1, all_ids(cohort)};
  std::vector<uint64_t> zeros(6, 0);
  std::vector<MaskedUpdate> updates;
  for (const auto& [id, km] : cohort) updates.push_back(mask_update(zeros, km, mp));
  CHECK(aggregate(updates) == zeros);
}

TEST_CASE("masking is invertible per client") {
  auto cohort = make_cohort(3);
  MaskParams mp{32, 2, all_ids(cohort)};
  uint64_t mask = modulus_mask(32);
  std::mt19937_64 rng(11);
  std::vector<uint64_t> plain = random_plain(5, mask, rng);
  const KeyMaterial& km = cohort.at(2);
  MaskedUpdate masked = mask_update(plain, km, mp);
  MaskedUpdate mask_only = mask_update(std::vector<uint64_t>(5, 0), km, mp);
  for (size_t b = 0; b < plain.size(); ++b) {
    CHECK(((masked.values[b] - mask_only.values[b]) & mask) == plain[b]);
  }
}

TEST_CASE("masked update differs from plain input") {
  auto cohort = make_cohort(2);
  MaskParams mp{32, 0, all_ids(cohort)};
  std::vector<uint64_t> plain(8, 42);
  MaskedUpdate mu = mask_update(plain, cohort.at(1), mp);
  CHECK(mu.values != plain);
}

TEST_CASE("single participant masks nothing") {
  auto cohort = make_cohort(1);
  MaskParams mp{16, 0, {1}};
  std::vector<uint64_t> plain{1, 2, 3};
  CHECK(mask_update(plain, cohort.at(1), mp).values == plain);
}

TEST_CASE("wire form round-trips bit-exactly") {
  auto cohort = make_cohort(3);
  for (uint8_t bits : {8, 16, 32, 64}) {
    MaskParams mp{bits, 9, all_ids(cohort)};
    std::mt19937_64 rng(bits);
    std::vector<uint64_t> plain = random_plain(7, modulus_mask(bits), rng);
    MaskedUpdate mu = mask_update(plain, cohort.at(2), mp);
    Bytes wire = mu.wire();
    CHECK(wire.size() == 25 + 7 * (bits / 8));
    MaskedUpdate back = MaskedUpdate::parse(wire);
    CHECK(back.client_id == mu.client_id);
    CHECK(back.round == mu.round);
    CHECK(back.modulus_bits == mu.modulus_bits);
    CHECK(back.values == mu.values);
    CHECK(back.wire() == wire);
    CHECK(mu.payload_bytes() == 7 * (bits / 8));
  }
  CHECK_THROWS_AS(MaskedUpdate::parse(Bytes{1, 2, 3}), ShapeError);
}

TEST_CASE("recovery cancels dropped clients' masks exhaustively at n=5") {
  auto cohort = make_cohort(5);
  std::vector<uint64_t> ids = all_ids(cohort);
  uint8_t bits = 16;
  uint64_t mask = modulus_mask(bits);
  size_t m = 4;
  MaskParams mp{bits, 5, ids};
  std::mt19937_64 rng(23);

  std::map<uint64_t, std::vector<uint64_t>> plains;
  std::map<uint64_t, MaskedUpdate> masked;
  for (const auto& [id, km] : cohort) {
    plains[id] = random_plain(m, mask, rng);
    masked[id] = mask_update(plains[id], km, mp);
  }

  // Every nonempty proper subset of the five clients drops.
  for (uint32_t subset = 1; subset < 31; ++subset) {
    std::vector<uint64_t> dropped, online;
    for (size_t i = 0; i < 5; ++i) {
      if (subset & (1u << i)) {
        dropped.push_back(ids[i]);
      } else {
        online.push_back(ids[i]);
      }
    }
    std::vector<MaskedUpdate> updates;
    std::vector<uint64_t> expect(m, 0);
    for (uint64_t id : online) {
      updates.push_back(masked[id]);
      for (size_t b = 0; b < m; ++b) expect[b] = (expect[b] + plains[id][b]) & mask;
    }
    std::vector<RecoveryVector> recoveries;
    for (uint64_t id : online) {
      recoveries.push_back(recovery_vector(cohort.at(id), dropped, 5, bits, m));
    }
    CHECK(apply_recovery(aggregate(updates), recoveries, bits) == expect);
  }
}

TEST_CASE("recovery vector wire form round-trips") {
  auto cohort = make_cohort(4);
  RecoveryVector rv = recovery_vector(cohort.at(1), {2, 4}, 3, 32, 5);
  Bytes wire = rv.wire();
  RecoveryVector back = RecoveryVector::parse(wire);
  CHECK(back.client_id == rv.client_id);
  CHECK(back.round == rv.round);
  CHECK(back.dropped == rv.dropped);
  CHECK(back.values == rv.values);
  CHECK(back.wire() == wire);
}

TEST_CASE("recovery input validation") {
  auto cohort = make_cohort(3);
  CHECK_THROWS_AS(recovery_vector(cohort.at(1), {}, 0, 16, 4), ParamError);
  CHECK_THROWS_AS(recovery_vector(cohort.at(1), {1}, 0, 16, 4), ParamError);
  CHECK_THROWS_AS(recovery_vector(cohort.at(1), {9}, 0, 16, 4), KeyError);
  CHECK_THROWS_AS(recovery_vector(cohort.at(1), {3, 2}, 0, 16, 4), ParamError);
}

TEST_CASE("mask_update input validation") {
  auto cohort = make_cohort(3);
  MaskParams mp{16, 0, all_ids(cohort)};
  CHECK_THROWS_AS(mask_update({1ULL << 20}, cohort.at(1), mp), RangeError);
  MaskParams not_member{16, 0, {5, 6}};
  CHECK_THROWS_AS(mask_update({0}, cohort.at(1), not_member), ParamError);
  MaskParams unknown_peer{16, 0, {1, 9}};
  CHECK_THROWS_AS(mask_update({0}, cohort.at(1), unknown_peer), KeyError);
  MaskParams unsorted{16, 0, {2, 1, 3}};
  CHECK_THROWS_AS(mask_update({0}, cohort.at(1), unsorted), ParamError);
  MaskParams bad_bits{12, 0, all_ids(cohort)};
  CHECK_THROWS_AS(mask_update({0}, cohort.at(1), bad_bits), ParamError);
}

TEST_CASE("aggregate input validation") {
  auto cohort = make_cohort(2);
  MaskParams mp{16, 1, all_ids(cohort)};
  MaskedUpdate a = mask_update({1, 2}, cohort.at(1), mp);
  MaskedUpdate b = mask_update({3, 4}, cohort.at(2), mp);
  CHECK_THROWS_AS(aggregate({}), ParamError);
  CHECK_THROWS_AS(aggregate({a, a}), ProtocolError);
  MaskedUpdate wrong_round = b;
  wrong_round.round = 2;
  CHECK_THROWS_AS(aggregate({a, wrong_round}), ShapeError);
  MaskedUpdate wrong_len = b;
  wrong_len.values.push_back(0);
  CHECK_THROWS_AS(aggregate({a, wrong_len}), ShapeError);
}

TEST_CASE("hash and addition counters are exact") {
  auto cohort = make_cohort(6);
  std::vector<uint64_t> ids = all_ids(cohort);
  size_t m = 11;
  MaskParams mp{32, 2, ids};

  reset_op_counters();
  MaskedUpdate mu = mask_update(std::vector<uint64_t>(m, 0), cohort.at(3), mp);
  CHECK(op_counters().blind_hashes.load() == m * (ids.size() - 1));

  reset_op_counters();
  recovery_vector(cohort.at(1), {2, 4, 6}, 2, 32, m);
  CHECK(op_counters().blind_hashes.load() == m * 3);

  std::vector<MaskedUpdate> updates;
  for (uint64_t id : ids) updates.push_back(mask_update(std::vector<uint64_t>(m, 0), cohort.at(id), mp));
  reset_op_counters();
  aggregate(updates);
  CHECK(op_counters().aggregate_adds.load() == m * ids.size());
  CHECK(op_counters().blind_hashes.load() == 0);
  reset_op_counters();
}

TEST_CASE("serialized messages never leak pairwise keys") {
  auto cohort = make_cohort(4);
  std::vector<uint64_t> ids = all_ids(cohort);
  MaskParams mp{64, 1, ids};
  std::mt19937_64 rng(99);
  Bytes all_wire;
  std::vector<RecoveryVector> recoveries;
  for (const auto& [id, km] : cohort) {
    auto mu = mask_update(random_plain(6, modulus_mask(64), rng), km, mp);
    Bytes w = mu.wire();
    all_wire.insert(all_wire.end(), w.begin(), w.end());
  }
  for (uint64_t id : {2ULL, 3ULL, 4ULL}) {
    RecoveryVector rv = recovery_vector(cohort.at(1), {id}, 1, 64, 6);
    Bytes w = rv.wire();
    all_wire.insert(all_wire.end(), w.begin(), w.end());
    recoveries.push_back(rv);
  }
  for (const auto& [id, km] : cohort) {
    for (const auto& [peer, ck] : km.shared) {
      auto hit = std::search(all_wire.begin(), all_wire.end(), ck.begin(), ck.end());
      CHECK(hit == all_wire.end());
      uint64_t key_prefix = 0;
      for (int i = 0; i < 8; ++i) key_prefix = (key_prefix << 8) | ck[i];
      for (const RecoveryVector& rv : recoveries) {
        for (uint64_t v : rv.values) CHECK(v != key_prefix);
      }
    }
  }
}
