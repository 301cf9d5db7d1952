#include "secagg/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "secagg/errors.hpp"

namespace secagg {

uint8_t mode_bits(Mode mode) {
  switch (mode) {
    case Mode::scaling: return 32;
    case Mode::quant8: return 8;
    case Mode::quant16: return 16;
  }
  throw ParamError("unknown mode");
}

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::scaling: return "scaling";
    case Mode::quant8: return "quant8";
    case Mode::quant16: return "quant16";
  }
  throw ParamError("unknown mode");
}

Mode mode_from_name(const std::string& name) {
  if (name == "scaling") return Mode::scaling;
  if (name == "quant8") return Mode::quant8;
  if (name == "quant16") return Mode::quant16;
  throw ConfigError("unknown mode '" + name + "' (expected scaling, quant8 or quant16)");
}

std::vector<uint64_t> select_clients(const std::vector<uint64_t>& ids, double fraction,
                                     uint64_t seed) {
  if (ids.empty()) throw ParamError("cannot select from an empty client set");
  if (!(fraction > 0.0) || fraction > 1.0) throw ParamError("fraction must be in (0, 1]");
  // The 1e-9 slack keeps ceil() from over-counting when fraction * n picks up
  // floating-point dust (0.1 * 100 is slightly above 10).
  auto count = static_cast<size_t>(
      std::ceil(fraction * static_cast<double>(ids.size()) - 1e-9));
  count = std::min(std::max<size_t>(count, 1), ids.size());

  std::vector<uint64_t> pool = ids;
  std::sort(pool.begin(), pool.end());
  std::mt19937_64 rng(seed);
  for (size_t i = pool.size() - 1; i > 0; --i) {
    size_t j = static_cast<size_t>(rng() % (i + 1));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<std::vector<uint64_t>> build_groups(const std::vector<uint64_t>& selected,
                                                uint32_t group_size) {
  if (group_size < 1) throw ParamError("group size must be at least 1");
  std::vector<std::vector<uint64_t>> groups;
  for (size_t start = 0; start < selected.size(); start += group_size) {
    size_t stop = std::min(selected.size(), start + group_size);
    groups.emplace_back(selected.begin() + start, selected.begin() + stop);
  }
  return groups;
}

RoundPlan make_round_plan(const std::vector<uint64_t>& ids, double fraction, uint32_t group_size,
                          uint64_t round, uint64_t seed, std::vector<double> model) {
  RoundPlan plan;
  plan.round = round;
  plan.selected = select_clients(ids, fraction, seed);
  if (group_size == 0) group_size = static_cast<uint32_t>(plan.selected.size());
  plan.groups = build_groups(plan.selected, group_size);
  plan.model = std::move(model);
  return plan;
}

const std::vector<uint64_t>& group_of(const RoundPlan& plan, uint64_t client_id) {
  for (const auto& group : plan.groups) {
    if (std::binary_search(group.begin(), group.end(), client_id)) return group;
  }
  throw ParamError("client " + std::to_string(client_id) + " is not selected this round");
}

MaskedUpdate client_update(const KeyMaterial& keys, const RoundPlan& plan,
                           const std::vector<double>& local_model, const ProtocolConfig& cfg) {
  if (local_model.size() != plan.model.size()) throw ShapeError("local model length mismatch");
  const std::vector<uint64_t>& group = group_of(plan, keys.client_id);
  uint8_t bits = mode_bits(cfg.mode);

  std::vector<uint64_t> plain(local_model.size());
  if (cfg.mode == Mode::scaling) {
    for (size_t b = 0; b < local_model.size(); ++b) {
      int64_t s = scale_to_int(local_model[b], cfg.scale);
      if (s > INT32_MAX || s < INT32_MIN) {
        throw RangeError("scaled value does not fit the 32-bit message space");
      }
      plain[b] = wrap_signed(s, bits);
    }
  } else {
    QuantConfig qc{mode_bits(cfg.mode), cfg.clip_bound, static_cast<uint32_t>(group.size())};
    for (size_t b = 0; b < local_model.size(); ++b) {
      double delta = clip(local_model[b] - plan.model[b], cfg.clip_bound);
      plain[b] = wrap_signed(quantize(qc, delta), bits);
    }
  }

  MaskParams mp{bits, plan.round, group};
  return mask_update(plain, keys, mp);
}

RecoveryVector client_recovery(const KeyMaterial& keys, const RoundPlan& plan,
                               const std::vector<uint64_t>& dropped_in_group,
                               const ProtocolConfig& cfg) {
  const std::vector<uint64_t>& group = group_of(plan, keys.client_id);
  for (uint64_t id : dropped_in_group) {
    if (!std::binary_search(group.begin(), group.end(), id)) {
      throw ParamError("dropped client " + std::to_string(id) + " is not in this group");
    }
  }
  return recovery_vector(keys, dropped_in_group, plan.round, mode_bits(cfg.mode),
                         plan.model.size());
}

RoundOutcome server_round(const RoundPlan& plan, const std::vector<MaskedUpdate>& updates,
                          const std::vector<RecoveryVector>& recoveries,
                          const ProtocolConfig& cfg) {
  const size_t m = plan.model.size();
  const uint8_t bits = mode_bits(cfg.mode);

  std::map<uint64_t, const MaskedUpdate*> by_client;
  for (const MaskedUpdate& mu : updates) {
    if (!std::binary_search(plan.selected.begin(), plan.selected.end(), mu.client_id)) {
      throw ProtocolError("update from unselected client " + std::to_string(mu.client_id));
    }
    if (mu.round != plan.round) throw ProtocolError("update for a different round");
    if (mu.modulus_bits != bits) throw ShapeError("update width does not match the mode");
    if (mu.values.size() != m) throw ShapeError("update length mismatch");
    if (!by_client.emplace(mu.client_id, &mu).second) {
      throw ProtocolError("duplicate update from client " + std::to_string(mu.client_id));
    }
  }

  std::vector<const RecoveryVector*> unused;
  for (const RecoveryVector& rv : recoveries) unused.push_back(&rv);

  RoundOutcome outcome;
  outcome.round = plan.round;
  outcome.update_sum.assign(m, 0.0);

  std::vector<uint64_t> scaled_total(cfg.mode == Mode::scaling ? m : 0, 0);
  const uint64_t mask = modulus_mask(bits);

  for (size_t gi = 0; gi < plan.groups.size(); ++gi) {
    const std::vector<uint64_t>& group = plan.groups[gi];
    std::vector<MaskedUpdate> present;
    std::vector<uint64_t> missing;
    for (uint64_t id : group) {
      auto it = by_client.find(id);
      if (it == by_client.end()) {
        missing.push_back(id);
      } else {
        present.push_back(*it->second);
      }
    }
    outcome.dropped.insert(outcome.dropped.end(), missing.begin(), missing.end());
    if (present.empty()) {
      outcome.skipped_groups.push_back(gi);
      continue;
    }
    for (const MaskedUpdate& mu : present) outcome.responders.push_back(mu.client_id);

    std::vector<uint64_t> gsum = aggregate(present);

    if (!missing.empty()) {
      std::vector<RecoveryVector> used;
      for (const MaskedUpdate& mu : present) {
        auto it = std::find_if(unused.begin(), unused.end(), [&](const RecoveryVector* rv) {
          return rv && rv->client_id == mu.client_id && rv->round == plan.round &&
                 rv->dropped == missing;
        });
        if (it == unused.end()) {
          throw ProtocolError("missing recovery vector from client " +
                              std::to_string(mu.client_id));
        }
        if ((*it)->modulus_bits != bits || (*it)->values.size() != m) {
          throw ShapeError("recovery vector shape mismatch");
        }
        used.push_back(**it);
        *it = nullptr;
      }
      gsum = apply_recovery(gsum, used, bits);
    }

    if (cfg.mode == Mode::scaling) {
      for (size_t b = 0; b < m; ++b) scaled_total[b] = (scaled_total[b] + gsum[b]) & mask;
    } else {
      // Groups can differ in size, so each group's sum is sign-recovered and
      // de-quantized at its own scale before the cross-group sum.
      QuantConfig qc{bits, cfg.clip_bound, static_cast<uint32_t>(group.size())};
      for (size_t b = 0; b < m; ++b) {
        outcome.update_sum[b] += dequantize(qc, recover_sign(gsum[b], bits));
      }
    }
  }

  for (const RecoveryVector* rv : unused) {
    if (rv) throw ProtocolError("unexpected recovery vector from client " +
                                std::to_string(rv->client_id));
  }

  std::sort(outcome.responders.begin(), outcome.responders.end());
  std::sort(outcome.dropped.begin(), outcome.dropped.end());

  if (outcome.responders.empty()) {
    outcome.model = plan.model;
    return outcome;
  }

  const auto count = static_cast<double>(outcome.responders.size());
  outcome.model.resize(m);
  if (cfg.mode == Mode::scaling) {
    for (size_t b = 0; b < m; ++b) {
      outcome.update_sum[b] =
          descale(static_cast<double>(recover_sign(scaled_total[b], bits)), cfg.scale);
      outcome.model[b] = outcome.update_sum[b] / count;
    }
  } else {
    for (size_t b = 0; b < m; ++b) {
      outcome.model[b] = plan.model[b] + outcome.update_sum[b] / count;
    }
  }
  return outcome;
}

std::vector<uint64_t> Cohort::ids() const {
  std::vector<uint64_t> out;
  out.reserve(clients.size());
  for (const auto& [id, km] : clients) out.push_back(id);
  return out;
}

void join_client(Cohort& cohort, uint64_t id, const Bytes& key_seed) {
  if (cohort.clients.count(id)) throw ParamError("client id already registered");
  KeyMaterial km = gen_keypair(*cohort.params, id, key_seed);
  for (auto& [other_id, other] : cohort.clients) {
    derive_shared(*cohort.params, other, id, km.pk);
    derive_shared(*cohort.params, km, other_id, other.pk);
  }
  cohort.registry.emplace(id, km.pk);
  cohort.clients.emplace(id, std::move(km));
}

void leave_client(Cohort& cohort, uint64_t id) {
  cohort.registry.erase(id);
  cohort.clients.erase(id);
  for (auto& [other_id, other] : cohort.clients) other.shared.erase(id);
}

}  // namespace secagg
