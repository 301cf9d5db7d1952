#include "secagg/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <random>

#include "secagg/enclave.hpp"
#include "secagg/errors.hpp"
#include "secagg/hash.hpp"
#include "secagg/protocol.hpp"
#include "secagg/transcript.hpp"

namespace secagg {

namespace {

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Irwin-Hall approximation; keeps the draw sequence identical across
/// standard library implementations.
double gauss(std::mt19937_64& rng) {
  double s = 0.0;
  for (int i = 0; i < 12; ++i) s += uniform01(rng);
  return s - 6.0;
}

Bytes be64_bytes(uint64_t v) {
  Bytes out;
  append_u64_be(out, v);
  return out;
}

std::vector<double> synthetic_delta(const SimConfig& cfg, uint64_t round, uint64_t id) {
  std::mt19937_64 rng(sub_seed(cfg.seed, "delta", round, id));
  std::vector<double> delta(cfg.workload.dimension);
  const double b = cfg.clip_bound;
  for (double& x : delta) {
    switch (cfg.workload.distribution) {
      case Distribution::uniform: x = (2.0 * uniform01(rng) - 1.0) * b; break;
      case Distribution::wide: x = (2.0 * uniform01(rng) - 1.0) * 2.0 * b; break;
      case Distribution::gaussian: x = gauss(rng) * (b / 3.0); break;
    }
  }
  return delta;
}

struct TrainerData {
  std::vector<std::vector<double>> x;
  std::vector<int> y;
};

TrainerData client_data(const SimConfig& cfg, uint64_t id) {
  std::mt19937_64 rng(sub_seed(cfg.seed, "data", id));
  const size_t features = cfg.workload.dimension - 1;
  TrainerData data;
  data.x.resize(40);
  data.y.resize(40);
  for (size_t i = 0; i < data.x.size(); ++i) {
    int label = static_cast<int>(i & 1);
    double center = label ? 0.4 : -0.4;
    data.x[i].resize(features);
    for (double& f : data.x[i]) f = center + 0.5 * gauss(rng);
    data.y[i] = label;
  }
  return data;
}

std::vector<double> train_local(const TrainerData& data, const std::vector<double>& start,
                                std::mt19937_64& rng) {
  std::vector<double> w = start;
  const size_t features = w.size() - 1;
  const double lr = 0.05;
  const size_t batch = 10;
  std::vector<size_t> order(data.x.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 0; epoch < 3; ++epoch) {
    for (size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[rng() % (i + 1)]);
    }
    for (size_t at = 0; at < order.size(); at += batch) {
      size_t take = std::min(batch, order.size() - at);
      std::vector<double> grad(w.size(), 0.0);
      for (size_t k = 0; k < take; ++k) {
        const auto& x = data.x[order[at + k]];
        double z = w[features];
        for (size_t j = 0; j < features; ++j) z += w[j] * x[j];
        double err = 1.0 / (1.0 + std::exp(-z)) - data.y[order[at + k]];
        for (size_t j = 0; j < features; ++j) grad[j] += err * x[j];
        grad[features] += err;
      }
      for (size_t j = 0; j < w.size(); ++j) w[j] -= lr * grad[j] / static_cast<double>(take);
    }
  }
  return w;
}

class PhaseTimer {
 public:
  explicit PhaseTimer(bool enabled) : enabled_(enabled) { reset(); }

  void reset() {
    if (enabled_) start_ = std::chrono::steady_clock::now();
  }

  uint64_t ns() const {
    if (!enabled_) return 0;
    auto d = std::chrono::steady_clock::now() - start_;
    return static_cast<uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(d).count());
  }

 private:
  bool enabled_;
  std::chrono::steady_clock::time_point start_;
};

}  // namespace

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::string out = "round,phase,hash_count,bytes_sent,elapsed_ns,max_abs_error\n";
  char buf[64];
  for (const MetricsRow& r : rows) {
    out += std::to_string(r.round);
    out += ',';
    out += r.phase;
    out += ',';
    out += std::to_string(r.hash_count);
    out += ',';
    out += std::to_string(r.bytes_sent);
    out += ',';
    out += std::to_string(r.elapsed_ns);
    out += ',';
    if (r.max_abs_error >= 0.0) {
      std::snprintf(buf, sizeof buf, "%.17g", r.max_abs_error);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

SimResult run_sim(const SimConfig& cfg) {
  parse_config(emit_config(cfg));  // reject out-of-range fields however the struct was built

  const size_t m = cfg.workload.dimension;
  const ProtocolConfig pc = protocol_config(cfg);

  Cohort cohort;
  std::map<uint64_t, SigKeypair> client_kp;
  std::map<uint64_t, SigPublicKey> vks;
  for (uint64_t id = 1; id <= cfg.clients; ++id) {
    join_client(cohort, id, be64_bytes(sub_seed(cfg.seed, "client-key", id)));
    client_kp[id] = gen_signing_keypair(id, be64_bytes(sub_seed(cfg.seed, "client-sign", id)));
    vks[id] = client_kp[id].pk;
  }

  std::vector<double> model(m, 0.0);
  SimResult result;

  std::optional<Enclave> enclave;
  RoundPlan plan;
  auto append = [&](const SignedEnvelope& env) {
    result.transcript += envelope_line(env);
    result.transcript += '\n';
  };
  if (cfg.attested) {
    enclave.emplace(be64_bytes(sub_seed(cfg.seed, "tee-sign")), cfg.seed);
    std::string program = emit_config(cfg);
    append(enclave->install(Bytes(program.begin(), program.end())));
    std::vector<SignedEnvelope> announcements;
    for (uint64_t id : cohort.ids()) {
      Bytes pk = encode_element(*cohort.params, cohort.registry.at(id));
      announcements.push_back(
          make_envelope(client_kp[id], RecordType::client_key, client_key_payload(id, pk)));
      append(announcements.back());
    }
    for (const auto& env : enclave->key_setup(announcements, vks, *cohort.params)) append(env);
    append(enclave->start(pc, cfg.fraction, model));
    plan = enclave->plan();

    std::map<uint64_t, SigPublicKey> registry = vks;
    registry[0] = enclave->verify_key();
    result.signer_registry = emit_signer_registry(registry);
  } else {
    plan = make_round_plan(cohort.ids(), cfg.fraction, cfg.group_size, 1,
                           sub_seed(cfg.seed, "select", 1), model);
  }

  std::map<uint64_t, TrainerData> datasets;

  for (uint64_t t = 1; t <= cfg.rounds; ++t) {
    std::mt19937_64 drop_rng(sub_seed(cfg.seed, "dropout", t));
    std::vector<uint64_t> responders;
    std::vector<uint64_t> dropped;
    for (uint64_t id : plan.selected) {
      (uniform01(drop_rng) < cfg.dropout_rate ? dropped : responders).push_back(id);
    }

    std::map<uint64_t, std::vector<double>> locals;
    for (uint64_t id : responders) {
      if (cfg.workload.kind == WorkloadKind::synthetic) {
        std::vector<double> local = plan.model;
        std::vector<double> delta = synthetic_delta(cfg, t, id);
        for (size_t b = 0; b < m; ++b) local[b] += delta[b];
        locals.emplace(id, std::move(local));
      } else {
        auto it = datasets.find(id);
        if (it == datasets.end()) it = datasets.emplace(id, client_data(cfg, id)).first;
        std::mt19937_64 rng(sub_seed(cfg.seed, "delta", t, id));
        locals.emplace(id, train_local(it->second, plan.model, rng));
      }
    }

    PhaseTimer timer(cfg.record_timing);
    uint64_t hashes0 = op_counters().blind_hashes.load();
    uint64_t bytes = 0;
    std::vector<MaskedUpdate> updates;
    std::vector<SignedEnvelope> contribs;
    for (uint64_t id : responders) {
      MaskedUpdate u = client_update(cohort.clients.at(id), plan, locals.at(id), pc);
      Bytes wire = u.wire();
      bytes += wire.size();
      if (cfg.attested) {
        contribs.push_back(make_envelope(client_kp[id], RecordType::contribution,
                                         std::move(wire)));
      }
      updates.push_back(std::move(u));
    }
    result.metrics.push_back({t, "masking", op_counters().blind_hashes.load() - hashes0, bytes,
                              timer.ns(), -1.0});

    timer.reset();
    hashes0 = op_counters().blind_hashes.load();
    bytes = 0;
    std::vector<RecoveryVector> recovs;
    std::vector<SignedEnvelope> recov_envs;
    for (const auto& group : plan.groups) {
      std::vector<uint64_t> gone;
      std::set_intersection(group.begin(), group.end(), dropped.begin(), dropped.end(),
                            std::back_inserter(gone));
      if (gone.empty() || gone.size() == group.size()) continue;
      for (uint64_t id : group) {
        if (std::binary_search(gone.begin(), gone.end(), id)) continue;
        RecoveryVector r = client_recovery(cohort.clients.at(id), plan, gone, pc);
        Bytes wire = r.wire();
        bytes += wire.size();
        if (cfg.attested) {
          recov_envs.push_back(make_envelope(client_kp[id], RecordType::recovery,
                                             std::move(wire)));
        }
        recovs.push_back(std::move(r));
      }
    }
    result.metrics.push_back({t, "recovery", op_counters().blind_hashes.load() - hashes0, bytes,
                              timer.ns(), -1.0});

    timer.reset();
    const std::vector<double> prev = plan.model;
    RoundOutcome outcome;
    if (cfg.attested) {
      for (const auto& env : contribs) append(env);
      for (const auto& env : recov_envs) append(env);
      Enclave::RoundResult res = enclave->attested_round(t, contribs, recov_envs);
      append(res.announcement);
      outcome = std::move(res.outcome);
      plan = enclave->plan();
    } else {
      outcome = server_round(plan, updates, recovs, pc);
      plan = make_round_plan(cohort.ids(), cfg.fraction, cfg.group_size, t + 1,
                             sub_seed(cfg.seed, "select", t + 1), outcome.model);
    }
    model = outcome.model;

    double err = -1.0;
    if (cfg.oracle) {
      std::vector<double> reference = prev;
      if (!outcome.responders.empty()) {
        const double count = static_cast<double>(outcome.responders.size());
        if (cfg.mode == Mode::scaling) {
          std::fill(reference.begin(), reference.end(), 0.0);
          for (uint64_t id : outcome.responders) {
            for (size_t b = 0; b < m; ++b) reference[b] += locals.at(id)[b];
          }
          for (double& x : reference) x /= count;
        } else {
          for (size_t b = 0; b < m; ++b) {
            double sum = 0.0;
            for (uint64_t id : outcome.responders) {
              sum += clip(locals.at(id)[b] - prev[b], cfg.clip_bound);
            }
            reference[b] += sum / count;
          }
        }
      }
      err = 0.0;
      for (size_t b = 0; b < m; ++b) err = std::max(err, std::fabs(model[b] - reference[b]));
      result.worst_error = std::max(result.worst_error, err);
    }
    result.metrics.push_back({t, "aggregate", 0, 8 * static_cast<uint64_t>(m), timer.ns(), err});
  }

  result.model = std::move(model);
  return result;
}

BenchCounts bench_counts(size_t clients, size_t dropped, size_t dimension, uint32_t group_size,
                         uint64_t seed) {
  if (clients < 2) throw ParamError("need at least 2 clients");
  if (dimension == 0) throw ParamError("dimension must be positive");

  Cohort cohort;
  for (uint64_t id = 1; id <= clients; ++id) {
    join_client(cohort, id, be64_bytes(sub_seed(seed, "client-key", id)));
  }
  ProtocolConfig pc;
  pc.mode = Mode::scaling;
  pc.group_size = group_size;
  RoundPlan plan = make_round_plan(cohort.ids(), 1.0, group_size, 1, seed,
                                   std::vector<double>(dimension, 0.0));
  const std::vector<uint64_t>& first_group = plan.groups.front();
  if (dropped >= first_group.size()) {
    throw ParamError("dropped clients must leave a survivor in the first group");
  }
  std::vector<uint64_t> gone(first_group.end() - static_cast<ptrdiff_t>(dropped),
                             first_group.end());

  BenchCounts out;
  out.clients = clients;
  out.dropped = dropped;
  out.dimension = dimension;
  out.group_size = group_size;

  std::vector<double> local(dimension, 0.25);
  std::vector<MaskedUpdate> updates;
  uint64_t h0 = op_counters().blind_hashes.load();
  updates.push_back(client_update(cohort.clients.at(first_group[0]), plan, local, pc));
  out.mask_hashes_per_client = op_counters().blind_hashes.load() - h0;

  for (uint64_t id : plan.selected) {
    if (id == first_group[0] || std::binary_search(gone.begin(), gone.end(), id)) continue;
    updates.push_back(client_update(cohort.clients.at(id), plan, local, pc));
  }

  std::vector<RecoveryVector> recovs;
  if (!gone.empty()) {
    h0 = op_counters().blind_hashes.load();
    recovs.push_back(client_recovery(cohort.clients.at(first_group[0]), plan, gone, pc));
    out.recovery_hashes_per_online = op_counters().blind_hashes.load() - h0;
    for (uint64_t id : first_group) {
      if (id == first_group[0] || std::binary_search(gone.begin(), gone.end(), id)) continue;
      recovs.push_back(client_recovery(cohort.clients.at(id), plan, gone, pc));
    }
  }

  uint64_t a0 = op_counters().aggregate_adds.load();
  server_round(plan, updates, recovs, pc);
  out.server_adds = op_counters().aggregate_adds.load() - a0;
  return out;
}

BenchBytes bench_bytes(size_t dimension) {
  if (dimension == 0) throw ParamError("dimension must be positive");
  BenchBytes out;
  out.dimension = dimension;
  MaskedUpdate u;
  u.client_id = 1;
  u.round = 1;
  u.values.assign(dimension, 0);
  u.modulus_bits = 32;
  out.scaling_bytes = u.payload_bytes();
  u.modulus_bits = 16;
  out.quant16_bytes = u.payload_bytes();
  u.modulus_bits = 8;
  out.quant8_bytes = u.payload_bytes();
  return out;
}

}  // namespace secagg
