#include <doctest.h>

#include <string>

#include "secagg/config.hpp"
#include "secagg/errors.hpp"
#include "secagg/quantizer.hpp"
#include "secagg/sim.hpp"
#include "secagg/transcript.hpp"

using namespace secagg;

namespace {

SimConfig base_config() {
  SimConfig cfg;
  cfg.seed = 2024;
  cfg.clients = 12;
  cfg.fraction = 0.75;
  cfg.group_size = 3;
  cfg.rounds = 3;
  cfg.dropout_rate = 0.2;
  cfg.workload.dimension = 8;
  return cfg;
}

}  // namespace

TEST_CASE("identical configs give byte-identical runs") {
  SimConfig cfg = base_config();
  cfg.attested = true;
  SimResult a = run_sim(cfg);
  SimResult b = run_sim(cfg);
  CHECK(a.model == b.model);
  CHECK(metrics_csv(a.metrics) == metrics_csv(b.metrics));
  CHECK(a.transcript == b.transcript);
  CHECK(!a.transcript.empty());
  CHECK(a.signer_registry == b.signer_registry);
}

TEST_CASE("metrics table shape") {
  SimConfig cfg = base_config();
  SimResult res = run_sim(cfg);
  REQUIRE(res.metrics.size() == 3 * cfg.rounds);
  std::string csv = metrics_csv(res.metrics);
  CHECK(csv.rfind("round,phase,hash_count,bytes_sent,elapsed_ns,max_abs_error\n", 0) == 0);
  for (size_t i = 0; i < res.metrics.size(); i += 3) {
    CHECK(res.metrics[i].phase == "masking");
    CHECK(res.metrics[i + 1].phase == "recovery");
    CHECK(res.metrics[i + 2].phase == "aggregate");
    CHECK(res.metrics[i].round == i / 3 + 1);
    CHECK(res.metrics[i].max_abs_error == -1.0);
    CHECK(res.metrics[i + 2].max_abs_error >= 0.0);
    CHECK(res.metrics[i + 2].bytes_sent == 8 * cfg.workload.dimension);
  }
  CHECK(res.transcript.empty());
}

TEST_CASE("scaling mode tracks the plain average within 1/L") {
  SimConfig cfg = base_config();
  cfg.rounds = 4;
  SimResult res = run_sim(cfg);
  CHECK(res.worst_error <= 1.0 / static_cast<double>(cfg.scale) + 1e-12);
  CHECK(res.worst_error >= 0.0);
}

TEST_CASE("quantized modes stay within half a step") {
  SimConfig cfg = base_config();
  cfg.clients = 20;
  cfg.fraction = 0.5;
  cfg.group_size = 5;
  cfg.workload.distribution = Distribution::wide;  // forces clipping

  SUBCASE("quant16") { cfg.mode = Mode::quant16; }
  SUBCASE("quant8") { cfg.mode = Mode::quant8; }

  SimResult res = run_sim(cfg);
  QuantConfig qc{cfg.mode == Mode::quant16 ? 16u : 8u, cfg.clip_bound, cfg.group_size};
  CHECK(res.worst_error <= qc.step() / 2 + 1e-12);
}

TEST_CASE("attested and semi-honest paths agree bitwise") {
  SimConfig cfg = base_config();
  SimResult plain = run_sim(cfg);
  cfg.attested = true;
  SimResult attested = run_sim(cfg);
  CHECK(plain.model == attested.model);
  CHECK(metrics_csv(plain.metrics) == metrics_csv(attested.metrics));
}

TEST_CASE("attested run emits a verifiable transcript") {
  SimConfig cfg = base_config();
  cfg.attested = true;
  SimResult res = run_sim(cfg);

  auto registry = parse_signer_registry(res.signer_registry);
  REQUIRE(registry.count(0) == 1);
  SigPublicKey agg_vk = registry.at(0);
  registry.erase(0);
  VerifyResult v = verify_transcript(res.transcript, agg_vk, registry);
  CHECK(v.ok);
  CHECK(v.reason.empty());

  SUBCASE("flipping one bit breaks it") {
    std::string bad = res.transcript;
    bad[bad.size() / 2] ^= 0x01;
    CHECK(!verify_transcript(bad, agg_vk, registry).ok);
  }
}

TEST_CASE("dropout sweep completes and recovers") {
  SimConfig cfg = base_config();
  cfg.rounds = 2;
  for (double rate : {0.0, 0.1, 0.3, 0.5}) {
    cfg.dropout_rate = rate;
    SimResult res = run_sim(cfg);
    CHECK(res.worst_error <= 1.0 / static_cast<double>(cfg.scale) + 1e-12);
    if (rate == 0.0) {
      CHECK(res.metrics[1].hash_count == 0);  // nobody dropped, nothing to recover
      CHECK(res.metrics[1].bytes_sent == 0);
    }
  }
}

TEST_CASE("trainer workload learns something") {
  SimConfig cfg = base_config();
  cfg.workload.kind = WorkloadKind::trainer;
  cfg.workload.dimension = 5;
  cfg.rounds = 2;
  SimResult res = run_sim(cfg);
  bool moved = false;
  for (double w : res.model) moved |= (w != 0.0);
  CHECK(moved);
  SimResult again = run_sim(cfg);
  CHECK(res.model == again.model);
}

TEST_CASE("run_sim validates the struct it is handed") {
  SimConfig cfg = base_config();
  cfg.clip_bound = 0.0;
  CHECK_THROWS_AS(run_sim(cfg), ConfigError);
  cfg = base_config();
  cfg.fraction = 1.5;
  CHECK_THROWS_AS(run_sim(cfg), ConfigError);
}

TEST_CASE("bench counters match the cost model") {
  SUBCASE("single group") {
    BenchCounts c = bench_counts(10, 2, 100, 0, 7);
    CHECK(c.mask_hashes_per_client == 100 * 9);
    CHECK(c.recovery_hashes_per_online == 100 * 2);
    CHECK(c.server_adds == 100 * 8);
  }
  SUBCASE("grouped") {
    BenchCounts c = bench_counts(12, 1, 25, 4, 7);
    CHECK(c.mask_hashes_per_client == 25 * 3);
    CHECK(c.recovery_hashes_per_online == 25 * 1);
    CHECK(c.server_adds == 25 * 11);
  }
  SUBCASE("no dropouts") {
    BenchCounts c = bench_counts(6, 0, 10, 0, 7);
    CHECK(c.mask_hashes_per_client == 10 * 5);
    CHECK(c.recovery_hashes_per_online == 0);
    CHECK(c.server_adds == 10 * 6);
  }
  CHECK_THROWS_AS(bench_counts(4, 4, 10, 0, 7), ParamError);
}

TEST_CASE("payload widths") {
  BenchBytes b = bench_bytes(21840);
  CHECK(b.scaling_bytes == 87360);
  CHECK(b.quant16_bytes == 43680);
  CHECK(b.quant8_bytes == 21840);
}
