#include <doctest.h>

#include <string>

#include "secagg/config.hpp"
#include "secagg/errors.hpp"

using namespace secagg;

TEST_CASE("minimal config takes documented defaults") {
  SimConfig cfg = parse_config(R"({"seed": 7})");
  CHECK(cfg.seed == 7);
  CHECK(cfg.clients == 10);
  CHECK(cfg.fraction == 1.0);
  CHECK(cfg.group_size == 0);
  CHECK(cfg.min_group_size == 2);
  CHECK(cfg.rounds == 1);
  CHECK(cfg.mode == Mode::scaling);
  CHECK(cfg.dropout_rate == 0.0);
  CHECK(!cfg.attested);
  CHECK(cfg.oracle);
  CHECK(!cfg.record_timing);
  CHECK(cfg.clip_bound == 0.5);
  CHECK(cfg.scale == 10000000);
  CHECK(cfg.workload.kind == WorkloadKind::synthetic);
  CHECK(cfg.workload.dimension == 16);
  CHECK(cfg.workload.distribution == Distribution::uniform);
}

TEST_CASE("seed is mandatory") {
  CHECK_THROWS_WITH_AS(parse_config("{}"), doctest::Contains("seed"), ConfigError);
}

TEST_CASE("full config round-trips through emit and parse") {
  SimConfig cfg;
  cfg.seed = 99;
  cfg.clients = 40;
  cfg.fraction = 0.5;
  cfg.group_size = 5;
  cfg.min_group_size = 3;
  cfg.rounds = 12;
  cfg.mode = Mode::quant16;
  cfg.dropout_rate = 0.25;
  cfg.attested = true;
  cfg.oracle = false;
  cfg.record_timing = true;
  cfg.clip_bound = 0.75;
  cfg.scale = 1000;
  cfg.workload.kind = WorkloadKind::trainer;
  cfg.workload.dimension = 9;
  cfg.workload.distribution = Distribution::gaussian;

  CHECK(parse_config(emit_config(cfg)) == cfg);
}

TEST_CASE("invalid fields rejected") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"seed": 1, "dropout_rate": 1.0})"),
                       doctest::Contains("dropout_rate"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"seed": 1, "fraction": 0})"),
                       doctest::Contains("fraction"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"seed": 1, "quantizer": {"clip_bound": 0}})"),
                       doctest::Contains("clip_bound"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"seed": 1, "mode": "quant12"})"),
                       doctest::Contains("mode"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"seed": 1, "clients": 0})"),
                       doctest::Contains("clients"), ConfigError);
}

TEST_CASE("unknown and duplicate keys rejected") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"seed": 1, "cliens": 4})"),
                       doctest::Contains("unknown key"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"seed": 1, "workload": {"dim": 4}})"),
                       doctest::Contains("unknown key"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config(R"({"seed": 1, "seed": 2})"),
                       doctest::Contains("duplicate key"), ConfigError);
}

TEST_CASE("every out-of-range field is listed, not just the first") {
  try {
    parse_config(R"({"seed": 1, "fraction": 2.0, "dropout_rate": -0.5, "rounds": 0})");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    std::string what = e.what();
    CHECK(what.find("fraction") != std::string::npos);
    CHECK(what.find("dropout_rate") != std::string::npos);
    CHECK(what.find("rounds") != std::string::npos);
  }
}

TEST_CASE("group_size must respect the configured minimum") {
  CHECK_THROWS_WITH_AS(parse_config(R"({"seed": 1, "group_size": 2, "min_group_size": 3})"),
                       doctest::Contains("min_group_size"), ConfigError);
  CHECK_NOTHROW(parse_config(R"({"seed": 1, "group_size": 0, "min_group_size": 3})"));
  CHECK_NOTHROW(parse_config(R"({"seed": 1, "group_size": 3, "min_group_size": 3})"));
}

TEST_CASE("protocol_config carries the aggregation fields") {
  SimConfig cfg = parse_config(
      R"({"seed": 3, "mode": "quant8", "group_size": 4,
          "quantizer": {"clip_bound": 0.25}, "scaling": {"factor": 500}})");
  ProtocolConfig pc = protocol_config(cfg);
  CHECK(pc.mode == Mode::quant8);
  CHECK(pc.group_size == 4);
  CHECK(pc.clip_bound == 0.25);
  CHECK(pc.scale == 500);
}
