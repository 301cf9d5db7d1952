#include "secagg/config.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include "secagg/errors.hpp"

namespace secagg {

using nlohmann::json;

const char* workload_kind_name(WorkloadKind kind) {
  switch (kind) {
    case WorkloadKind::synthetic: return "synthetic";
    case WorkloadKind::trainer: return "trainer";
  }
  throw ParamError("unknown workload kind");
}

WorkloadKind workload_kind_from_name(const std::string& name) {
  if (name == "synthetic") return WorkloadKind::synthetic;
  if (name == "trainer") return WorkloadKind::trainer;
  throw ConfigError("unknown workload kind: " + name);
}

const char* distribution_name(Distribution dist) {
  switch (dist) {
    case Distribution::uniform: return "uniform";
    case Distribution::wide: return "wide";
    case Distribution::gaussian: return "gaussian";
  }
  throw ParamError("unknown distribution");
}

Distribution distribution_from_name(const std::string& name) {
  if (name == "uniform") return Distribution::uniform;
  if (name == "wide") return Distribution::wide;
  if (name == "gaussian") return Distribution::gaussian;
  throw ConfigError("unknown distribution: " + name);
}

namespace {

json parse_strict_json(const std::string& text) {
  std::vector<std::set<std::string>> objects;
  json::parser_callback_t cb = [&](int, json::parse_event_t event, json& parsed) {
    if (event == json::parse_event_t::object_start) {
      objects.emplace_back();
    } else if (event == json::parse_event_t::object_end) {
      objects.pop_back();
    } else if (event == json::parse_event_t::key) {
      auto key = parsed.get<std::string>();
      if (!objects.back().insert(key).second) throw ConfigError("duplicate key: " + key);
    }
    return true;
  };
  json j = json::parse(text, cb, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw ConfigError("config is not valid json");
  return j;
}

struct Checker {
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& what) {
    errors.push_back(path + ": " + what);
  }

  void unknown_keys(const json& obj, const std::string& where,
                    const std::set<std::string>& allowed) {
    for (const auto& item : obj.items()) {
      if (!allowed.count(item.key())) {
        fail(where.empty() ? item.key() : where + "." + item.key(), "unknown key");
      }
    }
  }

  template <typename T>
  void get_uint(const json& obj, const char* key, const std::string& path, T& out, uint64_t lo,
                uint64_t hi) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number_unsigned()) {
      fail(path, "must be an unsigned integer");
      return;
    }
    uint64_t x = v.get<uint64_t>();
    if (x < lo || x > hi) {
      fail(path, "must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
      return;
    }
    out = static_cast<T>(x);
  }

  /// half_open: valid range is [lo, hi), otherwise (lo, hi].
  void get_fraction(const json& obj, const char* key, const std::string& path, double& out,
                    double lo, double hi, bool half_open) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_number()) {
      fail(path, "must be a number");
      return;
    }
    double x = v.get<double>();
    bool ok = half_open ? (x >= lo && x < hi) : (x > lo && x <= hi);
    if (!std::isfinite(x) || !ok) {
      fail(path, std::string("must be in ") + (half_open ? "[" : "(") + std::to_string(lo) +
                     ", " + std::to_string(hi) + (half_open ? ")" : "]"));
      return;
    }
    out = x;
  }

  void get_bool(const json& obj, const char* key, const std::string& path, bool& out) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_boolean()) {
      fail(path, "must be true or false");
      return;
    }
    out = v.get<bool>();
  }

  template <typename Parse, typename T>
  void get_name(const json& obj, const char* key, const std::string& path, T& out, Parse parse) {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    if (!v.is_string()) {
      fail(path, "must be a string");
      return;
    }
    try {
      out = parse(v.get<std::string>());
    } catch (const ConfigError& e) {
      fail(path, e.what());
    }
  }
};

}  // namespace

SimConfig parse_config(const std::string& text) {
  json j = parse_strict_json(text);
  if (!j.is_object()) throw ConfigError("config must be a json object");

  SimConfig cfg;
  Checker c;
  c.unknown_keys(j, "", {"seed", "clients", "fraction", "group_size", "min_group_size", "rounds",
                         "mode", "dropout_rate", "attested", "oracle", "record_timing",
                         "quantizer", "scaling", "workload"});

  if (!j.contains("seed")) {
    c.fail("seed", "required; runs must be reproducible");
  } else {
    c.get_uint(j, "seed", "seed", cfg.seed, 0, UINT64_MAX);
  }
  c.get_uint(j, "clients", "clients", cfg.clients, 1, 1000000);
  c.get_fraction(j, "fraction", "fraction", cfg.fraction, 0.0, 1.0, false);
  c.get_uint(j, "group_size", "group_size", cfg.group_size, 0, UINT32_MAX);
  c.get_uint(j, "min_group_size", "min_group_size", cfg.min_group_size, 1, UINT32_MAX);
  c.get_uint(j, "rounds", "rounds", cfg.rounds, 1, 1000000);
  c.get_name(j, "mode", "mode", cfg.mode, mode_from_name);
  c.get_fraction(j, "dropout_rate", "dropout_rate", cfg.dropout_rate, 0.0, 1.0, true);
  c.get_bool(j, "attested", "attested", cfg.attested);
  c.get_bool(j, "oracle", "oracle", cfg.oracle);
  c.get_bool(j, "record_timing", "record_timing", cfg.record_timing);

  if (j.contains("quantizer")) {
    const json& q = j.at("quantizer");
    if (!q.is_object()) {
      c.fail("quantizer", "must be an object");
    } else {
      c.unknown_keys(q, "quantizer", {"clip_bound"});
      c.get_fraction(q, "clip_bound", "quantizer.clip_bound", cfg.clip_bound, 0.0, 1e6, false);
    }
  }
  if (j.contains("scaling")) {
    const json& s = j.at("scaling");
    if (!s.is_object()) {
      c.fail("scaling", "must be an object");
    } else {
      c.unknown_keys(s, "scaling", {"factor"});
      c.get_uint(s, "factor", "scaling.factor", cfg.scale, 1, 1000000000000ULL);
    }
  }
  if (j.contains("workload")) {
    const json& w = j.at("workload");
    if (!w.is_object()) {
      c.fail("workload", "must be an object");
    } else {
      c.unknown_keys(w, "workload", {"kind", "dimension", "distribution"});
      c.get_name(w, "kind", "workload.kind", cfg.workload.kind, workload_kind_from_name);
      c.get_uint(w, "dimension", "workload.dimension", cfg.workload.dimension, 1, 100000000);
      c.get_name(w, "distribution", "workload.distribution", cfg.workload.distribution,
                 distribution_from_name);
    }
  }

  if (cfg.group_size != 0 && cfg.group_size < cfg.min_group_size) {
    c.fail("group_size", "must be 0 or at least min_group_size");
  }
  if (cfg.workload.kind == WorkloadKind::trainer && cfg.workload.dimension < 2) {
    c.fail("workload.dimension", "trainer needs at least 2 (weights plus bias)");
  }

  if (!c.errors.empty()) {
    std::string joined;
    for (size_t i = 0; i < c.errors.size(); ++i) {
      if (i) joined += "; ";
      joined += c.errors[i];
    }
    throw ConfigError(joined);
  }
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string emit_config(const SimConfig& cfg) {
  json j;
  j["seed"] = cfg.seed;
  j["clients"] = cfg.clients;
  j["fraction"] = cfg.fraction;
  j["group_size"] = cfg.group_size;
  j["min_group_size"] = cfg.min_group_size;
  j["rounds"] = cfg.rounds;
  j["mode"] = mode_name(cfg.mode);
  j["dropout_rate"] = cfg.dropout_rate;
  j["attested"] = cfg.attested;
  j["oracle"] = cfg.oracle;
  j["record_timing"] = cfg.record_timing;
  j["quantizer"]["clip_bound"] = cfg.clip_bound;
  j["scaling"]["factor"] = cfg.scale;
  j["workload"]["kind"] = workload_kind_name(cfg.workload.kind);
  j["workload"]["dimension"] = cfg.workload.dimension;
  j["workload"]["distribution"] = distribution_name(cfg.workload.distribution);
  return j.dump(2) + "\n";
}

ProtocolConfig protocol_config(const SimConfig& cfg) {
  ProtocolConfig pc;
  pc.mode = cfg.mode;
  pc.clip_bound = cfg.clip_bound;
  pc.scale = static_cast<int64_t>(cfg.scale);
  pc.group_size = cfg.group_size;
  return pc;
}

}  // namespace secagg
