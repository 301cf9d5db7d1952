#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "secagg/bytes.hpp"
#include "secagg/config.hpp"
#include "secagg/errors.hpp"
#include "secagg/group.hpp"
#include "secagg/hash.hpp"
#include "secagg/quantizer.hpp"
#include "secagg/signing.hpp"
#include "secagg/sim.hpp"
#include "secagg/transcript.hpp"

namespace py = pybind11;
using namespace secagg;

namespace {

Bytes be64_bytes(uint64_t v) {
  Bytes out;
  append_u64_be(out, v);
  return out;
}

py::dict sim_to_dict(const SimConfig& cfg, const SimResult& res) {
  py::dict out;
  out["model"] = res.model;
  out["metrics_csv"] = metrics_csv(res.metrics);
  out["worst_abs_error"] = res.worst_error;
  py::list rows;
  for (const MetricsRow& r : res.metrics) {
    py::dict row;
    row["round"] = r.round;
    row["phase"] = r.phase;
    row["hash_count"] = r.hash_count;
    row["bytes_sent"] = r.bytes_sent;
    row["elapsed_ns"] = r.elapsed_ns;
    if (r.max_abs_error >= 0.0) {
      row["max_abs_error"] = r.max_abs_error;
    } else {
      row["max_abs_error"] = py::none();
    }
    rows.append(row);
  }
  out["metrics"] = rows;
  if (cfg.attested) {
    out["transcript"] = res.transcript;
    out["signer_registry"] = res.signer_registry;
  }
  return out;
}

py::dict py_run_sim(const std::string& config_json) {
  SimConfig cfg = parse_config(config_json);
  return sim_to_dict(cfg, run_sim(cfg));
}

py::dict py_verify(const std::string& transcript, const std::string& vk_hex,
                   const std::string& registry_text) {
  Bytes raw = from_hex(vk_hex);
  if (raw.size() != 32) throw ConfigError("verify key must be 32 bytes of hex");
  SigPublicKey vk{};
  std::copy(raw.begin(), raw.end(), vk.begin());
  auto registry = parse_signer_registry(registry_text);
  registry.erase(0);
  VerifyResult res = verify_transcript(transcript, vk, registry);
  py::dict out;
  out["ok"] = res.ok;
  out["first_bad_record"] = res.ok ? py::object(py::none()) : py::int_(res.first_bad_record);
  out["reason"] = res.reason;
  return out;
}

py::dict py_bench_counts(size_t clients, size_t dropped, size_t dimension, uint32_t group_size,
                         uint64_t seed) {
  BenchCounts c = bench_counts(clients, dropped, dimension, group_size, seed);
  py::dict out;
  out["clients"] = c.clients;
  out["dropped"] = c.dropped;
  out["dimension"] = c.dimension;
  out["group_size"] = c.group_size;
  out["mask_hashes_per_client"] = c.mask_hashes_per_client;
  out["recovery_hashes_per_online"] = c.recovery_hashes_per_online;
  out["server_adds"] = c.server_adds;
  return out;
}

py::dict py_bench_bytes(size_t dimension) {
  BenchBytes b = bench_bytes(dimension);
  py::dict out;
  out["dimension"] = b.dimension;
  out["scaling_bytes"] = b.scaling_bytes;
  out["quant16_bytes"] = b.quant16_bytes;
  out["quant8_bytes"] = b.quant8_bytes;
  return out;
}

int64_t py_quantize(double v, uint32_t bit_width, double clip_bound, uint32_t summands) {
  return quantize(QuantConfig{bit_width, clip_bound, summands}, v);
}

double py_dequantize(int64_t u, uint32_t bit_width, double clip_bound, uint32_t summands) {
  return dequantize(QuantConfig{bit_width, clip_bound, summands}, u);
}

py::dict py_keygen(const std::string& config_json) {
  SimConfig cfg = parse_config(config_json);
  const GroupParams& params = GroupParams::test_grade();
  std::map<uint64_t, mpz_class> dh;
  std::map<uint64_t, SigPublicKey> signers;
  for (uint64_t id = 1; id <= cfg.clients; ++id) {
    dh[id] = gen_keypair(params, id, be64_bytes(sub_seed(cfg.seed, "client-key", id))).pk;
    signers[id] = gen_signing_keypair(id, be64_bytes(sub_seed(cfg.seed, "client-sign", id))).pk;
  }
  SigKeypair agg = gen_signing_keypair(0, be64_bytes(sub_seed(cfg.seed, "tee-sign")));
  signers[0] = agg.pk;
  py::dict out;
  out["dh_registry"] = emit_registry(params, dh);
  out["signing_registry"] = emit_signer_registry(signers);
  out["vk"] = to_hex(Bytes(agg.pk.begin(), agg.pk.end()));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Secure aggregation core: simulator, benchmarks, transcript verification";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<ProtocolError>(m, "ProtocolError", PyExc_RuntimeError);

  m.def("run_sim", &py_run_sim, py::arg("config_json"),
        "Run a simulated deployment from a JSON config string; returns model, "
        "metrics and (for attested runs) the signed transcript.");
  m.def("verify_transcript", &py_verify, py::arg("transcript"), py::arg("vk_hex"),
        py::arg("registry"),
        "Check a signed transcript against the aggregator key and client registry.");
  m.def("bench_counts", &py_bench_counts, py::arg("clients"), py::arg("dropped"),
        py::arg("dimension"), py::arg("group_size") = 0, py::arg("seed") = 1,
        "Measured per-client and server operation counts for one round.");
  m.def("bench_bytes", &py_bench_bytes, py::arg("dimension"),
        "Masked-update payload sizes at 32/16/8-bit widths.");
  m.def("quantize", &py_quantize, py::arg("v"), py::arg("bit_width") = 8,
        py::arg("clip_bound") = 0.5, py::arg("summands") = 1);
  m.def("dequantize", &py_dequantize, py::arg("u"), py::arg("bit_width") = 8,
        py::arg("clip_bound") = 0.5, py::arg("summands") = 1);
  m.def("keygen", &py_keygen, py::arg("config_json"),
        "Deterministic key registries for a config: dh_registry, signing_registry, vk.");
  m.def("emit_config", [](const std::string& config_json) {
    return emit_config(parse_config(config_json));
  }, py::arg("config_json"), "Validate a config and return its canonical form.");
}
