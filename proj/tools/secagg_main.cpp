#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "secagg/bytes.hpp"
#include "secagg/config.hpp"
#include "secagg/enclave.hpp"
#include "secagg/errors.hpp"
#include "secagg/group.hpp"
#include "secagg/hash.hpp"
#include "secagg/protocol.hpp"
#include "secagg/signing.hpp"
#include "secagg/sim.hpp"
#include "secagg/transcript.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitError = 2;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw secagg::ConfigError("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return text;
}

void spill(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw secagg::ConfigError("cannot open " + path + " for writing");
  out << text;
  if (!out) throw secagg::ConfigError("write to " + path + " failed");
}

struct SimArgs {
  std::string config;
  std::string out_metrics;
  std::string out_transcript;
  std::string mode;
  double dropout_rate = -1.0;
  bool attested = false;
};

int run_sim_cmd(const SimArgs& args) {
  secagg::SimConfig cfg = secagg::load_config(args.config);
  if (!args.mode.empty()) cfg.mode = secagg::mode_from_name(args.mode);
  if (args.dropout_rate >= 0.0) cfg.dropout_rate = args.dropout_rate;
  if (args.attested) cfg.attested = true;
  if (!args.out_transcript.empty() && !cfg.attested) {
    throw secagg::ConfigError("--out-transcript requires an attested run");
  }

  secagg::SimResult res = secagg::run_sim(cfg);

  std::string csv = secagg::metrics_csv(res.metrics);
  if (args.out_metrics.empty()) {
    std::cout << csv;
  } else {
    spill(args.out_metrics, csv);
  }
  if (!args.out_transcript.empty()) {
    spill(args.out_transcript, res.transcript);
  }
  std::cerr << "rounds=" << cfg.rounds << " clients=" << cfg.clients
            << " mode=" << secagg::mode_name(cfg.mode);
  if (cfg.oracle) std::cerr << " worst_abs_error=" << res.worst_error;
  std::cerr << '\n';
  return kExitOk;
}

struct BenchArgs {
  size_t clients = 10;
  size_t dropped = 2;
  size_t dim = 1000;
  uint32_t group_size = 0;
  uint64_t seed = 1;
};

int run_bench_cmd(const BenchArgs& args) {
  secagg::BenchCounts c =
      secagg::bench_counts(args.clients, args.dropped, args.dim, args.group_size, args.seed);
  std::cout << "metric,value\n"
            << "clients," << c.clients << '\n'
            << "dropped," << c.dropped << '\n'
            << "dimension," << c.dimension << '\n'
            << "group_size," << c.group_size << '\n'
            << "mask_hashes_per_client," << c.mask_hashes_per_client << '\n'
            << "recovery_hashes_per_online," << c.recovery_hashes_per_online << '\n'
            << "server_adds," << c.server_adds << '\n';
  secagg::BenchBytes b = secagg::bench_bytes(args.dim);
  std::cout << "payload_bytes_32bit," << b.scaling_bytes << '\n'
            << "payload_bytes_16bit," << b.quant16_bytes << '\n'
            << "payload_bytes_8bit," << b.quant8_bytes << '\n';
  return kExitOk;
}

struct VerifyArgs {
  std::string transcript;
  std::string vk;
  std::string registry;
};

secagg::SigPublicKey parse_vk_file(const std::string& text) {
  std::string hex;
  for (char c : text) {
    if (c == '\n' || c == '\r' || c == ' ') continue;
    hex += c;
  }
  secagg::Bytes raw = secagg::from_hex(hex);
  if (raw.size() != 32) throw secagg::ConfigError("verify key must be 32 bytes of hex");
  secagg::SigPublicKey vk{};
  std::copy(raw.begin(), raw.end(), vk.begin());
  return vk;
}

int run_verify_cmd(const VerifyArgs& args) {
  secagg::SigPublicKey vk = parse_vk_file(slurp(args.vk));
  auto registry = secagg::parse_signer_registry(slurp(args.registry));
  registry.erase(0);
  secagg::VerifyResult res = secagg::verify_transcript(slurp(args.transcript), vk, registry);
  if (res.ok) {
    std::cout << "ok\n";
    return kExitOk;
  }
  std::cout << "reject record " << res.first_bad_record << ": " << res.reason << '\n';
  return kExitVerifyFailed;
}

struct KeygenArgs {
  std::string config;
  std::string out_dir = ".";
};

secagg::Bytes be64_bytes(uint64_t v) {
  secagg::Bytes out;
  secagg::append_u64_be(out, v);
  return out;
}

int run_keygen_cmd(const KeygenArgs& args) {
  secagg::SimConfig cfg = secagg::load_config(args.config);
  std::filesystem::create_directories(args.out_dir);

  const secagg::GroupParams& params = secagg::GroupParams::test_grade();
  std::map<uint64_t, mpz_class> dh;
  std::map<uint64_t, secagg::SigPublicKey> signers;
  for (uint64_t id = 1; id <= cfg.clients; ++id) {
    dh[id] = secagg::gen_keypair(params, id,
                                 be64_bytes(secagg::sub_seed(cfg.seed, "client-key", id)))
                 .pk;
    signers[id] = secagg::gen_signing_keypair(
                      id, be64_bytes(secagg::sub_seed(cfg.seed, "client-sign", id)))
                      .pk;
  }
  secagg::SigKeypair agg =
      secagg::gen_signing_keypair(0, be64_bytes(secagg::sub_seed(cfg.seed, "tee-sign")));
  signers[0] = agg.pk;

  auto path = [&](const char* name) {
    return (std::filesystem::path(args.out_dir) / name).string();
  };
  spill(path("dh_registry.txt"), secagg::emit_registry(params, dh));
  spill(path("signing_registry.txt"), secagg::emit_signer_registry(signers));
  spill(path("vk.txt"),
        secagg::to_hex(secagg::Bytes(agg.pk.begin(), agg.pk.end())) + "\n");
  std::cerr << "wrote dh_registry.txt, signing_registry.txt, vk.txt to " << args.out_dir << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure aggregation simulator and transcript tools"};
  app.require_subcommand(1);

  SimArgs sim_args;
  CLI::App* sim = app.add_subcommand("sim", "Run a simulated deployment from a config file");
  sim->add_option("--config", sim_args.config, "JSON config path")
      ->required()
      ->envname("SECAGG_CONFIG");
  sim->add_option("--out-metrics", sim_args.out_metrics,
                  "Metrics CSV destination (default stdout)")
      ->envname("SECAGG_OUT_METRICS");
  sim->add_option("--out-transcript", sim_args.out_transcript,
                  "Signed transcript destination (attested runs only)")
      ->envname("SECAGG_OUT_TRANSCRIPT");
  sim->add_option("--mode", sim_args.mode, "Override update encoding")
      ->check(CLI::IsMember({"scaling", "quant8", "quant16"}))
      ->envname("SECAGG_MODE");
  sim->add_option("--dropout-rate", sim_args.dropout_rate, "Override per-round dropout rate")
      ->check(CLI::Range(0.0, 1.0))
      ->envname("SECAGG_DROPOUT_RATE");
  sim->add_flag("--attested", sim_args.attested, "Route rounds through the attested aggregator")
      ->envname("SECAGG_ATTESTED");

  BenchArgs bench_args;
  CLI::App* bench = app.add_subcommand("bench", "Print operation-count and payload-size tables");
  bench->add_option("--clients", bench_args.clients, "Cohort size")->check(CLI::Range(2, 100000));
  bench->add_option("--dropped", bench_args.dropped, "Dropouts taken from the first group");
  bench->add_option("--dim", bench_args.dim, "Update dimension")
      ->check(CLI::Range(1, 100000000));
  bench->add_option("--group-size", bench_args.group_size, "Aggregation group size (0 = all)");
  bench->add_option("--seed", bench_args.seed, "Key generation seed");

  VerifyArgs verify_args;
  CLI::App* verify = app.add_subcommand("verify", "Check a signed transcript");
  verify->add_option("--transcript", verify_args.transcript, "Transcript file")->required();
  verify->add_option("--vk", verify_args.vk, "Aggregator verify key (hex)")->required();
  verify->add_option("--registry", verify_args.registry, "Client signing registry")->required();

  KeygenArgs keygen_args;
  CLI::App* keygen = app.add_subcommand("keygen", "Write the registries a config implies");
  keygen->add_option("--config", keygen_args.config, "JSON config path")
      ->required()
      ->envname("SECAGG_CONFIG");
  keygen->add_option("--out-dir", keygen_args.out_dir, "Output directory (default .)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (sim->parsed()) return run_sim_cmd(sim_args);
    if (bench->parsed()) return run_bench_cmd(bench_args);
    if (verify->parsed()) return run_verify_cmd(verify_args);
    return run_keygen_cmd(keygen_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
}
