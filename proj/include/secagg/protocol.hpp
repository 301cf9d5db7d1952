#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "secagg/group.hpp"
#include "secagg/masking.hpp"
#include "secagg/quantizer.hpp"

namespace secagg {

/// How real-valued updates are carried in Z_M. scaling sends the whole local
/// model as floor(w * L) in Z_2^32; quant8/quant16 send the clipped model
/// delta through the symmetric quantizer in Z_2^r.
enum class Mode { scaling, quant8, quant16 };

uint8_t mode_bits(Mode mode);
const char* mode_name(Mode mode);
Mode mode_from_name(const std::string& name);

struct ProtocolConfig {
  Mode mode = Mode::scaling;
  double clip_bound = 0.5;   // B, quantized modes
  int64_t scale = 10000000;  // L, scaling mode
  uint32_t group_size = 2;
};

/// One round's announcement: which clients participate, how they are grouped,
/// and the model they start from.
struct RoundPlan {
  uint64_t round = 0;
  std::vector<uint64_t> selected;
  std::vector<std::vector<uint64_t>> groups;
  std::vector<double> model;
};

/// ceil(fraction * |ids|) clients drawn by a seeded shuffle, returned sorted.
std::vector<uint64_t> select_clients(const std::vector<uint64_t>& ids, double fraction,
                                     uint64_t seed);

/// Contiguous runs of the sorted selected ids; the last group may be smaller.
std::vector<std::vector<uint64_t>> build_groups(const std::vector<uint64_t>& selected,
                                                uint32_t group_size);

/// group_size 0 puts every selected client into a single group.
RoundPlan make_round_plan(const std::vector<uint64_t>& ids, double fraction, uint32_t group_size,
                          uint64_t round, uint64_t seed, std::vector<double> model);

const std::vector<uint64_t>& group_of(const RoundPlan& plan, uint64_t client_id);

/// Encodes the client's local model per the mode and masks it within the
/// client's group. local_model must match the plan's model length.
MaskedUpdate client_update(const KeyMaterial& keys, const RoundPlan& plan,
                           const std::vector<double>& local_model, const ProtocolConfig& cfg);

/// Recovery submission for dropped peers in the client's own group.
RecoveryVector client_recovery(const KeyMaterial& keys, const RoundPlan& plan,
                               const std::vector<uint64_t>& dropped_in_group,
                               const ProtocolConfig& cfg);

struct RoundOutcome {
  uint64_t round = 0;
  std::vector<uint64_t> responders;
  std::vector<uint64_t> dropped;
  std::vector<size_t> skipped_groups;
  /// Recovered real-valued sum of responding clients' encoded updates.
  std::vector<double> update_sum;
  /// New global model; averaging divides by the responder count.
  std::vector<double> model;
};

/// Aggregates one round: per-group masked sums, mask recovery for dropouts,
/// then the mode's decode and the average over responders. Every responder in
/// a group with dropouts must supply a recovery vector for exactly that
/// group's dropped set.
RoundOutcome server_round(const RoundPlan& plan, const std::vector<MaskedUpdate>& updates,
                          const std::vector<RecoveryVector>& recoveries,
                          const ProtocolConfig& cfg);

/// All registered clients with their key material and the server-side
/// public-key registry. Simulation-side container: key material stays with
/// each client, the registry is what the server sees.
struct Cohort {
  const GroupParams* params = &GroupParams::test_grade();
  std::map<uint64_t, KeyMaterial> clients;
  std::map<uint64_t, mpz_class> registry;

  std::vector<uint64_t> ids() const;
};

/// Registers a new client and derives pairwise keys with every existing one.
void join_client(Cohort& cohort, uint64_t id, const Bytes& key_seed);

/// Removes a client and every shared key referencing it. Idempotent.
void leave_client(Cohort& cohort, uint64_t id);

}  // namespace secagg
