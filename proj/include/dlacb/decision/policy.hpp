#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dlacb/decision/model.hpp"
#include "dlacb/decision/training.hpp"

namespace dlacb::decision {

// One literal over a user bit combined with one literal over a resource bit.
struct PolicyTerm {
  unsigned user_bit = 0;
  bool user_negated = false;
  unsigned resource_bit = 0;
  bool resource_negated = false;
  bool conjunction = true;  // AND when true, OR otherwise
};

// Ground-truth access function used to generate training data and as the
// oracle the trained model is checked against.
class SyntheticPolicy {
 public:
  // Bit positions are drawn from the low `active_*_bits` of each identifier so
  // every literal takes both values over small populations.
  explicit SyntheticPolicy(std::uint64_t seed, unsigned active_user_bits = 6,
                           unsigned active_resource_bits = 5);

  bool grant(std::uint64_t user_index, std::uint64_t resource_id, Operation op) const;
  AccessList grants(std::uint64_t user_index, std::uint64_t resource_id) const;

  std::uint64_t seed() const { return seed_; }
  const std::array<PolicyTerm, kOperationCount>& terms() const { return terms_; }

 private:
  std::uint64_t seed_;
  std::array<PolicyTerm, kOperationCount> terms_{};
};

struct LabeledRow {
  std::uint32_t user = 0;
  std::uint32_t resource = 0;
  AccessList labels{};
  bool operator==(const LabeledRow&) const = default;
};

// One row per (user, resource) pair in user-major order. Throws EncodingError
// if the populations do not fit the input widths.
std::vector<LabeledRow> generate_dataset(const SyntheticPolicy& policy, std::uint32_t n_users,
                                         std::uint32_t n_resources,
                                         unsigned user_bits = kDefaultUserBits,
                                         unsigned resource_bits = kDefaultResourceBits);

struct DatasetSplit {
  std::vector<LabeledRow> train;
  std::vector<LabeledRow> heldout;
};

DatasetSplit split_dataset(std::vector<LabeledRow> rows, double heldout_fraction,
                           std::uint64_t seed);

std::vector<Sample> to_samples(const std::vector<LabeledRow>& rows,
                               unsigned user_bits = kDefaultUserBits,
                               unsigned resource_bits = kDefaultResourceBits);

}  // namespace dlacb::decision
