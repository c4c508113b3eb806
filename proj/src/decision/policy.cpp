#include "dlacb/decision/policy.hpp"

#include "dlacb/decision/rng.hpp"
#include "dlacb/util/error.hpp"

namespace dlacb::decision {

SyntheticPolicy::SyntheticPolicy(std::uint64_t seed, unsigned active_user_bits,
                                 unsigned active_resource_bits)
    : seed_(seed) {
  if (active_user_bits == 0 || active_resource_bits == 0) {
    throw ArgumentError("policy needs at least one active bit per identifier");
  }
  SplitMix64 rng(seed);
  for (auto& t : terms_) {
    t.user_bit = static_cast<unsigned>(rng.below(active_user_bits));
    t.user_negated = rng.below(2) == 1;
    t.resource_bit = static_cast<unsigned>(rng.below(active_resource_bits));
    t.resource_negated = rng.below(2) == 1;
    t.conjunction = rng.below(2) == 1;
  }
}

bool SyntheticPolicy::grant(std::uint64_t user_index, std::uint64_t resource_id,
                            Operation op) const {
  const auto& t = terms_[index_of(op)];
  const bool u = (((user_index >> t.user_bit) & 1u) != 0) != t.user_negated;
  const bool r = (((resource_id >> t.resource_bit) & 1u) != 0) != t.resource_negated;
  return t.conjunction ? (u && r) : (u || r);
}

AccessList SyntheticPolicy::grants(std::uint64_t user_index, std::uint64_t resource_id) const {
  AccessList out{};
  for (std::size_t i = 0; i < kOperationCount; ++i) {
    out[i] = grant(user_index, resource_id, static_cast<Operation>(i));
  }
  return out;
}

std::vector<LabeledRow> generate_dataset(const SyntheticPolicy& policy, std::uint32_t n_users,
                                         std::uint32_t n_resources, unsigned user_bits,
                                         unsigned resource_bits) {
  if (n_users > 0 && user_bits < 64 && (std::uint64_t{n_users - 1} >> user_bits) != 0) {
    throw EncodingError("user population exceeds input width");
  }
  if (n_resources > 0 && resource_bits < 64 &&
      (std::uint64_t{n_resources - 1} >> resource_bits) != 0) {
    throw EncodingError("resource population exceeds input width");
  }
  std::vector<LabeledRow> rows;
  rows.reserve(std::size_t{n_users} * n_resources);
  for (std::uint32_t u = 0; u < n_users; ++u) {
    for (std::uint32_t r = 0; r < n_resources; ++r) {
      rows.push_back({u, r, policy.grants(u, r)});
    }
  }
  return rows;
}

DatasetSplit split_dataset(std::vector<LabeledRow> rows, double heldout_fraction,
                           std::uint64_t seed) {
  if (heldout_fraction < 0.0 || heldout_fraction > 1.0) {
    throw ArgumentError("heldout fraction must lie in [0,1]");
  }
  SplitMix64 rng(seed);
  for (std::size_t i = rows.size(); i > 1; --i) std::swap(rows[i - 1], rows[rng.below(i)]);
  const auto n_held = static_cast<std::size_t>(static_cast<double>(rows.size()) * heldout_fraction);
  DatasetSplit s;
  s.heldout.assign(rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_held));
  s.train.assign(rows.begin() + static_cast<std::ptrdiff_t>(n_held), rows.end());
  return s;
}

std::vector<Sample> to_samples(const std::vector<LabeledRow>& rows, unsigned user_bits,
                               unsigned resource_bits) {
  std::vector<Sample> out;
  out.reserve(rows.size());
  for (const auto& row : rows) {
    Sample s;
    s.input = encode_input(row.user, row.resource, user_bits, resource_bits);
    for (std::size_t i = 0; i < kOperationCount; ++i) s.labels[i] = row.labels[i] ? 1.0 : 0.0;
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace dlacb::decision
