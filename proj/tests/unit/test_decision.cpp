#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "dlacb/decision/bits.hpp"
#include "dlacb/decision/engine.hpp"
#include "dlacb/decision/model.hpp"
#include "dlacb/decision/model_io.hpp"
#include "dlacb/decision/policy.hpp"
#include "dlacb/decision/rng.hpp"
#include "dlacb/decision/rules.hpp"
#include "dlacb/decision/training.hpp"
#include "dlacb/util/error.hpp"
#include "nn_oracle.hpp"

using namespace dlacb;
using namespace dlacb::decision;

namespace {

std::vector<Sample> random_batch(SplitMix64& rng, std::size_t n, std::size_t width) {
  std::vector<Sample> out(n);
  for (auto& s : out) {
    s.input.resize(width);
    for (auto& x : s.input) x = static_cast<double>(rng.below(2));
    for (auto& y : s.labels) y = static_cast<double>(rng.below(2));
  }
  return out;
}

PriorityRule rule(std::uint32_t prio, std::optional<std::uint32_t> u, std::optional<std::uint32_t> r,
                  std::optional<Operation> op, Effect e) {
  PriorityRule x;
  x.priority = prio;
  x.user = u;
  x.resource = r;
  x.operation = op;
  x.effect = e;
  return x;
}

}  // namespace

TEST_CASE("binary_repr") {
  CHECK(binary_repr(5, 16).to_string() == "0000000000000101");
  CHECK(binary_repr(0, 8).to_string() == "00000000");
  CHECK_THROWS_AS(binary_repr(256, 8), EncodingError);
  CHECK(binary_repr(255, 8).to_uint() == 255);
  SplitMix64 rng(1);
  for (int i = 0; i < 500; ++i) {
    auto v = rng.below(1u << 16);
    auto bits = binary_repr(v, 16);
    std::uint64_t back = 0;
    for (std::size_t k = 0; k < 16; ++k) back = back * 2 + (bits[k] ? 1 : 0);
    CHECK(back == v);
  }
}

TEST_CASE("zero model scores one half") {
  auto m = DecisionModel::zeros(default_dims());
  auto s = forward(m, encode_input(3, 9));
  for (double x : s) CHECK(x == 0.5);
  CHECK(predict_access(m, 3, 9, 0.5) == AccessList{true, true, true, true});
  CHECK(predict_access(m, 3, 9, 0.6) == AccessList{false, false, false, false});
}

TEST_CASE("single layer two input case by hand") {
  DenseLayer l;
  l.inputs = 2;
  l.outputs = 4;
  l.weights = {1, 0, 0, 1, 1, 1, -2, 0.5};
  l.bias = {0, 0, -1, 0.25};
  DecisionModel m({l});
  std::vector<double> x{1.0, 0.0};
  auto s = forward(m, x);
  CHECK(s[0] == doctest::Approx(1 / (1 + std::exp(-1.0))).epsilon(1e-15));
  CHECK(s[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s[2] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s[3] == doctest::Approx(1 / (1 + std::exp(1.75))).epsilon(1e-15));
}

TEST_CASE("forward matches the reference network and stays inside (0,1)") {
  SplitMix64 rng(11);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    auto m = DecisionModel::random(default_dims(), seed);
    for (int i = 0; i < 50; ++i) {
      auto in = encode_input(rng.below(1000), rng.below(1000));
      auto ours = forward(m, in);
      auto ref = oracle::forward(m, in);
      for (std::size_t k = 0; k < 4; ++k) {
        CHECK(ours[k] == doctest::Approx(ref[k]).epsilon(1e-12));
        CHECK(ours[k] > 0.0);
        CHECK(ours[k] < 1.0);
      }
      CHECK(forward(m, in) == ours);
    }
  }
  // Saturating pre-activations still yield strictly interior scores.
  DenseLayer big{1, 4, {1e4, -1e4, 800, -800}, {0, 0, 0, 0}};
  auto s = forward(DecisionModel({big}), std::vector<double>{1.0});
  for (double x : s) {
    CHECK(x > 0.0);
    CHECK(x < 1.0);
  }
}

TEST_CASE("shape errors") {
  auto m = DecisionModel::zeros(default_dims());
  CHECK_THROWS_AS(forward(m, std::vector<double>(31)), ShapeError);
  std::vector<std::size_t> three_out{4, 3};
  CHECK_THROWS_AS(DecisionModel::zeros(three_out), ShapeError);
  DenseLayer a{2, 3, std::vector<double>(6), std::vector<double>(3)};
  DenseLayer b{2, 4, std::vector<double>(8), std::vector<double>(4)};
  CHECK_THROWS_AS(DecisionModel({a, b}), ShapeError);
}

TEST_CASE("loss values") {
  auto zero = DecisionModel::zeros(default_dims());
  SplitMix64 rng(3);
  auto batch = random_batch(rng, 16, 32);
  CHECK(loss_and_gradient(zero, batch).loss == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(loss_and_gradient(zero, std::span<const Sample>{}), ArgumentError);

  // Large biases pushing scores toward the labels drive the loss toward 0.
  DenseLayer l{1, 4, {0, 0, 0, 0}, {40, -40, 40, -40}};
  Sample s{{1.0}, {1, 0, 1, 0}};
  CHECK(loss_and_gradient(DecisionModel({l}), std::span<const Sample>(&s, 1)).loss < 1e-15);
}

TEST_CASE("analytic loss agrees with the reference loss") {
  SplitMix64 rng(4);
  auto m = DecisionModel::random(default_dims(), 9);
  auto batch = random_batch(rng, 20, 32);
  CHECK(loss_and_gradient(m, batch).loss == doctest::Approx(oracle::loss(m, batch)).epsilon(1e-12));
}

TEST_CASE("gradients match central differences") {
  SplitMix64 rng(5);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    std::vector<std::size_t> dims{6 + rng.below(10), 4 + rng.below(28), 4};
    auto m = DecisionModel::random(dims, seed);
    // Nonzero biases keep hidden units away from the rectifier kink.
    for (auto& l : m.layers()) for (auto& b : l.bias) b = rng.uniform() - 0.5;
    auto batch = random_batch(rng, 4, dims[0]);
    auto lg = loss_and_gradient(m, batch);
    auto check = oracle::check_gradient(m, batch, lg.gradient);
    INFO("seed " << seed << " parameters " << check.parameters);
    CHECK(check.max_rel_error < 1e-4);
  }
}

TEST_CASE("training determinism and zero epochs") {
  auto policy = SyntheticPolicy(5);
  auto samples = to_samples(generate_dataset(policy, 8, 8));
  auto m = DecisionModel::random(default_dims(), 2);
  TrainParams p;
  p.epochs = 0;
  CHECK(train(m, samples, p).model == m);
  p.epochs = 3;
  auto a = train(m, samples, p);
  auto b = train(m, samples, p);
  CHECK(a.model == b.model);
  CHECK(a.epochs.size() == 3);
  CHECK_FALSE(a.model == m);
}

TEST_CASE("divergence is reported") {
  auto samples = to_samples(generate_dataset(SyntheticPolicy(5), 8, 8));
  TrainParams p;
  p.epochs = 5;
  p.learning_rate = 1e300;
  CHECK_THROWS_AS(train(DecisionModel::random(default_dims(), 2), samples, p), TrainingDivergedError);
}

TEST_CASE("short training learns a small policy") {
  auto policy = SyntheticPolicy(17, 3, 3);
  auto split = split_dataset(generate_dataset(policy, 16, 16), 0.25, 1);
  auto train_set = to_samples(split.train);
  auto held = to_samples(split.heldout);
  TrainParams p;
  p.epochs = 60;
  auto r = train(DecisionModel::random(default_dims(), 1), train_set, p, held);
  REQUIRE(r.epochs.back().heldout_accuracy.has_value());
  CHECK(accuracy(r.model, held) >= 0.9);
}

TEST_CASE("synthetic dataset") {
  SyntheticPolicy policy(99);
  auto rows = generate_dataset(policy, 100, 50);
  CHECK(rows.size() == 5000);
  CHECK(rows == generate_dataset(SyntheticPolicy(99), 100, 50));
  // Re-evaluate each label straight from the drawn terms.
  for (const auto& row : rows) {
    for (std::size_t k = 0; k < 4; ++k) {
      const auto& t = policy.terms()[k];
      bool u = ((row.user >> t.user_bit) & 1u) ^ t.user_negated;
      bool r = ((row.resource >> t.resource_bit) & 1u) ^ t.resource_negated;
      REQUIRE(row.labels[k] == (t.conjunction ? (u && r) : (u || r)));
    }
  }
  CHECK_THROWS_AS(generate_dataset(policy, 300, 2, 8, 8), EncodingError);
}

TEST_CASE("priority rules") {
  AccessList allow_all{true, true, true, true};
  auto none = apply_priority_rules({}, 1, 2, allow_all);
  CHECK(none.access_list == allow_all);

  std::vector<PriorityRule> deny5{rule(10, std::nullopt, 5, std::nullopt, Effect::deny)};
  auto d = apply_priority_rules(deny5, 1, 5, allow_all);
  CHECK(d.access_list == AccessList{false, false, false, false});
  CHECK(d.overridden == std::array<bool, 4>{true, true, true, true});
  CHECK(apply_priority_rules(deny5, 1, 6, allow_all).access_list == allow_all);

  std::vector<PriorityRule> mixed{rule(5, 1, std::nullopt, Operation::op2, Effect::allow),
                                  rule(9, std::nullopt, std::nullopt, Operation::op2, Effect::deny)};
  auto m = apply_priority_rules(mixed, 1, 0, AccessList{false, true, false, false});
  CHECK_FALSE(m.access_list[1]);
  CHECK(m.overridden[1]);

  std::vector<PriorityRule> tie{rule(3, 1, std::nullopt, std::nullopt, Effect::allow),
                                rule(3, std::nullopt, 2, std::nullopt, Effect::deny)};
  CHECK(apply_priority_rules(tie, 1, 2, allow_all).access_list ==
        AccessList{false, false, false, false});

  std::vector<PriorityRule> dup{rule(1, 1, 1, Operation::op1, Effect::allow),
                                rule(1, 1, 1, Operation::op1, Effect::deny)};
  CHECK_THROWS_AS(validate_rules(dup), ValidationError);
}

TEST_CASE("rule decisions ignore list order and only change overridden entries") {
  SplitMix64 rng(8);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<PriorityRule> rules;
    for (int i = 0; i < 6; ++i) {
      auto r = rule(static_cast<std::uint32_t>(rng.below(4)),
                    rng.below(2) ? std::optional<std::uint32_t>(rng.below(3)) : std::nullopt,
                    rng.below(2) ? std::optional<std::uint32_t>(rng.below(3)) : std::nullopt,
                    rng.below(2) ? operation_from_index(rng.below(4)) : std::nullopt,
                    rng.below(2) ? Effect::allow : Effect::deny);
      bool clash = std::any_of(rules.begin(), rules.end(), [&](const PriorityRule& o) {
        return o.priority == r.priority && o.user == r.user && o.resource == r.resource &&
               o.operation == r.operation;
      });
      if (!clash) rules.push_back(r);
    }
    AccessList model{rng.below(2) == 1, rng.below(2) == 1, rng.below(2) == 1, rng.below(2) == 1};
    auto u = static_cast<std::uint32_t>(rng.below(3));
    auto res = static_cast<std::uint32_t>(rng.below(3));
    auto a = apply_priority_rules(rules, u, res, model);
    std::reverse(rules.begin(), rules.end());
    auto b = apply_priority_rules(rules, u, res, model);
    CHECK(a.access_list == b.access_list);
    CHECK(a.overridden == b.overridden);
    for (std::size_t k = 0; k < 4; ++k) {
      if (!a.overridden[k]) CHECK(a.access_list[k] == model[k]);
    }
  }
}

TEST_CASE("rules file format") {
  auto rules = parse_rules("# org rules\n10 * 5 * DENY\n\n5 3 * op2 allow\n");
  REQUIRE(rules.size() == 2);
  CHECK(rules[0] == rule(10, std::nullopt, 5, std::nullopt, Effect::deny));
  CHECK(rules[1] == rule(5, 3, std::nullopt, Operation::op2, Effect::allow));
  CHECK(parse_rules(format_rules(rules)) == rules);

  auto error_of = [](std::string_view text) {
    try {
      parse_rules(text);
    } catch (const FormatError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(error_of("1 * * * DENY\n2 * * op5 DENY\n").find("line 2") != std::string::npos);
  CHECK(error_of("1 * *\n").find("line 1") != std::string::npos);
  CHECK(error_of("x * * * DENY\n").find("line 1") != std::string::npos);
  CHECK(error_of("1 * * * MAYBE\n").find("line 1") != std::string::npos);
}

TEST_CASE("model file round trip") {
  auto m = DecisionModel::random(default_dims(), 21);
  auto bytes = serialize_model(m);
  CHECK(deserialize_model(bytes) == m);
  CHECK(bytes.size() <= 1024 * 1024);

  auto path = std::filesystem::temp_directory_path() / "dlacb_test_model.bin";
  save_model(m, path);
  CHECK(std::filesystem::file_size(path) <= 1024 * 1024);
  auto loaded = load_model(path);
  SplitMix64 rng(2);
  for (int i = 0; i < 100; ++i) {
    auto in = encode_input(rng.below(1 << 16), rng.below(1 << 16));
    CHECK(forward(loaded, in) == forward(m, in));
  }

  auto truncated = bytes;
  truncated.resize(bytes.size() - 3);
  CHECK_THROWS_AS(deserialize_model(truncated), FormatError);
  auto bad_magic = bytes;
  bad_magic[0] ^= 1;
  CHECK_THROWS_AS(deserialize_model(bad_magic), FormatError);
  {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(bytes.data()), 20);
  }
  CHECK_THROWS_AS(load_model(path), FormatError);
  std::filesystem::remove(path);

  CHECK(model_fingerprint(m) == model_fingerprint(loaded));
  CHECK(model_fingerprint(m) != model_fingerprint(DecisionModel::random(default_dims(), 22)));
}

TEST_CASE("engine combines model and rules") {
  auto model = std::make_shared<const DecisionModel>(DecisionModel::zeros(default_dims()));
  DecisionEngine engine(model, {rule(10, std::nullopt, 5, std::nullopt, Effect::deny)});
  auto open = engine.decide(1, 4);
  CHECK(open.access_list == AccessList{true, true, true, true});
  CHECK(open.model_scores[0] == 0.5);
  auto closed = engine.decide(1, 5);
  CHECK(closed.access_list == AccessList{false, false, false, false});
  CHECK(closed.overridden[2]);
}
