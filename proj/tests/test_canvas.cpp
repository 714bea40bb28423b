#include <doctest.h>

#include <cmath>

#include "mglm/canvas.hpp"
#include "mglm/vocab.hpp"

using namespace mglm;

namespace {

constexpr int SEP = Vocabulary::kSep;
constexpr int EOS = Vocabulary::kEosSlot;

ObservationMask mask_of(std::vector<ChannelObs> obs) { return ObservationMask{std::move(obs)}; }

}  // namespace

TEST_CASE("concatenate_channels layout") {
  auto empty3 = concatenate_channels({{}, {}, {}});
  REQUIRE(empty3.size() == 3);
  CHECK(empty3[0] == CanvasItem{SEP, 0});
  CHECK(empty3[1] == CanvasItem{SEP, 1});
  CHECK(empty3[2] == CanvasItem{SEP, 2});

  auto two = concatenate_channels({{5}, {6, 7}});
  REQUIRE(two.size() == 5);
  CHECK(two[0] == CanvasItem{5, 0});
  CHECK(two[1] == CanvasItem{SEP, 0});
  CHECK(two[2] == CanvasItem{6, 1});
  CHECK(two[3] == CanvasItem{7, 1});
  CHECK(two[4] == CanvasItem{SEP, 1});

  // Total length is always sum of lengths + k.
  for (int extra = 0; extra < 4; ++extra) {
    std::vector<std::vector<int>> chans = {{4, 5}, std::vector<int>(static_cast<size_t>(extra), 9)};
    CHECK(static_cast<int>(concatenate_channels(chans).size()) == 2 + extra + 2);
  }
}

TEST_CASE("sample_canvas: full, empty, and hand-picked partial") {
  auto full = concatenate_channels({{10, 11, 12}, {13, 14}});
  Rng rng(1);

  SUBCASE("all Full keeps everything") {
    auto sc = sample_canvas(full, mask_of({ChannelObs::Full, ChannelObs::Full}), rng);
    CHECK(sc.canvas.items == full);
    CHECK(sc.spans.empty());
    SlotTargets t = build_training_instance(sc.canvas, sc.spans, {});
    for (const auto& slot : t) {
      REQUIRE(slot.size() == 1);
      CHECK(slot[0].token == EOS);
      CHECK(slot[0].weight == 1.0);
    }
  }

  SUBCASE("all Empty leaves k SEPs with one span per channel") {
    auto sc = sample_canvas(full, mask_of({ChannelObs::Empty, ChannelObs::Empty}), rng);
    REQUIRE(sc.canvas.length() == 2);
    CHECK(sc.canvas.items[0] == CanvasItem{SEP, 0});
    CHECK(sc.canvas.items[1] == CanvasItem{SEP, 1});
    REQUIRE(sc.spans.size() == 2);
    CHECK(sc.spans[0].slot == 0);
    CHECK(sc.spans[0].tokens == std::vector<int>{10, 11, 12});
    CHECK(sc.spans[1].slot == 1);
    CHECK(sc.spans[1].tokens == std::vector<int>{13, 14});
  }

  SUBCASE("span attribution to the nearest kept right anchor") {
    // Channel tokens [a,b,c] with only b kept: [a] anchors at b's slot,
    // [c] anchors at the SEP's slot.
    auto one = concatenate_channels({{20, 21, 22}});
    // Draw masks until exactly {21} survives; sampling is deterministic per seed,
    // so find one seed once and freeze it.
    bool found = false;
    for (uint64_t seed = 0; seed < 200 && !found; ++seed) {
      Rng r(seed);
      auto sc = sample_canvas(one, mask_of({ChannelObs::Partial}), r);
      if (sc.canvas.length() == 2 && sc.canvas.items[0].token == 21) {
        found = true;
        REQUIRE(sc.spans.size() == 2);
        CHECK(sc.spans[0].slot == 0);
        CHECK(sc.spans[0].tokens == std::vector<int>{20});
        CHECK(sc.spans[1].slot == 1);
        CHECK(sc.spans[1].tokens == std::vector<int>{22});
      }
    }
    CHECK(found);
  }
}

TEST_CASE("slot_weights closed forms") {
  CHECK(slot_weights(1, {PriorKind::Uniform, 1.0}) == std::vector<double>{1.0});
  CHECK(slot_weights(1, {PriorKind::BinaryTree, 1.0}) == std::vector<double>{1.0});

  auto u3 = slot_weights(3, {PriorKind::Uniform, 1.0});
  for (double w : u3) CHECK(w == doctest::Approx(1.0 / 3).epsilon(1e-12));

  // softmax(-[1,0,1]) = [0.2119, 0.5761, 0.2119]
  auto t3 = slot_weights(3, {PriorKind::BinaryTree, 1.0});
  CHECK(t3[0] == doctest::Approx(0.2119).epsilon(1e-3));
  CHECK(t3[1] == doctest::Approx(0.5761).epsilon(1e-3));
  CHECK(t3[2] == doctest::Approx(0.2119).epsilon(1e-3));

  CHECK_THROWS_AS(slot_weights(0, {PriorKind::Uniform, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(slot_weights(2, {PriorKind::BinaryTree, 0.0}), std::invalid_argument);
}

TEST_CASE("slot weights sum to one per slot; span-mass mode scales by length") {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    int s = 1 + static_cast<int>(rng.next_below(9));
    Prior prior{trial % 2 ? PriorKind::Uniform : PriorKind::BinaryTree, 0.3 + rng.uniform_double()};
    auto w = slot_weights(s, prior);
    double sum = 0.0;
    for (double v : w) sum += v;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }

  auto full = concatenate_channels({{30, 31, 32}});
  Rng r(12);
  auto sc = sample_canvas(full, mask_of({ChannelObs::Empty}), r);
  SlotTargets mass = build_training_instance(sc.canvas, sc.spans, {}, /*span_mass_weights=*/true);
  double total = 0.0;
  for (const SlotTarget& t : mass[0]) total += t.weight;
  CHECK(total == doctest::Approx(3.0).epsilon(1e-9));
}

TEST_CASE("build_training_instance places span targets in order") {
  auto full = concatenate_channels({{40, 41, 42}, {43}});
  Rng rng(3);
  auto sc = sample_canvas(full, mask_of({ChannelObs::Empty, ChannelObs::Full}), rng);
  SlotTargets t = build_training_instance(sc.canvas, sc.spans, {});
  // Canvas: [SEP0, 43, SEP1]; slot 0 carries the full channel-0 span.
  REQUIRE(t.size() == 3);
  REQUIRE(t[0].size() == 3);
  CHECK(t[0][0].token == 40);
  CHECK(t[0][1].token == 41);
  CHECK(t[0][2].token == 42);
  for (const SlotTarget& st : t[0]) CHECK(st.weight == doctest::Approx(1.0 / 3));
  CHECK(t[1][0].token == EOS);
  CHECK(t[2][0].token == EOS);
}

TEST_CASE("round trip and slot-count law over random masks") {
  Rng rng(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    int k = 2 + static_cast<int>(rng.next_below(3));
    std::vector<std::vector<int>> chans(static_cast<size_t>(k));
    for (auto& ch : chans) {
      int len = static_cast<int>(rng.next_below(7));
      for (int i = 0; i < len; ++i) ch.push_back(4 + static_cast<int>(rng.next_below(30)));
    }
    std::vector<ChannelObs> obs;
    for (int c = 0; c < k; ++c) {
      uint64_t o = rng.next_below(3);
      obs.push_back(o == 0 ? ChannelObs::Full : (o == 1 ? ChannelObs::Partial : ChannelObs::Empty));
    }
    auto full = concatenate_channels(chans);
    auto sc = sample_canvas(full, mask_of(obs), rng, trial % 2 ? MaskMode::PerChannel : MaskMode::Global);
    validate_canvas(sc.canvas, SEP);
    SlotTargets targets = build_training_instance(sc.canvas, sc.spans, {});

    CHECK(static_cast<int>(targets.size()) == sc.canvas.length());
    int eos_slots = 0;
    for (const auto& slot : targets)
      if (slot.size() == 1 && slot[0].token == EOS) ++eos_slots;
    CHECK(eos_slots == sc.canvas.length() - static_cast<int>(sc.spans.size()));

    CHECK(reconstruct_full(sc.canvas, targets, EOS) == full);
  }
}

TEST_CASE("keep-count distribution is uniform over {0..n}") {
  const int n = 5, trials = 20000;
  auto full = concatenate_channels({{4, 5, 6, 7, 8}});
  Rng rng(77);
  std::vector<int> counts(n + 1, 0);
  for (int t = 0; t < trials; ++t) {
    auto sc = sample_canvas(full, mask_of({ChannelObs::Partial}), rng);
    ++counts[static_cast<size_t>(sc.canvas.length() - 1)];
  }
  double expect = static_cast<double>(trials) / (n + 1);
  double se = std::sqrt(expect * (1.0 - 1.0 / (n + 1)));
  for (int m = 0; m <= n; ++m) CHECK(std::fabs(counts[static_cast<size_t>(m)] - expect) < 3.0 * se);
}

TEST_CASE("sampled subsets of a given size are uniform") {
  // For n=3 with m=2 there are 3 subsets; each should appear ~equally often.
  auto full = concatenate_channels({{100, 101, 102}});
  Rng rng(31);
  std::map<std::vector<int>, int> freq;
  int m2 = 0;
  for (int t = 0; t < 30000; ++t) {
    auto sc = sample_canvas(full, mask_of({ChannelObs::Partial}), rng);
    if (sc.canvas.length() == 3) {  // two kept tokens + SEP
      std::vector<int> kept = {sc.canvas.items[0].token, sc.canvas.items[1].token};
      ++freq[kept];
      ++m2;
    }
  }
  REQUIRE(freq.size() == 3);
  for (const auto& [subset, count] : freq) {
    double expect = m2 / 3.0;
    double se = std::sqrt(expect * (1.0 - 1.0 / 3));
    CHECK(std::fabs(count - expect) < 4.0 * se);
  }
}
