#include <catch2/catch_amalgamated.hpp>

#include "road/replay.hpp"

using namespace road;

namespace {

Transition labeled(int state) { return Transition{state, 0, 0.0, state, false}; }

OfflineDataset small_offline() {
  OfflineDataset d;
  d.transitions = {labeled(0), labeled(1)};
  d.behavior_label = "test";
  return d;
}

}  // namespace

TEST_CASE("buffer is strictly FIFO with bounded length") {
  OnlineBuffer buf(2);
  buf.push(labeled(0));
  buf.push(labeled(1));
  buf.push(labeled(2));
  REQUIRE(buf.size() == 2);
  CHECK(buf.at(0).state == 1);
  CHECK(buf.at(1).state == 2);
  CHECK(buf.total_inserted() == 3);
  for (int i = 0; i < 100; ++i) buf.push(labeled(i));
  CHECK(buf.size() == 2);
  CHECK_THROWS_AS(OnlineBuffer(0), std::invalid_argument);
}

TEST_CASE("sample_mixed pure endpoints carry the right source tags") {
  const OfflineDataset offline = small_offline();
  OnlineBuffer buf(8);
  buf.push(labeled(7));
  Rng rng(1);

  for (const auto& tagged : sample_mixed(offline, buf, 1.0, 64, rng)) {
    CHECK(tagged.source == SampleSource::Offline);
  }
  for (const auto& tagged : sample_mixed(offline, buf, 0.0, 64, rng)) {
    CHECK(tagged.source == SampleSource::Online);
    CHECK(tagged.t.state == 7);
  }
}

TEST_CASE("sample_mixed rejects empty required sources by name") {
  const OfflineDataset offline = small_offline();
  OnlineBuffer empty_buf(4);
  Rng rng(2);
  CHECK_THROWS_WITH(sample_mixed(offline, empty_buf, 0.5, 8, rng),
                    Catch::Matchers::ContainsSubstring("online"));
  OfflineDataset empty_off;
  empty_off.transitions = {};
  OnlineBuffer buf(4);
  buf.push(labeled(0));
  CHECK_THROWS_WITH(sample_mixed(empty_off, buf, 0.5, 8, rng),
                    Catch::Matchers::ContainsSubstring("offline"));
  CHECK_THROWS_AS(sample_mixed(offline, buf, 1.5, 8, rng), std::invalid_argument);
}

TEST_CASE("sample_mixed offline fraction concentrates at m") {
  const OfflineDataset offline = small_offline();
  OnlineBuffer buf(4);
  buf.push(labeled(9));
  Rng rng(3);
  const double m = 0.3;
  const int batches = 500;
  const int batch_size = 256;
  std::uint64_t offline_hits = 0;
  for (int i = 0; i < batches; ++i) {
    for (const auto& tagged : sample_mixed(offline, buf, m, batch_size, rng)) {
      if (tagged.source == SampleSource::Offline) ++offline_hits;
    }
  }
  const double n = static_cast<double>(batches) * batch_size;
  const double phat = static_cast<double>(offline_hits) / n;
  CHECK(std::abs(phat - m) <= 3.0 * std::sqrt(m * (1.0 - m) / n));
}

TEST_CASE("decreasing schedule hits endpoints and interpolates linearly") {
  DecreasingStrategy dec{0.5, 0.1, 100};
  CHECK(decreasing_ratio(dec, 0) == 0.5);
  CHECK(decreasing_ratio(dec, 99) == 0.1);
  CHECK_THAT(decreasing_ratio(dec, 49),
             Catch::Matchers::WithinAbs(0.5 - 0.4 * (49.0 / 99.0), 1e-15));
  double prev = decreasing_ratio(dec, 0);
  for (int k = 1; k < 100; ++k) {
    const double cur = decreasing_ratio(dec, k);
    CHECK(cur <= prev);
    prev = cur;
  }
  CHECK_THROWS_AS(decreasing_ratio(dec, 100), std::out_of_range);
}

TEST_CASE("next_directive dispatches per strategy kind") {
  Rng rng(4);
  StrategyState fixed{FixedStrategy{0.5}};
  for (int k = 0; k < 5; ++k) CHECK(next_directive(fixed, k, rng).ratio == 0.5);

  StrategyState uniform{UniformStrategy{{0.1, 0.5}}};
  for (int k = 0; k < 20; ++k) {
    const double m = next_directive(uniform, k, rng).ratio.value();
    CHECK((m == 0.1 || m == 0.5));
  }

  StrategyState roadlike{RoadStrategy{BanditState::sliding({0.1, 0.5}, 10)}};
  CHECK(next_directive(roadlike, 0, rng).ratio == 0.1);  // unpulled-first rule

  StrategyState br{BalancedReplayStrategy{1e-3}};
  CHECK_FALSE(next_directive(br, 0, rng).ratio.has_value());
}

TEST_CASE("br_weights hand cases") {
  // two pairs (one state, two actions)
  std::vector<Transition> samples = {Transition{0, 0, 0, 0, false},
                                     Transition{0, 1, 0, 0, false}};
  OccupancyMeasure occ;
  occ.density.resize(1, 2);

  SECTION("occupancy equals empirical distribution gives uniform weights") {
    occ.density << 0.5, 0.5;
    const auto w = br_weights(samples, occ, 1e-3);
    CHECK_THAT(w[0], Catch::Matchers::WithinAbs(0.5, 1e-12));
    CHECK_THAT(w[1], Catch::Matchers::WithinAbs(0.5, 1e-12));
  }

  SECTION("weight ratio 3:1 for d_pi (0.75, 0.25) against empirical (0.5, 0.5)") {
    occ.density << 0.75, 0.25;
    const auto w = br_weights(samples, occ, 1e-12);
    CHECK_THAT(w[0] / w[1], Catch::Matchers::WithinAbs(3.0, 1e-9));
  }

  SECTION("concentrated occupancy maximizes the matching pair's weight") {
    occ.density << 1.0, 0.0;
    const auto w = br_weights(samples, occ, 1e-3);
    CHECK(w[0] > w[1]);
  }

  SECTION("invariant to positive rescaling of the occupancy") {
    occ.density << 0.75, 0.25;
    const auto w1 = br_weights(samples, occ, 1e-3);
    occ.density *= 37.0;
    const auto w2 = br_weights(samples, occ, 1e-3);
    CHECK_THAT(w1[0], Catch::Matchers::WithinAbs(w2[0], 1e-14));
  }

  CHECK_THROWS_AS(br_weights(samples, occ, 0.0), std::invalid_argument);
}
