#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <vector>

#include "fusetrack/appearance.hpp"
#include "fusetrack/error.hpp"
#include "fusetrack/rng.hpp"
#include "support.hpp"

using namespace fusetrack;
using namespace fusetrack::appearance;

namespace {

ColorHistogram hist(const HistogramConfig& cfg, std::vector<double> w) {
  return ColorHistogram::from_weights(cfg, std::move(w));
}

AppearanceFeature feature(VehicleClass c, std::vector<double> shape, ColorHistogram h) {
  return AppearanceFeature{c, std::move(shape), std::move(h)};
}

}  // namespace

TEST_CASE("rgb_to_hsv reference colours") {
  auto red = rgb_to_hsv(255, 0, 0);
  CHECK(red.h == 0.0);
  CHECK(red.s == 1.0);
  CHECK(red.v == 1.0);
  CHECK(rgb_to_hsv(0, 255, 0).h == doctest::Approx(120.0));
  CHECK(rgb_to_hsv(0, 0, 255).h == doctest::Approx(240.0));
  CHECK(rgb_to_hsv(255, 0, 255).h == doctest::Approx(300.0));

  const auto orange = rgb_to_hsv(255, 128, 0);
  CHECK(orange.h == doctest::Approx(60.0 * 128.0 / 255.0));
  CHECK(orange.s == doctest::Approx(1.0));
  CHECK(orange.v == doctest::Approx(1.0));

  const auto grey = rgb_to_hsv(128, 128, 128);
  CHECK(grey.h == 0.0);
  CHECK(grey.s == 0.0);
  CHECK(grey.v == doctest::Approx(128.0 / 255.0));

  const auto black = rgb_to_hsv(0, 0, 0);
  CHECK(black.h == 0.0);
  CHECK(black.s == 0.0);
  CHECK(black.v == 0.0);
}

TEST_CASE("property: rgb -> hsv -> rgb is the identity") {
  Rng rng(21);
  for (int i = 0; i < 5000; ++i) {
    const Rgb c{static_cast<std::uint8_t>(rng.below(256)), static_cast<std::uint8_t>(rng.below(256)),
                static_cast<std::uint8_t>(rng.below(256))};
    const Hsv h = rgb_to_hsv(c);
    CHECK(h.h >= 0.0);
    CHECK(h.h < 360.0);
    CHECK(h.s >= 0.0);
    CHECK(h.s <= 1.0);
    CHECK(h.v >= 0.0);
    CHECK(h.v <= 1.0);
    CHECK(hsv_to_rgb(h) == c);
  }
}

TEST_CASE("bin index layout and boundary values") {
  const HistogramConfig cfg;
  CHECK(cfg.size() == 256);
  CHECK(bin_index({0.0, 0.0, 0.0}, cfg) == 0);
  CHECK(bin_index({359.999, 1.0, 1.0}, cfg) == 255);
  CHECK(bin_index({22.5, 0.0, 0.0}, cfg) == 16);  // second hue bin
  CHECK(bin_index({0.0, 0.25, 0.0}, cfg) == 4);    // second saturation bin
  CHECK(bin_index({0.0, 0.0, 0.5}, cfg) == 2);
  CHECK_THROWS_AS((HistogramConfig{0, 4, 4}.validate()), InvalidArgument);
}

TEST_CASE("histogram of a 2x2 image") {
  const HistogramConfig cfg{4, 1, 1};
  PixelImage img(2, 2, std::vector<Rgb>{{255, 0, 0}, {200, 0, 0}, {0, 255, 0}, {0, 255, 255}});
  const auto h = compute_histogram(img, cfg);
  REQUIRE(h.size() == 4);
  CHECK(h.weights()[0] == 0.5);
  CHECK(h.weights()[1] == 0.25);
  CHECK(h.weights()[2] == 0.25);
  CHECK(h.weights()[3] == 0.0);
  CHECK_FALSE(h.is_empty());
}

TEST_CASE("histogram respects the region of interest") {
  const HistogramConfig cfg{4, 1, 1};
  PixelImage img(4, 4, Rgb{0, 0, 255});
  img.at(1, 1) = Rgb{255, 0, 0};
  img.set_region({1, 1, 1, 1});
  CHECK(compute_histogram(img, cfg).weights()[0] == 1.0);
  CHECK_THROWS_AS(img.set_region({3, 3, 2, 2}), InvalidArgument);
  img.set_region({0, 0, 0, 1});
  CHECK_THROWS_AS(compute_histogram(img, cfg), InvalidArgument);
}

TEST_CASE("read_ppm accepts ASCII and binary pixmaps") {
  std::istringstream ascii("P3\n# comment\n2 1\n255\n255 0 0  0 0 255\n");
  const auto a = read_ppm(ascii);
  CHECK(a.width() == 2);
  CHECK(a.height() == 1);
  CHECK(a.at(0, 0) == Rgb{255, 0, 0});
  CHECK(a.at(1, 0) == Rgb{0, 0, 255});

  std::string bin = "P6\n1 1\n255\n";
  bin += std::string{'\x10', '\x20', '\x30'};
  std::istringstream binary(bin);
  CHECK(read_ppm(binary).at(0, 0) == Rgb{16, 32, 48});

  std::istringstream bad_max("P3\n1 1\n65535\n0 0 0\n");
  CHECK_THROWS(read_ppm(bad_max));
  std::istringstream truncated("P6\n2 2\n255\nabc");
  CHECK_THROWS(read_ppm(truncated));
}

TEST_CASE("histogram validation") {
  const HistogramConfig cfg{2, 1, 1};
  CHECK_THROWS_AS(hist(cfg, {0.5, 0.6}), InvalidArgument);
  CHECK_THROWS_AS(hist(cfg, {1.5, -0.5}), InvalidArgument);
  CHECK_THROWS_AS(hist(cfg, {1.0}), InvalidArgument);
  CHECK(hist(cfg, {0.0, 0.0}).is_empty());
  CHECK(ColorHistogram::empty(cfg).is_empty());
}

TEST_CASE("similarity hand cases") {
  const HistogramConfig cfg{4, 1, 1};
  const auto a = hist(cfg, {0.5, 0.5, 0.0, 0.0});
  const auto b = hist(cfg, {0.5, 0.0, 0.5, 0.0});
  CHECK(similarity(a, b) == doctest::Approx(0.5));
  CHECK(similarity(a, a) == doctest::Approx(1.0));
  CHECK(similarity(a, b, SimilarityMetric::Cosine) == doctest::Approx(0.5));
  const auto c = hist(cfg, {0.0, 0.0, 0.0, 1.0});
  CHECK(similarity(a, c) == 0.0);

  const auto e = ColorHistogram::empty(cfg);
  CHECK(similarity(e, e) == 1.0);
  CHECK(similarity(e, a) == 0.0);
  CHECK_THROWS_AS(similarity(a, ColorHistogram::empty(HistogramConfig{2, 2, 1})), InvalidArgument);
}

TEST_CASE("shape distance is the clamped RMS difference") {
  const std::vector<double> zero(4, 0.0), half(4, 0.5), far(4, 3.0);
  CHECK(shape_distance(zero, half) == doctest::Approx(0.5));
  CHECK(shape_distance(zero, far) == 1.0);
  CHECK(shape_distance(half, half) == 0.0);
  CHECK(shape_distance(std::vector<double>{}, std::vector<double>{}) == 0.0);
  CHECK_THROWS_AS(shape_distance(zero, std::vector<double>(3, 0.0)), InvalidArgument);
}

TEST_CASE("feature distance hand case") {
  const HistogramConfig cfg{4, 1, 1};
  const auto a = feature(VehicleClass::Car, {0.0, 0.0}, hist(cfg, {0.5, 0.5, 0.0, 0.0}));
  const auto b = feature(VehicleClass::Car, {0.3, 0.3}, hist(cfg, {0.5, 0.0, 0.5, 0.0}));
  CHECK(feature_distance(a, b, 0.5) == doctest::Approx(0.4));
  CHECK(feature_distance(a, b, 1.0) == doctest::Approx(0.5));
  CHECK(feature_distance(a, b, 0.0) == doctest::Approx(0.3));

  auto truck = b;
  truck.vehicle_class = VehicleClass::Truck;
  CHECK_THROWS_AS(feature_distance(a, truck, 0.5), InvalidArgument);
  CHECK_THROWS_AS(feature_distance(a, b, 1.5), InvalidArgument);
}

TEST_CASE("vehicle class names") {
  for (auto c : {VehicleClass::Car, VehicleClass::Truck, VehicleClass::Bus, VehicleClass::Motor}) {
    CHECK(parse_vehicle_class(to_string(c)) == c);
  }
  CHECK_THROWS_AS(parse_vehicle_class("tractor"), InvalidArgument);
}

TEST_CASE("property: distance is bounded, symmetric, zero on identity and matches its definition") {
  Rng rng(22);
  const HistogramConfig cfg{8, 2, 2};
  for (int i = 0; i < 3000; ++i) {
    auto a = testing::random_feature(rng, cfg, 6, 1);
    auto b = testing::random_feature(rng, cfg, 6, 1);
    const double w = rng.uniform();
    const double d = feature_distance(a, b, w);
    CHECK(d >= 0.0);
    CHECK(d <= 1.0);
    CHECK(d == doctest::Approx(feature_distance(b, a, w)).epsilon(1e-12));
    CHECK(d == doctest::Approx(testing::oracle_distance(a, b, w)).epsilon(1e-12));
    CHECK(feature_distance(a, a, w) == doctest::Approx(0.0));
    const double s = similarity(a.histogram, b.histogram, SimilarityMetric::Cosine);
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("property: top_k equals an exhaustive class-filtered sort") {
  Rng rng(23);
  const HistogramConfig cfg{8, 2, 2};
  for (int i = 0; i < 500; ++i) {
    const auto query = testing::random_feature(rng, cfg, 4);
    std::vector<AppearanceFeature> cands;
    const std::size_t n = rng.below(60);
    for (std::size_t j = 0; j < n; ++j) cands.push_back(testing::random_feature(rng, cfg, 4));
    if (n > 3 && rng.uniform() < 0.5) cands[n - 1] = cands[0];  // exact ties
    const std::size_t k = rng.below(25);

    std::vector<RankedCandidate> expected;
    for (std::size_t j = 0; j < cands.size(); ++j) {
      if (cands[j].vehicle_class != query.vehicle_class) continue;
      expected.push_back({j, testing::oracle_distance(query, cands[j], 0.5)});
    }
    std::stable_sort(expected.begin(), expected.end(),
                     [](const auto& x, const auto& y) { return x.distance < y.distance; });
    if (expected.size() > k) expected.resize(k);

    const auto got = top_k(query, cands, k);
    REQUIRE(got.size() == expected.size());
    for (std::size_t r = 0; r < got.size(); ++r) {
      CHECK(got[r].index == expected[r].index);
      CHECK(got[r].distance == doctest::Approx(expected[r].distance).epsilon(1e-12));
      CHECK(cands[got[r].index].vehicle_class == query.vehicle_class);
    }
  }
}

TEST_CASE("top_k_among only compares the listed candidates") {
  const HistogramConfig cfg{4, 1, 1};
  const auto h = hist(cfg, {1.0, 0.0, 0.0, 0.0});
  const auto q = feature(VehicleClass::Bus, {0.0}, h);
  const std::vector<AppearanceFeature> cands{feature(VehicleClass::Bus, {0.0}, h),
                                             feature(VehicleClass::Bus, {0.1}, h),
                                             feature(VehicleClass::Bus, {0.2}, h)};
  const std::vector<std::size_t> idx{2, 1};
  const auto got = top_k_among(q, cands, idx, 5);
  REQUIRE(got.size() == 2);
  CHECK(got[0].index == 1);
  CHECK(got[1].index == 2);
  CHECK(top_k(q, cands, 0).empty());
}

TEST_CASE("property: a smaller k returns a prefix of a larger k") {
  Rng rng(24);
  const HistogramConfig cfg{8, 2, 2};
  for (int i = 0; i < 1000; ++i) {
    const auto query = testing::random_feature(rng, cfg, 4, 2);
    std::vector<AppearanceFeature> cands;
    for (int j = 0; j < 30; ++j) cands.push_back(testing::random_feature(rng, cfg, 4, 2));
    const std::size_t k = rng.below(20);
    const auto small = top_k(query, cands, k);
    const auto large = top_k(query, cands, k + 1 + rng.below(20));
    REQUIRE(small.size() <= large.size());
    CHECK(std::equal(small.begin(), small.end(), large.begin()));
  }
}
