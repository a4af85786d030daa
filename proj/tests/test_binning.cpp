#include <catch2/catch_amalgamated.hpp>

#include <glassgam/binning.hpp>
#include <glassgam/common.hpp>
#include <glassgam/dataset.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

using namespace glassgam;

namespace {

Dataset continuous_dataset(const std::vector<double>& values) {
  Dataset d;
  d.schema = {{"x", ColumnKind::continuous, true}};
  d.columns = {values};
  d.labels.assign(values.size(), 0);
  d.n_rows = values.size();
  return d;
}

// Oracle: type-7 quantile (linear interpolation over sorted order statistics)
// computed directly from its definition, h = p * (n - 1).
double quantile_oracle(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

}  // namespace

TEST_CASE("quantile convention on 1..100 with four bins") {
  std::vector<double> values;
  for (int i = 1; i <= 100; ++i) values.push_back(static_cast<double>(i));

  // Independent oracle first: cuts at p = 1/4, 2/4, 3/4 over 100 points.
  const double q1 = quantile_oracle(values, 0.25);
  const double q2 = quantile_oracle(values, 0.50);
  const double q3 = quantile_oracle(values, 0.75);
  CHECK(q1 == Catch::Approx(25.75));
  CHECK(q2 == Catch::Approx(50.5));
  CHECK(q3 == Catch::Approx(75.25));

  const auto bm = build_bins(continuous_dataset(values), 4);
  REQUIRE(bm.features.size() == 1);
  const auto& fb = bm.features[0];
  REQUIRE(fb.cuts.size() == 3);
  CHECK(fb.cuts[0] == Catch::Approx(q1));
  CHECK(fb.cuts[1] == Catch::Approx(q2));
  CHECK(fb.cuts[2] == Catch::Approx(q3));
  CHECK(fb.n_bins() == 4);
  // Quantile bins over distinct values balance populations.
  for (const auto c : fb.counts) CHECK(c == 25);
}

TEST_CASE("constant column collapses to a single bin") {
  const auto bm = build_bins(continuous_dataset({5.0, 5.0, 5.0}), 8);
  const auto& fb = bm.features[0];
  CHECK(fb.cuts.empty());
  CHECK(fb.n_bins() == 1);
  CHECK(fb.counts[0] == 3);
  CHECK(fb.value_min == 5.0);
  CHECK(fb.value_max == 5.0);
}

TEST_CASE("heavy ties collapse duplicate cuts") {
  // 90% zeros: most quantiles coincide at 0 and must merge.
  std::vector<double> values(100, 0.0);
  for (int i = 0; i < 10; ++i) values[90 + i] = static_cast<double>(i + 1);
  const auto bm = build_bins(continuous_dataset(values), 16);
  const auto& fb = bm.features[0];
  CHECK(fb.n_bins() <= 16);
  for (std::size_t i = 1; i < fb.cuts.size(); ++i) {
    CHECK(fb.cuts[i] > fb.cuts[i - 1]);  // strictly increasing after collapse
  }
}

TEST_CASE("bins never exceed max_bins and cover all rows") {
  Rng rng(100);
  std::vector<double> values;
  for (int i = 0; i < 977; ++i) values.push_back(std::round(rng.normal(0, 3)));
  for (int max_bins : {2, 3, 7, 32}) {
    const auto bm = build_bins(continuous_dataset(values), max_bins);
    const auto& fb = bm.features[0];
    CHECK(fb.n_bins() <= max_bins);
    std::int64_t total = 0;
    for (const auto c : fb.counts) total += c;
    CHECK(total == static_cast<std::int64_t>(values.size()));
  }
}

TEST_CASE("bin_of respects the half-open boundary convention") {
  FeatureBins fb;
  fb.feature = "x";
  fb.kind = ColumnKind::continuous;
  fb.cuts = {10.0, 20.0};
  fb.value_min = 0.0;
  fb.value_max = 30.0;
  CHECK(bin_of(fb, 5.0) == 0);
  CHECK(bin_of(fb, 15.0) == 1);
  CHECK(bin_of(fb, 25.0) == 2);
  // A value equal to a cut goes to the lower bin.
  CHECK(bin_of(fb, 10.0) == 0);
  CHECK(bin_of(fb, 20.0) == 1);
  // Out-of-range values clamp to the edge bins.
  CHECK(bin_of(fb, -1e9) == 0);
  CHECK(bin_of(fb, 1e9) == 2);
  CHECK_THROWS_AS(bin_of(fb, std::nan("")), ValueError);
}

TEST_CASE("round trip: every binned value satisfies its bin's bounds") {
  Rng rng(7);
  std::vector<double> values;
  for (int i = 0; i < 500; ++i) values.push_back(rng.normal(0, 1));
  const auto bm = build_bins(continuous_dataset(values), 12);
  const auto& fb = bm.features[0];
  for (const double v : values) {
    const int b = bin_of(fb, v);
    if (b > 0) CHECK(v > fb.cuts[static_cast<std::size_t>(b - 1)]);
    if (b < static_cast<int>(fb.cuts.size())) CHECK(v <= fb.cuts[static_cast<std::size_t>(b)]);
  }
}

TEST_CASE("categorical bins are observed categories plus a sentinel") {
  Dataset d;
  d.schema = {{"c", ColumnKind::categorical, true}};
  CategoricalColumn col;
  col.labels = {"A", "B"};
  col.codes = {0, 1, 0};
  d.columns = {col};
  d.labels = {0, 0, 0};
  d.n_rows = 3;

  const auto bm = build_bins(d, 8);
  const auto& fb = bm.features[0];
  REQUIRE(fb.kind == ColumnKind::categorical);
  REQUIRE(fb.n_bins() == 3);
  CHECK(fb.category_labels[0] == "A");
  CHECK(fb.category_labels[1] == "B");
  CHECK(fb.sentinel_bin() == 2);
  CHECK(fb.counts[0] == 2);
  CHECK(fb.counts[1] == 1);
  CHECK(fb.counts[2] == 0);

  CHECK(bin_of(fb, std::string_view("A")) == 0);
  CHECK(bin_of(fb, std::string_view("never-seen")) == fb.sentinel_bin());
}

TEST_CASE("discretize maps values and translates vocabularies") {
  Dataset train;
  train.schema = {{"x", ColumnKind::continuous, true}, {"c", ColumnKind::categorical, true}};
  CategoricalColumn tc;
  tc.labels = {"red", "blue"};
  tc.codes = {0, 1, 0, 1};
  train.columns = {std::vector<double>{5.0, 15.0, 25.0, 10.0}, tc};
  train.labels = {0, 1, 0, 1};
  train.n_rows = 4;

  auto bm = build_bins(train, 8);
  // Force the worked example's cuts for the continuous feature.
  bm.features[0].cuts = {10.0, 20.0};

  const auto bd = discretize(train, bm);
  REQUIRE(bd.n_rows == 4);
  CHECK(bd.columns[0] == std::vector<std::uint16_t>{0, 1, 2, 0});
  CHECK(bd.columns[1] == std::vector<std::uint16_t>{0, 1, 0, 1});
  CHECK(bd.labels == train.labels);

  // A second dataset with its own vocabulary order still lands correctly,
  // and an unseen category goes to the sentinel bin.
  Dataset test;
  test.schema = train.schema;
  CategoricalColumn sc;
  sc.labels = {"blue", "green", "red"};
  sc.codes = {0, 1, 2};
  test.columns = {std::vector<double>{0.0, 12.0, 99.0}, sc};
  test.labels = {0, 0, 0};
  test.n_rows = 3;

  const auto tbd = discretize(test, bm);
  CHECK(tbd.columns[0] == std::vector<std::uint16_t>{0, 1, 2});
  const auto sentinel = static_cast<std::uint16_t>(bm.features[1].sentinel_bin());
  CHECK(tbd.columns[1] == std::vector<std::uint16_t>{1, sentinel, 0});
}

TEST_CASE("discretize rejects missing values") {
  Dataset d = continuous_dataset({1.0, std::nan(""), 3.0});
  CHECK_THROWS_AS(build_bins(d, 4), ValueError);

  const auto bm = build_bins(continuous_dataset({1.0, 2.0, 3.0}), 4);
  CHECK_THROWS_AS(discretize(d, bm), ValueError);
}

TEST_CASE("build_bins validates its arguments") {
  const auto d = continuous_dataset({1.0, 2.0});
  CHECK_THROWS_AS(build_bins(d, 1), ValueError);
  Dataset empty;
  empty.schema = {{"x", ColumnKind::continuous, true}};
  empty.columns = {std::vector<double>{}};
  CHECK_THROWS_AS(build_bins(empty, 4), ValueError);
}

TEST_CASE("discretize rejects kind mismatches") {
  const auto d = continuous_dataset({1.0, 2.0});
  auto bm = build_bins(d, 4);
  bm.features[0].kind = ColumnKind::categorical;
  bm.features[0].category_labels = {"a"};
  CHECK_THROWS_AS(discretize(d, bm), SchemaError);
}
