#include <catch2/catch_amalgamated.hpp>

#include <glassgam/common.hpp>
#include <glassgam/frechet.hpp>
#include <glassgam/robustness.hpp>

#include <cmath>
#include <vector>

using namespace glassgam;

namespace {

// Oracle: walk every monotone coupling explicitly. A coupling starts at
// (0,0), ends at (m-1,n-1), and each step advances one or both indices; the
// oracle minimizes, over all such paths, the maximum pointwise distance seen.
void walk(const Polyline& a, const Polyline& b, std::size_t i, std::size_t j,
          double running_max, double& best) {
  running_max = std::max(running_max, point_distance(a.points[i], b.points[j]));
  if (i + 1 == a.points.size() && j + 1 == b.points.size()) {
    best = std::min(best, running_max);
    return;
  }
  if (i + 1 < a.points.size()) walk(a, b, i + 1, j, running_max, best);
  if (j + 1 < b.points.size()) walk(a, b, i, j + 1, running_max, best);
  if (i + 1 < a.points.size() && j + 1 < b.points.size()) {
    walk(a, b, i + 1, j + 1, running_max, best);
  }
}

double frechet_exhaustive(const Polyline& a, const Polyline& b) {
  double best = std::numeric_limits<double>::infinity();
  walk(a, b, 0, 0, 0.0, best);
  return best;
}

Polyline random_chain(Rng& rng, std::size_t len) {
  Polyline p;
  for (std::size_t i = 0; i < len; ++i) {
    p.points.push_back({rng.normal(0.0, 2.0), rng.normal(0.0, 2.0)});
  }
  return p;
}

}  // namespace

TEST_CASE("worked distance examples") {
  // Identical chains.
  Polyline a{{{0, 0}, {1, 0.5}, {2, -1}}};
  CHECK(discrete_frechet(a, a) == 0.0);

  // Constant vertical offset of 1.
  Polyline p{{{0, 0}, {1, 0}}};
  Polyline q{{{0, 1}, {1, 1}}};
  CHECK(discrete_frechet(p, q) == Catch::Approx(1.0));

  // Three-vertex chain against two vertices: the middle vertex of A must pair
  // with one of B's endpoints, at distance sqrt(2).
  Polyline r{{{0, 0}, {1, 0}, {2, 0}}};
  Polyline s{{{0, 1}, {2, 1}}};
  CHECK(discrete_frechet(r, s) == Catch::Approx(std::sqrt(2.0)));
  CHECK(frechet_exhaustive(r, s) == Catch::Approx(std::sqrt(2.0)));
}

TEST_CASE("dp equals the exhaustive coupling oracle on random chains") {
  Rng rng(404);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t la = 1 + rng.bounded(8);
    const std::size_t lb = 1 + rng.bounded(8);
    const auto a = random_chain(rng, la);
    const auto b = random_chain(rng, lb);
    const double dp = discrete_frechet(a, b);
    const double oracle = frechet_exhaustive(a, b);
    REQUIRE(dp == Catch::Approx(oracle).margin(1e-12));
  }
}

TEST_CASE("distance is symmetric and bounded below by endpoint distances") {
  Rng rng(505);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_chain(rng, 1 + rng.bounded(8));
    const auto b = random_chain(rng, 1 + rng.bounded(8));
    const double d_ab = discrete_frechet(a, b);
    CHECK(d_ab == discrete_frechet(b, a));
    CHECK(d_ab >= 0.0);
    const double first = point_distance(a.points.front(), b.points.front());
    const double last = point_distance(a.points.back(), b.points.back());
    CHECK(d_ab >= std::max(first, last) - 1e-12);
  }
}

TEST_CASE("empty chains are rejected") {
  Polyline empty;
  Polyline one{{{0, 0}}};
  CHECK_THROWS_AS(discrete_frechet(empty, one), ValueError);
  CHECK_THROWS_AS(discrete_frechet(one, empty), ValueError);
}

TEST_CASE("single-vertex chains reduce to point distance") {
  Polyline a{{{1, 2}}};
  Polyline b{{{4, 6}}};
  CHECK(discrete_frechet(a, b) == Catch::Approx(5.0));
}

TEST_CASE("shape_to_polyline places vertices at scaled bin centers") {
  ShapeFunction s;
  s.feature = "f";
  s.bins.feature = "f";
  s.bins.kind = ColumnKind::continuous;
  s.bins.cuts = {20.0};
  s.bins.value_min = 0.0;
  s.bins.value_max = 40.0;
  s.values = {-1.0, 1.0};
  s.stderrs = {0.0, 0.0};

  // Bin centers 10 and 30 in a [0,40] range map to 0.25 and 0.75.
  const auto unit = shape_to_polyline(s, XScaling::unit_interval);
  REQUIRE(unit.points.size() == 2);
  CHECK(unit.points[0].x == Catch::Approx(0.25));
  CHECK(unit.points[1].x == Catch::Approx(0.75));
  CHECK(unit.points[0].y == -1.0);

  const auto raw = shape_to_polyline(s, XScaling::raw);
  CHECK(raw.points[0].x == Catch::Approx(10.0));
  CHECK(raw.points[1].x == Catch::Approx(30.0));

  // A reference range overrides the shape's own range.
  const auto ref = shape_to_polyline(s, XScaling::unit_interval, std::pair{0.0, 80.0});
  CHECK(ref.points[0].x == Catch::Approx(0.125));
  CHECK(ref.points[1].x == Catch::Approx(0.375));
}

TEST_CASE("single-bin shape degenerates to a point") {
  ShapeFunction s;
  s.feature = "f";
  s.bins.kind = ColumnKind::continuous;
  s.bins.value_min = 2.0;
  s.bins.value_max = 6.0;
  s.values = {0.5};
  const auto line = shape_to_polyline(s, XScaling::raw);
  REQUIRE(line.points.size() == 1);
  CHECK(line.points[0].x == Catch::Approx(4.0));

  Polyline other{{{4.0, 1.5}}};
  CHECK(discrete_frechet(line, other) == Catch::Approx(1.0));
}

TEST_CASE("shape_to_polyline rejects categorical shapes") {
  ShapeFunction s;
  s.feature = "c";
  s.bins.kind = ColumnKind::categorical;
  s.bins.category_labels = {"a", "b"};
  s.values = {0.0, 0.0};
  CHECK_THROWS_AS(shape_to_polyline(s, XScaling::raw), ValueError);
}

TEST_CASE("categorical rmse on worked examples") {
  ShapeFunction ref;
  ref.feature = "c";
  ref.bins.kind = ColumnKind::categorical;
  ref.bins.category_labels = {"a", "b"};
  ref.bins.counts = {5, 5};
  ref.values = {1.0, -1.0};

  ShapeFunction same = ref;
  CHECK(categorical_shape_rmse(same, ref) == 0.0);

  ShapeFunction zero = ref;
  zero.values = {0.0, 0.0};
  CHECK(categorical_shape_rmse(zero, ref) == Catch::Approx(1.0));
}

TEST_CASE("categorical rmse over a 5-category hand example") {
  // Differences {0.1, -0.2, 0.3, 0, -0.1}; rmse = sqrt(0.15/5).
  ShapeFunction ref;
  ref.feature = "c";
  ref.bins.kind = ColumnKind::categorical;
  ref.bins.category_labels = {"a", "b", "c", "d", "e"};
  ref.bins.counts = {1, 1, 1, 1, 1};
  ref.values = {0.5, -0.5, 0.2, 0.0, 0.4};

  ShapeFunction other = ref;
  other.values = {0.6, -0.7, 0.5, 0.0, 0.3};
  const double expect = std::sqrt((0.01 + 0.04 + 0.09 + 0.0 + 0.01) / 5.0);
  CHECK(categorical_shape_rmse(other, ref) == Catch::Approx(expect).margin(1e-12));
}

TEST_CASE("categorical rmse skips categories absent from the reference") {
  ShapeFunction ref;
  ref.feature = "c";
  ref.bins.kind = ColumnKind::categorical;
  ref.bins.category_labels = {"a", "b", "zero-count"};
  ref.bins.counts = {1, 1, 0};
  ref.values = {1.0, -1.0, 99.0};

  ShapeFunction other = ref;
  other.values = {1.0, -1.0, -99.0};  // differs only in the zero-count category
  CHECK(categorical_shape_rmse(other, ref) == 0.0);
}

TEST_CASE("categorical rmse rejects mismatched features") {
  ShapeFunction a, b;
  a.feature = "x";
  a.bins.kind = ColumnKind::categorical;
  b.feature = "y";
  b.bins.kind = ColumnKind::categorical;
  CHECK_THROWS_AS(categorical_shape_rmse(a, b), ValueError);
}

TEST_CASE("normalize_distances divides by the first entry") {
  const auto n = normalize_distances(std::vector<double>{4.0, 2.0, 1.0, 0.0});
  REQUIRE_FALSE(n.passthrough);
  REQUIRE(n.values.size() == 4);
  CHECK(n.values[0] == 1.0);
  CHECK(n.values[1] == 0.5);
  CHECK(n.values[2] == 0.25);
  CHECK(n.values[3] == 0.0);
}

TEST_CASE("normalize_distances passthrough when the first entry is zero") {
  const auto n = normalize_distances(std::vector<double>{0.0, 0.0});
  CHECK(n.passthrough);
  REQUIRE(n.values.size() == 2);
  CHECK(n.values[0] == 0.0);
  CHECK(n.values[1] == 0.0);
}

TEST_CASE("normalize_distances single element and order preservation") {
  const auto single = normalize_distances(std::vector<double>{3.0});
  CHECK_FALSE(single.passthrough);
  REQUIRE(single.values.size() == 1);
  CHECK(single.values[0] == 1.0);

  Rng rng(8);
  std::vector<double> raw;
  for (int i = 0; i < 10; ++i) raw.push_back(0.5 + rng.uniform());
  const auto norm = normalize_distances(raw);
  for (std::size_t i = 1; i < raw.size(); ++i) {
    CHECK((raw[i] < raw[i - 1]) == (norm.values[i] < norm.values[i - 1]));
  }
}
