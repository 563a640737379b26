#include <doctest.h>

#include <cmath>

#include "appca/block_model.hpp"
#include "appca/error.hpp"
#include "test_support.hpp"

using namespace appca;
using appca::testing::Gen;

namespace {

std::size_t count_code(const Diagnostics& d, const std::string& code) {
  std::size_t k = 0;
  for (const auto& x : d) k += x.code == code ? 1 : 0;
  return k;
}

IndexList range(Index lo, Index hi) {
  IndexList out;
  for (Index i = lo; i < hi; ++i) out.push_back(i);
  return out;
}

}  // namespace

TEST_CASE("feature sets are sorted and deduplicated") {
  FeatureSet s({5, 1, 3, 1, 5});
  CHECK(s.indices() == IndexList{1, 3, 5});
  CHECK(s.contains(3));
  CHECK_FALSE(s.contains(2));
  FeatureSet t({3, 4, 5});
  CHECK(s.intersect(t).indices() == IndexList{3, 5});
  CHECK(s.unite(t).indices() == IndexList{1, 3, 4, 5});
  CHECK(s.minus(t).indices() == IndexList{1});
}

TEST_CASE("observed features and shared set of the 2x3 layout") {
  const BlockLayout l = appca::testing::layout_2x3(4, 5);
  CHECK(validate_layout(l).empty());
  CHECK(observed_features(l, 0).indices() == range(0, 10));
  const IndexList v13 = [] {
    IndexList v = range(0, 5);
    for (Index i = 10; i < 15; ++i) v.push_back(i);
    return v;
  }();
  CHECK(observed_features(l, 1).indices() == v13);
  CHECK(shared_feature_set(l).indices() == range(0, 5));
}

TEST_CASE("3x3 cyclic layout has no global anchor") {
  const BlockLayout l = appca::testing::layout_3x3(3, 4);
  CHECK(observed_features(l, 1).indices() == range(4, 12));
  CHECK(shared_feature_set(l).empty());
  CHECK(shared_feature_set(l, {0, 1}).indices() == range(4, 8));
  CHECK(shared_feature_set(l, {0, 2}).indices() == range(0, 4));
}

TEST_CASE("single group observing everything") {
  const BlockLayout l = contiguous_layout(6, 3, {{true, true}});
  CHECK(observed_features(l, 0).indices() == range(0, 6));
  CHECK(shared_feature_set(l) == observed_features(l, 0));
}

TEST_CASE("layout diagnostics") {
  SUBCASE("overlapping groups") {
    BlockLayout l = appca::testing::layout_2x3(3, 2);
    l.groups[1][0] = 2;  // row 2 now in both groups, row 3 uncovered
    const auto d = validate_layout(l);
    CHECK(count_code(d, "overlapping_groups") == 1);
  }
  SUBCASE("orphan block") {
    BlockLayout l = appca::testing::layout_2x3(3, 2);
    l.indicator[1][2] = false;
    const auto d = validate_layout(l);
    CHECK(d.size() == 1);
    CHECK(count_code(d, "orphan_block") == 1);
  }
  SUBCASE("indicator shape") {
    BlockLayout l = appca::testing::layout_2x3(3, 2);
    l.indicator.pop_back();
    CHECK(count_code(validate_layout(l), "indicator_shape") == 1);
  }
  SUBCASE("index out of range") {
    BlockLayout l = appca::testing::layout_2x3(3, 2);
    l.blocks[0].push_back(99);
    CHECK(count_code(validate_layout(l), "index_out_of_range") >= 1);
  }
  SUBCASE("group observing nothing") {
    BlockLayout l = contiguous_layout(2, 2, {{true, true}, {false, false}});
    CHECK(count_code(validate_layout(l), "group_observes_nothing") == 1);
  }
  SUBCASE("require throws") {
    BlockLayout l = appca::testing::layout_2x3(3, 2);
    l.indicator[1][2] = false;
    CHECK_THROWS_AS(require_valid_layout(l), DomainError);
  }
}

TEST_CASE("shared set is contained in every observed set (property)") {
  Gen gen(11);
  for (int trial = 0; trial < 100; ++trial) {
    const auto G = static_cast<std::size_t>(gen.integer(1, 4));
    const auto B = static_cast<std::size_t>(gen.integer(1, 4));
    std::vector<std::vector<bool>> ind(G, std::vector<bool>(B, false));
    for (auto& row : ind)
      for (std::size_t b = 0; b < B; ++b) row[b] = gen.uniform(0, 1) < 0.6;
    for (std::size_t g = 0; g < G; ++g) ind[g][g % B] = true;
    for (std::size_t b = 0; b < B; ++b) ind[b % G][b] = true;
    const BlockLayout l = contiguous_layout(2, 3, ind);
    REQUIRE(validate_layout(l).empty());
    const FeatureSet t = shared_feature_set(l);
    CHECK(t == shared_feature_set(l));
    for (std::size_t g = 0; g < G; ++g) {
      const FeatureSet v = observed_features(l, g);
      CHECK(t.size() <= v.size());
      CHECK(t.intersect(v) == t);
    }
  }
}

TEST_CASE("masked matrix masks unobserved blocks") {
  const BlockLayout l = appca::testing::layout_2x3(2, 2);
  Eigen::MatrixXd v = Eigen::MatrixXd::Ones(4, 6);
  const MaskedMatrix x(v, l);
  for (Index i = 0; i < 4; ++i)
    for (Index j = 0; j < 6; ++j) CHECK(std::isnan(x.values()(i, j)) == !x.is_observed(i, j));
  CHECK_FALSE(x.is_observed(0, 5));
  CHECK(x.is_observed(2, 5));
  CHECK(x.group_submatrix(0).cols() == 4);
  CHECK_THROWS_AS(x.observed_block({0}, {5}), DomainError);

  v(0, 0) = std::nan("");
  CHECK_THROWS_AS(MaskedMatrix(v, l), DataError);
  Eigen::MatrixXd masked_nan = Eigen::MatrixXd::Ones(4, 6);
  masked_nan(0, 5) = std::nan("");
  CHECK_NOTHROW(MaskedMatrix(masked_nan, l));
  CHECK_THROWS_AS(MaskedMatrix(Eigen::MatrixXd::Ones(4, 5), l), DomainError);
}

TEST_CASE("non-contiguous groups and blocks") {
  BlockLayout l;
  l.n = 4;
  l.p = 4;
  l.groups = {{0, 2}, {1, 3}};
  l.blocks = {{1, 3}, {0, 2}};
  l.indicator = {{true, true}, {true, false}};
  CHECK(validate_layout(l).empty());
  CHECK(shared_feature_set(l).indices() == IndexList{1, 3});
  Gen gen(3);
  const MaskedMatrix x(gen.matrix(4, 4), l);
  CHECK(std::isnan(x.values()(1, 0)));
  CHECK(std::isnan(x.values()(3, 2)));
  CHECK_FALSE(std::isnan(x.values()(1, 1)));
}
