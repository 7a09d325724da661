#include <gtest/gtest.h>

#include <random>

#include "maxcorr/dataset.hpp"
#include "maxcorr/error.hpp"
#include "maxcorr/stats.hpp"
#include "test_data.hpp"

namespace maxcorr {
namespace {

using testing::make_dataset;

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected maxcorr::Error";
  return ErrorKind::nonconvergence;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

const RoleMap kRoles = {{"x1", Side::x}, {"x2", Side::x}, {"y1", Side::y}};

TEST(Csv, LoadsFiveRows) {
  const auto ds = parse_csv("x1,x2,y1\n1,2,3\n2,1,4\n3,5,1\n4,4,4\n5,0,2\n", kRoles);
  EXPECT_EQ(ds.n_rows(), 5u);
  EXPECT_EQ(ds.n_active(Side::x), 2u);
  EXPECT_EQ(ds.n_active(Side::y), 1u);
  EXPECT_EQ(ds.column("x2").values[2], 5.0);
}

TEST(Csv, NonNumericCellNamesRowAndColumn) {
  const auto text = "x1,x2,y1\n1,2,3\n2,1,4\nabc,5,1\n4,4,4\n";
  EXPECT_EQ(kind_of([&] { parse_csv(text, kRoles); }), ErrorKind::data);
  const auto msg = message_of([&] { parse_csv(text, kRoles); });
  EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("x1"), std::string::npos) << msg;
}

TEST(Csv, TooFewRows) {
  const auto msg = message_of([] { parse_csv("x1,x2,y1\n1,2,3\n2,1,4\n", kRoles); });
  EXPECT_NE(msg.find("too few rows"), std::string::npos) << msg;
}

TEST(Csv, MissingCellAndRaggedRowsRejected) {
  EXPECT_EQ(kind_of([] { parse_csv("x1,x2,y1\n1,,3\n2,1,4\n3,3,3\n", kRoles); }), ErrorKind::data);
  EXPECT_EQ(kind_of([] { parse_csv("x1,x2,y1\n1,2\n2,1,4\n3,3,3\n", kRoles); }), ErrorKind::data);
}

TEST(Csv, RolesMustCoverHeader) {
  EXPECT_EQ(kind_of([] { parse_csv("x1,x2,y1,z\n1,2,3,4\n2,1,4,4\n3,3,3,1\n", kRoles); }),
            ErrorKind::config);
  EXPECT_EQ(kind_of([] { parse_csv("x1,y1\n1,3\n2,4\n3,3\n", kRoles); }), ErrorKind::config);
}

TEST(Dataset, ConstantColumnsAreExcludedFromComposites) {
  const auto ds = make_dataset({{1, 2, 3, 4}, {5, 5, 5, 5}}, {{2, 1, 4, 3}});
  EXPECT_EQ(ds.n_active(Side::x), 1u);
  ASSERT_EQ(ds.excluded().size(), 1u);
  EXPECT_EQ(ds.excluded()[0], "x2");
}

TEST(Derived, Square) {
  const auto ds = make_dataset({{1, 2, 3}}, {{3, 1, 2}});
  const std::string src[] = {"x1"};
  const auto out = add_derived(ds, TransformKind::square, src, "x1sq");
  EXPECT_EQ(out.column("x1sq").values, (std::vector<double>{1, 4, 9}));
  EXPECT_EQ(out.column("x1sq").side, Side::x);
  ASSERT_TRUE(out.column("x1sq").lineage);
  EXPECT_EQ(out.column("x1sq").lineage->kind, TransformKind::square);
}

TEST(Derived, Shift) {
  const auto ds = make_dataset({{1, 2, 4}}, {{-5, 0, 5}});
  const std::string src[] = {"y1"};
  const auto out = add_derived(ds, TransformKind::shift, src, "y1s", 10.0);
  EXPECT_EQ(out.column("y1s").values, (std::vector<double>{5, 10, 15}));
  EXPECT_EQ(out.column("y1s").side, Side::y);
}

TEST(Derived, Product) {
  const auto ds = make_dataset({{1, 2, 3}, {2, 2, 2}}, {{3, 1, 2}});
  const std::string src[] = {"x1", "x2"};
  const auto out = add_derived(ds, TransformKind::product, src, "p");
  EXPECT_EQ(out.column("p").values, (std::vector<double>{2, 4, 6}));
}

TEST(Derived, LogOfNonPositiveIsDataError) {
  const auto ds = make_dataset({{1, 0, 3}}, {{3, 1, 2}});
  const std::string src[] = {"x1"};
  EXPECT_EQ(kind_of([&] { add_derived(ds, TransformKind::log, src, "lx"); }), ErrorKind::data);
}

TEST(Derived, ProductAcrossSidesRejected) {
  const auto ds = make_dataset({{1, 2, 3}}, {{3, 1, 2}});
  const std::string src[] = {"x1", "y1"};
  EXPECT_EQ(kind_of([&] { add_derived(ds, TransformKind::product, src, "p"); }), ErrorKind::config);
}

TEST(SignFlip, NegatesInPlace) {
  const auto ds = make_dataset({{1, -2, 3}}, {{3, 1, 2}});
  const auto out = sign_flip(ds, "x1");
  EXPECT_EQ(out.column("x1").values, (std::vector<double>{-1, 2, -3}));
  EXPECT_EQ(out.columns().size(), ds.columns().size());
}

TEST(SignFlip, TwiceRestoresBitForBit) {
  const auto ds = testing::random_dataset(40, 3, 2, 11);
  for (const auto& col : ds.columns()) {
    const auto back = sign_flip(sign_flip(ds, col.name), col.name);
    EXPECT_EQ(back.column(col.name).values, col.values);
  }
}

TEST(Shift, ThereAndBackRestoresBitForBitForRepresentableConstants) {
  const auto ds = make_dataset({{1.5, -2.25, 3.0, 8.0}}, {{3, 1, 2, 0.5}});
  const std::string src[] = {"x1"};
  const auto up = add_derived(ds, TransformKind::shift, src, "u", 16.0);
  const std::string src2[] = {"u"};
  const auto down = add_derived(up, TransformKind::shift, src2, "d", -16.0);
  EXPECT_EQ(down.column("d").values, ds.column("x1").values);
}

TEST(Lineage, TermRecomputesNestedDerivations) {
  const auto ds = make_dataset({{1, 2, 3}, {4, 1, 2}}, {{3, 1, 2}});
  const std::string a[] = {"x1", "x2"};
  auto out = add_derived(ds, TransformKind::product, a, "p");
  const std::string b[] = {"p"};
  out = add_derived(out, TransformKind::square, b, "p2");
  out = sign_flip(out, "x1");
  const auto& term = *out.column("p2").term;
  EXPECT_EQ(term.inputs(), (std::vector<std::string>{"x1", "x2"}));
  for (std::size_t r = 0; r < 3; ++r) {
    const std::map<std::string, double, std::less<>> row = {
        {"x1", ds.column("x1").values[r]}, {"x2", ds.column("x2").values[r]}};
    EXPECT_DOUBLE_EQ(term.evaluate(row), out.column("p2").values[r]);
  }
  const std::map<std::string, double, std::less<>> flipped = {{"x1", 5.0}};
  EXPECT_DOUBLE_EQ(out.column("x1").term->evaluate(flipped), -5.0);
}

TEST(Immutability, OperationsLeaveInputUntouched) {
  const auto ds = testing::random_dataset(20, 2, 2, 3);
  std::vector<std::vector<double>> before;
  for (const auto& c : ds.columns()) before.push_back(c.values);
  const std::string src[] = {"x1"};
  (void)add_derived(ds, TransformKind::square, src, "sq");
  (void)sign_flip(ds, "y2");
  (void)apply_derived(ds, std::vector<DerivedSpec>{{TransformKind::shift, {"x2"}, "s", 3.0}});
  ASSERT_EQ(ds.columns().size(), before.size());
  for (std::size_t i = 0; i < before.size(); ++i) EXPECT_EQ(ds.columns()[i].values, before[i]);
}

// Shifting one column moves its composite by a constant, which leaves
// every correlation alone.
TEST(Property, ShiftingAColumnLeavesCorrelationUnchanged) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 30; ++trial) {
    const auto ds = testing::random_dataset(25, 3, 2, 1000 + trial);
    WeightPair w{Eigen::VectorXd(3), Eigen::VectorXd(2)};
    for (auto& v : w.a) v = normal(rng);
    for (auto& v : w.b) v = normal(rng);
    const double r0 = correlation_of_weights(ds, w);
    for (const auto& col : ds.columns()) {
      const double c = 40.0 * normal(rng);
      std::vector<Column> cols(ds.columns().begin(), ds.columns().end());
      for (auto& cc : cols) {
        if (cc.name == col.name) {
          for (auto& v : cc.values) v += c;
        }
      }
      EXPECT_NEAR(correlation_of_weights(Dataset(cols), w), r0, 1e-10);
    }
  }
}

}  // namespace
}  // namespace maxcorr
