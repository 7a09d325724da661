#include <gtest/gtest.h>

#include <cmath>

#include "maxcorr/error.hpp"
#include "maxcorr/serialize.hpp"
#include "test_data.hpp"

namespace maxcorr {
namespace {

namespace io = maxcorr::json;
using nlohmann::json;

Dataset with_constant_column() {
  auto ds = testing::random_dataset(10, 2, 2, 1);
  std::vector<Column> cols(ds.columns().begin(), ds.columns().end());
  cols.push_back(testing::make_column("xc", Side::x, std::vector<double>(10, 4.0)));
  return Dataset(cols);
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected maxcorr::Error";
  return ErrorKind::nonconvergence;
}

TEST(WeightIndex, ResolvesNamesAndRejectsBadOnes) {
  const auto ds = with_constant_column();
  EXPECT_EQ(io::weight_index(ds, "a.x2"), 1);
  EXPECT_EQ(io::weight_index(ds, "b.y1"), 2);
  EXPECT_EQ(kind_of([&] { io::weight_index(ds, "b.x1"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([&] { io::weight_index(ds, "a.zz"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([&] { io::weight_index(ds, "a.xc"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([&] { io::weight_index(ds, "x1"); }), ErrorKind::config);
}

TEST(Constraints, Parse) {
  const auto ds = with_constant_column();
  const auto cons = io::parse_constraints(
      json::parse(R"([{"coeffs": {"b.y1": 1, "b.y2": -1}, "relation": ">=", "rhs": 0},
                      {"coeffs": {"a.x1": 2}, "relation": "<=", "rhs": 5}])"),
      ds);
  ASSERT_EQ(cons.size(), 2u);
  EXPECT_EQ(cons[0].coeffs, (Eigen::VectorXd(4) << 0, 0, 1, -1).finished());
  EXPECT_EQ(cons[0].relation, Relation::ge);
  EXPECT_EQ(cons[1].relation, Relation::le);
  EXPECT_EQ(cons[1].rhs, 5.0);
}

TEST(Constraints, RejectMalformedInput) {
  const auto ds = with_constant_column();
  for (const char* text : {
           R"({"coeffs": {"a.x1": 1}})",
           R"([{"coeffs": {"a.x1": 1}, "relation": ">", "rhs": 0}])",
           R"([{"coeffs": {"a.x1": 1}, "relation": ">=", "rhs": 0, "extra": 1}])",
           R"([{"coeffs": {"a.x1": 0}, "relation": ">=", "rhs": 0}])",
           R"([{"coeffs": {}, "relation": ">=", "rhs": 0}])",
           R"([{"coeffs": {"a.x1": "one"}, "relation": ">=", "rhs": 0}])",
       }) {
    EXPECT_EQ(kind_of([&] { io::parse_constraints(json::parse(text), ds); }), ErrorKind::config) << text;
  }
}

TEST(Normalization, RoundTrip) {
  const auto ds = with_constant_column();
  for (const auto& norm : {Normalization::fix(3, 2.5), Normalization::sum_to_one(Side::x),
                           Normalization::sum_to_one(Side::y)}) {
    const auto back = io::parse_normalization(io::normalization(ds, norm), ds);
    EXPECT_EQ(back.kind, norm.kind);
    EXPECT_EQ(back.index, norm.index);
    EXPECT_EQ(back.value, norm.value);
    EXPECT_EQ(back.side, norm.side);
  }
  EXPECT_EQ(kind_of([&] { io::parse_normalization(json::parse(R"({"fix": "a.x1", "sum_to_one": "a"})"), ds); }),
            ErrorKind::config);
  EXPECT_EQ(kind_of([&] { io::parse_normalization(json::parse(R"({"sum_to_one": "c"})"), ds); }),
            ErrorKind::config);
}

TEST(ExpandedModel, RoundTripKeepsTermsAndValues) {
  auto ds = testing::correlated_dataset(20, 2, 1, 3);
  const std::string src[] = {"x1"};
  ds = add_derived(ds, TransformKind::shift, src, "x1s", 2.5);
  const std::string src2[] = {"x1s"};
  ds = add_derived(ds, TransformKind::log, src2, "lx", 0.0);
  ds = sign_flip(ds, "x2");
  const WeightPair w{(Eigen::VectorXd(4) << 1.0, -2.0, 0.5, 0.25).finished(), Eigen::VectorXd::Ones(1)};
  const auto model = expand(regress_y_on_x(ds, w), w, ds, 0.42);
  const auto text = io::expanded_model(model).dump();
  const auto back = io::parse_expanded_model(json::parse(text));
  EXPECT_EQ(io::expanded_model(back).dump(), text);
  const InputRow row = {{"x1", 1.5}, {"x2", -0.5}};
  // Coefficients come back in key order, so the sum may round differently.
  EXPECT_NEAR(predict_expected_y(back, row), predict_expected_y(model, row), 1e-12);
}

TEST(Number, NonFiniteBecomesNull) {
  EXPECT_TRUE(io::number(std::nan("")).is_null());
  EXPECT_TRUE(io::number(INFINITY).is_null());
  EXPECT_EQ(io::number(1.5).get<double>(), 1.5);
}

TEST(FitResult, CarriesStatusAndWeights) {
  const auto ds = testing::correlated_dataset(30, 2, 2, 8);
  const auto res = maximize(ds, {}, Normalization::fix(0), {});
  const auto j = io::fit_result(ds, res);
  EXPECT_EQ(j.at("status"), "optimal");
  EXPECT_EQ(j.at("correlation").get<double>(), res.correlation);
  EXPECT_EQ(j.at("weights").at("a").at("x1").get<double>(), res.weights.a(0));
  EXPECT_EQ(j.at("weights").at("b").at("y2").get<double>(), res.weights.b(1));
}

}  // namespace
}  // namespace maxcorr
