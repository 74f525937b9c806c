#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nlbox/prob.hpp"
#include "nlbox/rng.hpp"
#include "nlbox/sampling.hpp"

using namespace nlbox;

namespace {

TableDistribution random_table(const std::vector<TableDistribution::Variable>& vars, Rng& rng) {
  std::int64_t total = 1;
  for (const auto& v : vars) total *= v.card;
  Eigen::VectorXd p(total);
  for (std::int64_t i = 0; i < total; ++i) p(i) = rng.exponential();
  p /= p.sum();
  return TableDistribution(vars, std::move(p));
}

}  // namespace

TEST_CASE("entropy of basic distributions") {
  const double ln2 = std::log(2.0);
  TableDistribution uniform({{"a", 2}}, Eigen::Vector2d(0.5, 0.5));
  CHECK(entropy(uniform, {"a"}) == doctest::Approx(ln2));

  TableDistribution point({{"a", 3}}, Eigen::Vector3d(1.0, 0.0, 0.0));
  CHECK(entropy(point, {"a"}) == doctest::Approx(0.0));

  TableDistribution pair({{"a", 2}, {"b", 2}}, Eigen::Vector4d(0.25, 0.25, 0.25, 0.25));
  CHECK(entropy(pair, {"a"}) == doctest::Approx(ln2));
  CHECK(entropy(pair) == doctest::Approx(2 * ln2));
}

TEST_CASE("entropy rejects unknown variables") {
  TableDistribution t({{"a", 2}}, Eigen::Vector2d(0.5, 0.5));
  CHECK_THROWS_AS(entropy(t, {"z"}), std::invalid_argument);
}

TEST_CASE("mutual information basics") {
  const double ln2 = std::log(2.0);
  // product of two fair bits
  TableDistribution prod({{"a", 2}, {"b", 2}}, Eigen::Vector4d(0.25, 0.25, 0.25, 0.25));
  CHECK(mutual_information(prod, {"a"}, {"b"}) == doctest::Approx(0.0));

  // perfectly correlated bits
  TableDistribution corr({{"a", 2}, {"b", 2}}, Eigen::Vector4d(0.5, 0.0, 0.0, 0.5));
  CHECK(mutual_information(corr, {"a"}, {"b"}) == doctest::Approx(ln2));

  CHECK_THROWS_AS(mutual_information(corr, {"a"}, {"a"}), std::invalid_argument);
}

TEST_CASE("chain rule holds on random tables") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = random_table({{"a", 3}, {"b", 2}, {"d", 2}, {"c", 2}}, rng);
    const double lhs = mutual_information(t, {"a"}, {"b", "d"}, {"c"});
    const double rhs =
        mutual_information(t, {"a"}, {"b"}, {"c"}) + mutual_information(t, {"a"}, {"d"}, {"b", "c"});
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("three orderings of the triple information agree") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = random_table({{"a", 2}, {"b", 3}, {"c", 2}, {"d", 2}}, rng);
    const double i1 = triple_information(t, {"a"}, {"b"}, {"c"}, {"d"});
    const double i2 = triple_information(t, {"a"}, {"c"}, {"b"}, {"d"});
    const double i3 = triple_information(t, {"b"}, {"c"}, {"a"}, {"d"});
    CHECK(i1 == doctest::Approx(i2).epsilon(1e-10));
    CHECK(i1 == doctest::Approx(i3).epsilon(1e-10));
  }
}

TEST_CASE("data processing on random three-variable tables") {
  Rng rng(9);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = random_table({{"u", 3}, {"a", 2}, {"b", 2}}, rng);
    CHECK(mutual_information(t, {"u"}, {"a"}) <=
          mutual_information(t, {"u"}, {"a", "b"}) + 1e-12);
  }
}

TEST_CASE("marginalization preserves normalization and non-negativity") {
  Rng rng(13);
  const auto t = random_table({{"a", 4}, {"b", 3}, {"c", 2}}, rng);
  const auto m = t.marginal({"c", "a"});
  CHECK(m.probs().sum() == doctest::Approx(1.0));
  CHECK(m.probs().minCoeff() >= 0.0);
  CHECK(m.variables()[0].name == "c");
  CHECK(m.variables()[1].card == 4);
}

TEST_CASE("table entry cap is enforced") {
  std::vector<TableDistribution::Variable> vars;
  for (int k = 0; k < 8; ++k) vars.push_back({"v" + std::to_string(k), 16});
  Eigen::VectorXd p = Eigen::VectorXd::Zero(16);  // deliberately wrong size
  CHECK_THROWS_AS(TableDistribution(vars, p), std::invalid_argument);
}

TEST_CASE("conditional expectation and the law of total expectation") {
  Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    const JointDistribution d = random_distribution(3, 4, rng);
    Eigen::MatrixXd f(3, 4);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 4; ++b) f(a, b) = rng.gaussian();
    const Eigen::VectorXd ma = conditional_mean_given_a(d, f);
    const double total = (d.marginal_a().array() * ma.array()).sum();
    CHECK(total == doctest::Approx(expectation(d, f)).epsilon(1e-12));
  }
}

TEST_CASE("conditional expectation special forms") {
  Rng rng(19);
  const JointDistribution d = random_distribution(3, 3, rng);

  // constant functions stay constant
  const Eigen::MatrixXd c = Eigen::MatrixXd::Constant(3, 3, 2.5);
  CHECK((conditional_mean_given_a(d, c) - Eigen::VectorXd::Constant(3, 2.5)).norm() < 1e-12);

  // f depending only on a is returned as-is when conditioning on a
  Eigen::MatrixXd fa(3, 3);
  for (int a = 0; a < 3; ++a) fa.row(a).setConstant(a * 1.5 - 1.0);
  const Eigen::VectorXd ma = conditional_mean_given_a(d, fa);
  for (int a = 0; a < 3; ++a) CHECK(ma(a) == doctest::Approx(a * 1.5 - 1.0));

  // independent product distribution factorizes
  const JointDistribution pa = random_distribution(3, 1, rng);
  const JointDistribution pb = random_distribution(1, 3, rng);
  Eigen::MatrixXd prod_table = pa.marginal_a() * pb.marginal_b().transpose();
  const JointDistribution indep(prod_table);
  Eigen::MatrixXd g(3, 3);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) g(a, b) = (a + 1.0) * (b - 0.5);
  const Eigen::VectorXd mg = conditional_mean_given_a(indep, g);
  double eh = 0.0;
  for (int b = 0; b < 3; ++b) eh += indep.marginal_b()(b) * (b - 0.5);
  for (int a = 0; a < 3; ++a) CHECK(mg(a) == doctest::Approx((a + 1.0) * eh));
}

TEST_CASE("variance decomposition against brute-force summation") {
  Rng rng(23);
  for (int trial = 0; trial < 25; ++trial) {
    const JointDistribution d = random_distribution(3, 3, rng);
    Eigen::MatrixXd f(3, 3);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) f(a, b) = rng.gaussian();

    const VarianceDecomposition v = variance_decomposition(d, f);

    // brute force
    double mean = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) mean += d.probs()(a, b) * f(a, b);
    double total = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) total += d.probs()(a, b) * (f(a, b) - mean) * (f(a, b) - mean);
    CHECK(v.total == doctest::Approx(total).epsilon(1e-12));
    CHECK(v.total ==
          doctest::Approx(v.var_of_cond_mean_a + v.mean_of_cond_var_a).epsilon(1e-10));
    CHECK(v.total ==
          doctest::Approx(v.var_of_cond_mean_b + v.mean_of_cond_var_b).epsilon(1e-10));
    // total variance dominates both one-sided terms
    CHECK(v.total >= v.var_of_cond_mean_a - 1e-12);
    CHECK(v.total >= v.var_of_cond_mean_b - 1e-12);
  }
}

TEST_CASE("variance decomposition degenerate cases") {
  Rng rng(29);
  const JointDistribution d = random_distribution(3, 3, rng);
  const VarianceDecomposition vc =
      variance_decomposition(d, Eigen::MatrixXd::Constant(3, 3, 4.2));
  CHECK(vc.total == doctest::Approx(0.0));
  CHECK(vc.var_of_cond_mean_a == doctest::Approx(0.0));
  CHECK(vc.mean_of_cond_var_b == doctest::Approx(0.0));

  Eigen::MatrixXd fa(3, 3);
  for (int a = 0; a < 3; ++a) fa.row(a).setConstant(a * 2.0);
  const VarianceDecomposition va = variance_decomposition(d, fa);
  CHECK(va.mean_of_cond_var_a == doctest::Approx(0.0));
  CHECK(va.total == doctest::Approx(va.var_of_cond_mean_a).epsilon(1e-12));
}

TEST_CASE("joint distribution validates its input") {
  Eigen::MatrixXd bad(2, 2);
  bad << 0.5, 0.5, 0.25, 0.25;
  CHECK_THROWS_AS(JointDistribution{bad}, std::invalid_argument);
  Eigen::MatrixXd neg(2, 2);
  neg << 0.75, 0.5, -0.25, 0.0;
  CHECK_THROWS_AS(JointDistribution{neg}, std::invalid_argument);
}

TEST_CASE("tensor of tables multiplies independent groups") {
  TableDistribution s({{"a", 2}}, Eigen::Vector2d(0.3, 0.7));
  TableDistribution t({{"b", 2}}, Eigen::Vector2d(0.6, 0.4));
  const auto st = tensor(s, t);
  CHECK(st.prob(std::array{1, 0}) == doctest::Approx(0.42));
  CHECK(mutual_information(st, {"a"}, {"b"}) == doctest::Approx(0.0));
}

TEST_CASE("with_channel extends a table consistently") {
  Rng rng(31);
  const auto t = random_table({{"a", 2}, {"b", 3}}, rng);
  Eigen::MatrixXd rows(t.size(), 2);
  for (std::int64_t i = 0; i < t.size(); ++i) rows.row(i) = rng.dirichlet(2).transpose();
  const auto tu = with_channel(t, "u", 2, rows);
  CHECK(tu.probs().sum() == doctest::Approx(1.0));
  // marginal over u recovers the base table
  const auto back = tu.marginal({"a", "b"});
  for (int i = 0; i < 6; ++i) CHECK(back.probs()(i) == doctest::Approx(t.probs()(i)));
}
