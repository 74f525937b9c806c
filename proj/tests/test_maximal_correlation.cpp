#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nlbox/maximal_correlation.hpp"
#include "nlbox/rng.hpp"
#include "nlbox/sampling.hpp"

using namespace nlbox;

namespace {

JointDistribution q_eta(double eta) {
  Eigen::MatrixXd p(2, 2);
  p << (1 + eta) / 4, (1 - eta) / 4, (1 - eta) / 4, (1 + eta) / 4;
  return JointDistribution(p);
}

JointDistribution random_product(int a_card, int b_card, Rng& rng) {
  Eigen::VectorXd pa(a_card), pb(b_card);
  for (int a = 0; a < a_card; ++a) pa(a) = rng.exponential();
  for (int b = 0; b < b_card; ++b) pb(b) = rng.exponential();
  pa /= pa.sum();
  pb /= pb.sum();
  return JointDistribution(pa * pb.transpose());
}

}  // namespace

TEST_CASE("rho of named distributions") {
  Rng rng(3);
  // independence
  for (int trial = 0; trial < 20; ++trial)
    CHECK(rho(random_product(3, 4, rng)).rho < 1e-9);

  // correlated bits with noise
  for (double eta : {0.0, 0.1, 0.5, 0.9, 1.0})
    CHECK(rho(q_eta(eta)).rho == doctest::Approx(eta).epsilon(1e-12));

  // common data
  Eigen::MatrixXd common(2, 2);
  common << 0.5, 0.0, 0.0, 0.5;
  CHECK(rho(JointDistribution(common)).rho == doctest::Approx(1.0));
}

TEST_CASE("optimizers satisfy the normalization constraints") {
  Rng rng(5);
  for (int trial = 0; trial < 30; ++trial) {
    const JointDistribution d = random_distribution(3, 4, rng);
    const RhoResult r = rho(d);
    if (r.rho <= 0.0) continue;
    double ef = 0.0, eg = 0.0, ef2 = 0.0, eg2 = 0.0, efg = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 4; ++b) {
        const double p = d.probs()(a, b);
        ef += p * r.f(a);
        eg += p * r.g(b);
        ef2 += p * r.f(a) * r.f(a);
        eg2 += p * r.g(b) * r.g(b);
        efg += p * r.f(a) * r.g(b);
      }
    CHECK(std::abs(ef) < 1e-9);
    CHECK(std::abs(eg) < 1e-9);
    CHECK(ef2 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(eg2 == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(efg == doctest::Approx(r.rho).epsilon(1e-9));
  }
}

TEST_CASE("degenerate marginals collapse to rho zero") {
  Eigen::MatrixXd p(2, 3);
  p << 0.2, 0.5, 0.3, 0.0, 0.0, 0.0;  // A-side support is a single symbol
  const RhoResult r = rho(JointDistribution(p));
  CHECK(r.rho == 0.0);
}

TEST_CASE("binary closed form") {
  for (double eta : {0.0, 0.3, 0.8})
    CHECK(rho_binary_closed_form(q_eta(eta)) == doctest::Approx(eta));

  // zeta = alpha beta gives zero
  Eigen::MatrixXd p(2, 2);
  const double alpha = 0.4, beta = -0.2, zeta = alpha * beta;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      const double sa = a ? -1 : 1, sb = b ? -1 : 1;
      p(a, b) = 0.25 * (1 + sa * alpha + sb * beta + sa * sb * zeta);
    }
  CHECK(rho_binary_closed_form(JointDistribution(p)) == doctest::Approx(0.0));

  // |alpha| = 1 hits the 0/0 convention
  Eigen::MatrixXd degenerate(2, 2);
  degenerate << 0.6, 0.4, 0.0, 0.0;
  CHECK(rho_binary_closed_form(JointDistribution(degenerate)) == 0.0);

  Rng rng(1);
  CHECK_THROWS_AS(rho_binary_closed_form(random_product(3, 2, rng)), std::invalid_argument);
}

TEST_CASE("closed form agrees with the spectral value on random binary tables") {
  Rng rng(7);
  for (int trial = 0; trial < 500; ++trial) {
    const JointDistribution d = random_distribution(2, 2, rng);
    CHECK(std::abs(rho_binary_closed_form(d) - rho(d).rho) < 1e-10);
  }
}

TEST_CASE("rho is zero iff the distribution is a product") {
  Rng rng(11);
  for (int trial = 0; trial < 30; ++trial) {
    const JointDistribution d = random_distribution(3, 3, rng);
    const double r = rho(d).rho;
    double max_dev = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        max_dev = std::max(max_dev,
                           std::abs(d.probs()(a, b) - d.marginal_a()(a) * d.marginal_b()(b)));
    if (r < 1e-9) CHECK(max_dev < 1e-7);
    if (max_dev > 1e-3) CHECK(r > 1e-9);
  }
}

TEST_CASE("tensorization of rho") {
  Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    const JointDistribution p = random_distribution(2, 3, rng);
    const JointDistribution q = random_distribution(3, 2, rng);
    const double expected = std::max(rho(p).rho, rho(q).rho);
    CHECK(rho(product(p, q)).rho == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("data processing never increases rho") {
  Rng rng(17);
  for (int trial = 0; trial < 30; ++trial) {
    const JointDistribution d = random_distribution(3, 3, rng);
    const Eigen::MatrixXd ka = random_stochastic_map(2, 3, rng);
    const Eigen::MatrixXd kb = random_stochastic_map(4, 3, rng);
    const JointDistribution mapped = apply_local_maps(d, ka, kb);
    CHECK(rho(mapped).rho <= rho(d).rho + 1e-9);
  }
}

TEST_CASE("variational form reproduces rho squared") {
  // max Var_B E_{A|B}[f] / Var[f] over functions f of A equals rho^2; the
  // spectral optimizer f attains it.
  Rng rng(19);
  for (int trial = 0; trial < 20; ++trial) {
    const JointDistribution d = random_distribution(3, 3, rng);
    const RhoResult r = rho(d);
    if (r.rho < 1e-6) continue;
    Eigen::MatrixXd f_ab = Eigen::MatrixXd::Zero(3, 3);
    for (int a = 0; a < 3; ++a) f_ab.row(a).setConstant(r.f(a));
    const Eigen::VectorXd cond = conditional_mean_given_b(d, f_ab);
    double var_cond = 0.0;
    for (int b = 0; b < 3; ++b) var_cond += d.marginal_b()(b) * cond(b) * cond(b);
    const double var_f = expectation(d, f_ab.cwiseProduct(f_ab));
    CHECK(var_cond / var_f == doctest::Approx(r.rho * r.rho).epsilon(1e-8));
  }
}

TEST_CASE("rho of boxes") {
  for (double eta : {0.0, 0.4, 0.8, 1.0})
    CHECK(rho_box(isotropic_box(eta)).rho == doctest::Approx(eta).epsilon(1e-12));

  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const NoSignalingBox box = random_box(2, 2, 2, 2, rng);
    double best = 0.0;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        best = std::max(best, rho_binary_closed_form(conditional_joint(box, x, y)));
    const BoxRho r = rho_box(box);
    CHECK(r.rho == doctest::Approx(best).epsilon(1e-9));
    // reported argmax attains the maximum
    CHECK(rho(conditional_joint(box, r.x, r.y)).rho == doctest::Approx(r.rho));
  }
}

TEST_CASE("joint with inputs") {
  Rng rng(29);
  const NoSignalingBox box = random_box(2, 2, 2, 2, rng);

  // deterministic inputs reduce to the conditional joint
  Eigen::MatrixXd det = Eigen::MatrixXd::Zero(2, 2);
  det(1, 0) = 1.0;
  const double direct = rho(conditional_joint(box, 1, 0)).rho;
  CHECK(rho(joint_with_inputs(box, JointDistribution(det))).rho ==
        doctest::Approx(direct).epsilon(1e-9));

  // bounds from the two-step argument
  for (int trial = 0; trial < 40; ++trial) {
    const NoSignalingBox b = random_box(2, 2, 2, 2, rng);
    const JointDistribution q_xy = random_distribution(2, 2, rng);
    const JointDistribution joint = joint_with_inputs(b, q_xy);
    const double rho_joint = rho(joint).rho;
    const double bound = std::max(rho(q_xy).rho, rho_box(b).rho);
    CHECK(rho_joint <= bound + 1e-9);

    // marginal of (A, B) from the joint, for the lower bound
    Eigen::MatrixXd pab = Eigen::MatrixXd::Zero(2, 2);
    for (int a = 0; a < 2; ++a)
      for (int x = 0; x < 2; ++x)
        for (int b2 = 0; b2 < 2; ++b2)
          for (int y = 0; y < 2; ++y)
            pab(a, b2) += joint.probs()(a * 2 + x, b2 * 2 + y);
    CHECK(rho(JointDistribution(pab)).rho <= rho_joint + 1e-9);
  }
}
