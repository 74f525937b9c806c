#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nlbox/box.hpp"
#include "nlbox/rng.hpp"
#include "nlbox/sampling.hpp"

using namespace nlbox;

TEST_CASE("isotropic boxes validate across the whole parameter range") {
  for (int k = 0; k <= 100; ++k) {
    const double eta = k / 100.0;
    const NoSignalingBox box = isotropic_box(eta);
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            const double expected =
                ((a ^ b) == (x & y)) ? (1.0 + eta) / 4.0 : (1.0 - eta) / 4.0;
            CHECK(box.prob(x, y, a, b) == doctest::Approx(expected));
          }
  }
  CHECK_THROWS_AS(isotropic_box(1.5), std::invalid_argument);
  CHECK_THROWS_AS(isotropic_box(-0.1), std::invalid_argument);
}

TEST_CASE("eta extremes") {
  const NoSignalingBox noise = isotropic_box(0.0);
  for (int xy = 0; xy < 4; ++xy)
    CHECK(noise.conditional(xy / 2, xy % 2).maxCoeff() == doctest::Approx(0.25));
  const NoSignalingBox pr = isotropic_box(1.0);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      CHECK(pr.conditional(x, y).maxCoeff() == doctest::Approx(0.5));
      CHECK(pr.conditional(x, y).minCoeff() == doctest::Approx(0.0));
    }
}

TEST_CASE("validation flags constructed violations") {
  // local deterministic box a = x, b = y is valid
  std::vector<Eigen::MatrixXd> det(4, Eigen::MatrixXd::Zero(2, 2));
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) det[x * 2 + y](x, y) = 1.0;
  CHECK(NoSignalingBox::validate(2, 2, 2, 2, det).ok());

  // perturb p(a | x, y=1) only: signaling of magnitude ~1e-3
  std::vector<Eigen::MatrixXd> sig(4, Eigen::MatrixXd::Constant(2, 2, 0.25));
  sig[0 * 2 + 1](0, 0) -= 1e-3;
  sig[0 * 2 + 1](1, 0) += 1e-3;
  const BoxValidation v = NoSignalingBox::validate(2, 2, 2, 2, sig);
  CHECK(!v.ok());
  REQUIRE(v.issues.size() >= 1);
  CHECK(v.issues[0].kind == BoxIssue::Kind::Signaling);
  CHECK(v.worst == doctest::Approx(1e-3).epsilon(1e-6));

  // normalization deficit
  std::vector<Eigen::MatrixXd> unnorm = det;
  unnorm[3](1, 1) = 0.8;
  const BoxValidation nv = NoSignalingBox::validate(2, 2, 2, 2, unnorm);
  CHECK(!nv.ok());
  bool found = false;
  for (const auto& issue : nv.issues)
    if (issue.kind == BoxIssue::Kind::NotNormalized && issue.magnitude == doctest::Approx(0.2))
      found = true;
  CHECK(found);

  // negative entry
  std::vector<Eigen::MatrixXd> neg = det;
  neg[0](0, 0) = 1.2;
  neg[0](0, 1) = -0.2;
  const BoxValidation gv = NoSignalingBox::validate(2, 2, 2, 2, neg);
  bool found_neg = false;
  for (const auto& issue : gv.issues)
    if (issue.kind == BoxIssue::Kind::NegativeEntry) found_neg = true;
  CHECK(found_neg);
}

TEST_CASE("chsh of isotropic boxes") {
  CHECK(chsh_value(isotropic_box(0.0)) == doctest::Approx(0.5));
  CHECK(chsh_value(isotropic_box(1.0)) == doctest::Approx(1.0));
  for (double eta : {0.25, 0.5, 1.0 / std::sqrt(2.0), 0.9})
    CHECK(chsh_value(isotropic_box(eta)) == doctest::Approx((1.0 + eta) / 2.0).epsilon(1e-14));
}

TEST_CASE("chsh is linear in mixtures") {
  Rng rng(41);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<NoSignalingBox> parts{random_box(2, 2, 2, 2, rng), random_box(2, 2, 2, 2, rng),
                                      random_box(2, 2, 2, 2, rng)};
    const Eigen::VectorXd w = rng.dirichlet(3);
    const NoSignalingBox mixed = mix_boxes(parts, w);
    double expected = 0.0;
    for (int r = 0; r < 3; ++r) expected += w(r) * chsh_value(parts[r]);
    CHECK(chsh_value(mixed) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("mix edge cases") {
  const NoSignalingBox pr = isotropic_box(1.0);
  const NoSignalingBox one = mix_boxes({pr}, Eigen::VectorXd::Ones(1));
  for (int xy = 0; xy < 4; ++xy)
    CHECK((one.conditional(xy / 2, xy % 2) - pr.conditional(xy / 2, xy % 2)).cwiseAbs().maxCoeff() <
          1e-15);

  const NoSignalingBox half = mix_boxes({isotropic_box(1.0), isotropic_box(0.0)},
                                        Eigen::Vector2d(0.5, 0.5));
  const NoSignalingBox direct = isotropic_box(0.5);
  for (int xy = 0; xy < 4; ++xy)
    CHECK((half.conditional(xy / 2, xy % 2) - direct.conditional(xy / 2, xy % 2))
              .cwiseAbs()
              .maxCoeff() < 1e-15);

  CHECK_THROWS_AS(mix_boxes({pr}, Eigen::Vector2d(0.5, 0.5)), std::invalid_argument);
}

TEST_CASE("binary parameter round trip") {
  Rng rng(43);
  for (int trial = 0; trial < 50; ++trial) {
    const NoSignalingBox box = random_box(2, 2, 2, 2, rng);
    const BinaryBoxParams p = binary_params_of(box);
    CHECK(binary_params_feasible(p));
    const NoSignalingBox back = box_from_binary_params(p);
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y)
        CHECK((back.conditional(x, y) - box.conditional(x, y)).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("binary parameters of named boxes") {
  // PR_eta: alpha = beta = 0, zeta_xy = (-1)^(xy) eta
  const BinaryBoxParams p = binary_params_of(isotropic_box(0.7));
  CHECK(p.alpha.cwiseAbs().maxCoeff() < 1e-15);
  CHECK(p.beta.cwiseAbs().maxCoeff() < 1e-15);
  CHECK(p.zeta(0, 0) == doctest::Approx(0.7));
  CHECK(p.zeta(0, 1) == doctest::Approx(0.7));
  CHECK(p.zeta(1, 0) == doctest::Approx(0.7));
  CHECK(p.zeta(1, 1) == doctest::Approx(-0.7));

  // all parameters zero -> uniform box
  BinaryBoxParams zero;
  zero.alpha.setZero();
  zero.beta.setZero();
  zero.zeta.setZero();
  const NoSignalingBox uniform = box_from_binary_params(zero);
  for (int xy = 0; xy < 4; ++xy)
    CHECK(uniform.conditional(xy / 2, xy % 2).maxCoeff() == doctest::Approx(0.25));

  // alpha_0 = 1 forces zeta_0y = beta_y
  BinaryBoxParams pinned;
  pinned.alpha << 1.0, 0.2;
  pinned.beta << 0.3, -0.4;
  pinned.zeta << 0.3, -0.4, 0.1, 0.0;
  const NoSignalingBox ok = box_from_binary_params(pinned);
  CHECK(binary_params_of(ok).zeta(0, 0) == doctest::Approx(0.3));
  BinaryBoxParams broken = pinned;
  broken.zeta(0, 0) = 0.5;  // outside the degenerate range
  CHECK_THROWS_AS(box_from_binary_params(broken), std::invalid_argument);
}

TEST_CASE("conditional joints of isotropic boxes") {
  const double eta = 0.6;
  const NoSignalingBox box = isotropic_box(eta);
  // xy = 0: mass (1+eta)/4 on the diagonal
  const JointDistribution q00 = conditional_joint(box, 0, 0);
  CHECK(q00.probs()(0, 0) == doctest::Approx((1 + eta) / 4));
  CHECK(q00.probs()(0, 1) == doctest::Approx((1 - eta) / 4));
  // xy = 1: anti-aligned
  const JointDistribution q11 = conditional_joint(box, 1, 1);
  CHECK(q11.probs()(0, 0) == doctest::Approx((1 - eta) / 4));
  CHECK(q11.probs()(1, 0) == doctest::Approx((1 + eta) / 4));
  CHECK_THROWS_AS(conditional_joint(box, 2, 0), std::out_of_range);
}

TEST_CASE("random boxes always validate and have input-independent marginals") {
  Rng rng(47);
  for (int trial = 0; trial < 50; ++trial) {
    const NoSignalingBox box = random_box(2, 2, 2, 2, rng);
    for (int x = 0; x < 2; ++x) {
      const Eigen::VectorXd ma = box.marginal_a(x);
      for (int y = 0; y < 2; ++y)
        CHECK((box.conditional(x, y).rowwise().sum() - ma).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
  // non-binary shapes stay valid too
  for (int trial = 0; trial < 10; ++trial) {
    const NoSignalingBox box = random_box(3, 2, 2, 4, rng);
    CHECK(box.a_card() == 2);
    CHECK(box.b_card() == 4);
  }
}
