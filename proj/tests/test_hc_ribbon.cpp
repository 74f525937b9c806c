#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nlbox/hc_ribbon.hpp"
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

JointDistribution common_bit() {
  Eigen::MatrixXd p(2, 2);
  p << 0.5, 0.0, 0.0, 0.5;
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

HcOptions fast_opts(std::uint64_t seed = 1) {
  HcOptions o;
  o.restarts = 12;
  o.seed = seed;
  return o;
}

}  // namespace

TEST_CASE("upsilon values") {
  Rng rng(3);
  const JointDistribution prod = random_product(3, 3, rng);
  CHECK(upsilon(prod, {1.0, 1.0}) == doctest::Approx(0.0));

  const JointDistribution d = random_distribution(3, 3, rng);
  CHECK(upsilon(d, {0.0, 0.0}) == doctest::Approx(-entropy(d)));

  // uniform bits with common data at (0.5, 0.5)
  CHECK(upsilon(common_bit(), {0.5, 0.5}) == doctest::Approx(0.0));
}

TEST_CASE("the triangle is never refuted") {
  Rng rng(5);
  for (int trial = 0; trial < 15; ++trial) {
    const JointDistribution d = random_distribution(2, 2, rng);
    const double l1 = rng.uniform01();
    const double l2 = rng.uniform01() * (1.0 - l1);
    CHECK(!hc_membership_channel(d, {l1, l2}, fast_opts(trial)).outside());
    if (l1 > 0.0 && l2 > 0.0)
      CHECK(!hc_membership_norms(d, {l1, l2}, fast_opts(trial)).outside());
  }
}

TEST_CASE("non-product distributions are refuted at (1,1)") {
  Rng rng(7);
  for (int trial = 0; trial < 15; ++trial) {
    const JointDistribution d = random_distribution(2, 2, rng);
    const double r = rho(d).rho;
    if (r < 0.05) continue;  // essentially product, the gap would be tiny
    const HcVerdict vc = hc_membership_channel(d, {1.0, 1.0}, fast_opts(trial));
    CHECK(vc.outside());
    CHECK(vc.has_channel_witness);
    const HcVerdict vn = hc_membership_norms(d, {1.0, 1.0}, fast_opts(trial));
    CHECK(vn.outside());
    CHECK(vn.has_norm_witness);
  }
}

TEST_CASE("certified channel witnesses survive independent re-evaluation") {
  Rng rng(11);
  for (int trial = 0; trial < 10; ++trial) {
    const JointDistribution d = random_distribution(2, 2, rng);
    const RibbonPoint pt{0.8 + 0.2 * rng.uniform01(), 0.8 + 0.2 * rng.uniform01()};
    const HcVerdict v = hc_membership_channel(d, pt, fast_opts(trial));
    if (!v.outside()) continue;
    // channel_objective is the direct mutual-information recomputation and
    // simultaneously the expected-upsilon gap of the witness decomposition
    const double g = channel_objective(d, pt, v.witness_channel);
    CHECK(g < -kHcTolerance);
    CHECK(-g == doctest::Approx(v.violation).epsilon(1e-10));

    // the envelope route: E_U[Upsilon(p_{AB|U})] - Upsilon(p_AB)
    const int u_card = static_cast<int>(v.witness_channel.cols());
    double gap = -upsilon(d, pt);
    for (int u = 0; u < u_card; ++u) {
      Eigen::MatrixXd joint(d.a_card(), d.b_card());
      for (int a = 0; a < d.a_card(); ++a)
        for (int b = 0; b < d.b_card(); ++b)
          joint(a, b) = d.probs()(a, b) * v.witness_channel(a * d.b_card() + b, u);
      const double pu = joint.sum();
      if (pu < 1e-14) continue;
      gap += pu * upsilon(JointDistribution(joint / pu, 1e-9), pt);
    }
    CHECK(gap == doctest::Approx(g).epsilon(1e-8));
  }
}

TEST_CASE("perfect correlation has exactly the triangle") {
  const JointDistribution cb = common_bit();
  // inside just below the line
  for (double l1 : {0.1, 0.5, 0.9}) {
    const double l2 = 1.0 - l1 - 1e-3;
    CHECK(!hc_membership_channel(cb, {l1, l2}, fast_opts()).outside());
    CHECK(!hc_membership_norms(cb, {l1, l2}, fast_opts()).outside());
  }
  // outside just above it
  const HcVerdict v = hc_membership_channel(cb, {0.6, 0.6}, fast_opts());
  CHECK(v.outside());
  CHECK(v.violation > 1e-3);
}

TEST_CASE("norms method rejects zero exponent parameters") {
  CHECK_THROWS_AS(hc_membership_norms(common_bit(), {0.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(hc_membership_norms(common_bit(), {0.5, 0.0}), std::invalid_argument);
  CHECK_NOTHROW(hc_membership_channel(common_bit(), {0.0, 0.5}, fast_opts()));
}

TEST_CASE("channel and norm certifiers agree on random queries") {
  Rng rng(13);
  int confident_disagreements = 0;
  int decisive = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const JointDistribution d = random_distribution(2, 2, rng);
    RibbonPoint pt{0.05 + 0.95 * rng.uniform01(), 0.05 + 0.95 * rng.uniform01()};
    const HcVerdict vc = hc_membership_channel(d, pt, fast_opts(trial));
    const HcVerdict vn = hc_membership_norms(d, pt, fast_opts(trial));
    const bool c_strong = vc.outside() && vc.violation > 1e-6;
    const bool n_strong = vn.outside() && vn.violation > 1e-6;
    if (c_strong || n_strong) ++decisive;
    if (c_strong && !vn.outside()) ++confident_disagreements;
    if (n_strong && !vc.outside()) ++confident_disagreements;
  }
  CHECK(confident_disagreements == 0);
  CHECK(decisive > 100);  // the sample is not vacuous
}

TEST_CASE("box-level membership of isotropic boxes") {
  const NoSignalingBox pr = isotropic_box(1.0);
  CHECK(!hc_membership_box(pr, {0.5, 0.5}, fast_opts()).verdict.outside());
  const HcBoxVerdict v = hc_membership_box(pr, {0.55, 0.55}, fast_opts());
  CHECK(v.verdict.outside());

  Rng rng(17);
  // product box: p(a|x) p(b|y)
  std::vector<Eigen::MatrixXd> cond(4);
  const Eigen::MatrixXd ka = random_stochastic_map(2, 2, rng);
  const Eigen::MatrixXd kb = random_stochastic_map(2, 2, rng);
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) cond[x * 2 + y] = ka.col(x) * kb.col(y).transpose();
  const NoSignalingBox prod_box(2, 2, 2, 2, std::move(cond));
  CHECK(!hc_membership_box(prod_box, {1.0, 1.0}, fast_opts()).verdict.outside());
}

TEST_CASE("tensorization: witnesses restrict to one factor") {
  Rng rng(19);
  int restricted = 0;
  for (int trial = 0; trial < 12; ++trial) {
    const JointDistribution p = random_distribution(2, 2, rng);
    const JointDistribution q = random_distribution(2, 2, rng);
    const JointDistribution pq = product(p, q);
    const RibbonPoint pt{0.75 + 0.25 * rng.uniform01(), 0.75 + 0.25 * rng.uniform01()};
    HcOptions opts = fast_opts(trial);
    opts.u_card = 4;
    const HcVerdict v = hc_membership_channel(pq, pt, opts);
    if (!v.outside() || v.violation < 1e-7) continue;
    ++restricted;

    const int u_card = static_cast<int>(v.witness_channel.cols());
    const int a2 = q.a_card(), b2 = q.b_card();
    // marginal channel on the first factor: p(u | a1 b1)
    Eigen::MatrixXd w1 = Eigen::MatrixXd::Zero(p.a_card() * p.b_card(), u_card);
    for (int x1 = 0; x1 < p.a_card(); ++x1)
      for (int y1 = 0; y1 < p.b_card(); ++y1)
        for (int x2 = 0; x2 < a2; ++x2)
          for (int y2 = 0; y2 < b2; ++y2)
            w1.row(x1 * p.b_card() + y1) +=
                q.probs()(x2, y2) *
                v.witness_channel.row((x1 * a2 + x2) * pq.b_card() + (y1 * b2 + y2));
    // extended channel (u, a1, b1) on the second factor
    const int u2_card = u_card * p.a_card() * p.b_card();
    Eigen::MatrixXd w2(a2 * b2, u2_card);
    for (int x2 = 0; x2 < a2; ++x2)
      for (int y2 = 0; y2 < b2; ++y2)
        for (int x1 = 0; x1 < p.a_card(); ++x1)
          for (int y1 = 0; y1 < p.b_card(); ++y1)
            for (int u = 0; u < u_card; ++u)
              w2(x2 * b2 + y2, (u * p.a_card() + x1) * p.b_card() + y1) =
                  p.probs()(x1, y1) *
                  v.witness_channel((x1 * a2 + x2) * pq.b_card() + (y1 * b2 + y2), u);

    const double viol1 = -channel_objective(p, pt, w1);
    const double viol2 = -channel_objective(q, pt, w2);
    CHECK(viol1 + viol2 >= v.violation - 1e-9);
    CHECK(std::max(viol1, viol2) >= v.violation / 2 - 1e-9);
  }
  CHECK(restricted >= 3);
}

TEST_CASE("data processing: witnesses pull back through the composite channel") {
  Rng rng(23);
  int pulled = 0;
  for (int trial = 0; trial < 15; ++trial) {
    const JointDistribution d = random_distribution(3, 3, rng);
    const Eigen::MatrixXd ka = random_stochastic_map(2, 3, rng);
    const Eigen::MatrixXd kb = random_stochastic_map(2, 3, rng);
    const JointDistribution mapped = apply_local_maps(d, ka, kb);
    const RibbonPoint pt{0.8 + 0.2 * rng.uniform01(), 0.8 + 0.2 * rng.uniform01()};
    const HcVerdict v = hc_membership_channel(mapped, pt, fast_opts(trial));
    if (!v.outside() || v.violation < 1e-7) continue;
    ++pulled;

    const int u_card = static_cast<int>(v.witness_channel.cols());
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d.a_card() * d.b_card(), u_card);
    for (int a1 = 0; a1 < d.a_card(); ++a1)
      for (int b1 = 0; b1 < d.b_card(); ++b1)
        for (int a2 = 0; a2 < mapped.a_card(); ++a2)
          for (int b2 = 0; b2 < mapped.b_card(); ++b2)
            w.row(a1 * d.b_card() + b1) +=
                ka(a2, a1) * kb(b2, b1) * v.witness_channel.row(a2 * mapped.b_card() + b2);
    const double viol_pre = -channel_objective(d, pt, w);
    CHECK(viol_pre >= v.violation - 1e-9);
  }
  CHECK(pulled >= 3);
}

TEST_CASE("s_star estimates") {
  Rng rng(29);
  const JointDistribution prod = random_product(2, 2, rng);
  CHECK(s_star(prod, 4, fast_opts()) == doctest::Approx(0.0).epsilon(1e-3));

  // doubly symmetric bits with correlation 0.5: at least rho^2 = 0.25
  CHECK(s_star(q_eta(0.5), 4, fast_opts()) >= 0.25 - 1e-3);

  // common data: rho = 1
  CHECK(s_star(common_bit(), 4, fast_opts()) >= 1.0 - 1e-3);
}
