#include "nlbox/mc_ribbon.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nlbox/jacobi.hpp"
#include "nlbox/maximal_correlation.hpp"

namespace nlbox {

namespace {

struct SupportCells {
  std::vector<int> a, b;      // cell index -> symbols
  Eigen::VectorXd sqrt_p;     // cell weights
};

SupportCells support_cells(const JointDistribution& d) {
  SupportCells s;
  for (int a = 0; a < d.a_card(); ++a)
    for (int b = 0; b < d.b_card(); ++b)
      if (d.in_support(a, b)) {
        s.a.push_back(a);
        s.b.push_back(b);
      }
  s.sqrt_p.resize(s.a.size());
  for (size_t i = 0; i < s.a.size(); ++i) s.sqrt_p(i) = std::sqrt(d.probs()(s.a[i], s.b[i]));
  return s;
}

// Quadratic form Q = I - lambda1 P_A - lambda2 P_B in the weighted coordinates
// phi = sqrt(p) f over the support, where P_A, P_B are the orthogonal
// projections onto functions of a alone (resp. b alone). Symmetric by
// construction.
Eigen::MatrixXd membership_form(const JointDistribution& d, const SupportCells& s,
                                RibbonPoint pt) {
  const int n = static_cast<int>(s.a.size());
  Eigen::MatrixXd q = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double proj = 0.0;
      if (s.a[i] == s.a[j]) proj += pt.lambda1 * s.sqrt_p(i) * s.sqrt_p(j) / d.marginal_a()(s.a[i]);
      if (s.b[i] == s.b[j]) proj += pt.lambda2 * s.sqrt_p(i) * s.sqrt_p(j) / d.marginal_b()(s.b[i]);
      q(i, j) -= proj;
    }
  return q;
}

void check_point(RibbonPoint pt) {
  if (pt.lambda1 < 0.0 || pt.lambda1 > 1.0 || pt.lambda2 < 0.0 || pt.lambda2 > 1.0)
    throw std::invalid_argument("ribbon point must lie in [0,1]^2");
}

}  // namespace

McVerdict mc_membership(const JointDistribution& d, RibbonPoint pt) {
  check_point(pt);
  const SupportCells s = support_cells(d);
  const int n = static_cast<int>(s.a.size());

  Eigen::MatrixXd q = membership_form(d, s, pt);
  // The constant function sqrt(p) is an eigenvector with eigenvalue
  // 1 - lambda1 - lambda2; move it to 2 so the minimum below is taken over
  // the zero-mean subspace only (all other eigenvalues are at most 1).
  const double shift = 2.0 - (1.0 - pt.lambda1 - pt.lambda2);
  q += shift * (s.sqrt_p * s.sqrt_p.transpose());

  const SymmetricEigen eig = jacobi_eigen(q);
  McVerdict verdict;
  verdict.min_eigenvalue = eig.values(n - 1);
  verdict.inside = verdict.min_eigenvalue >= -kPsdTolerance;
  if (!verdict.inside) {
    verdict.has_witness = true;
    verdict.witness_f = Eigen::MatrixXd::Zero(d.a_card(), d.b_card());
    const Eigen::VectorXd phi = eig.vectors.col(n - 1);
    for (int i = 0; i < n; ++i) verdict.witness_f(s.a[i], s.b[i]) = phi(i) / s.sqrt_p(i);
  }
  return verdict;
}

McBoxVerdict mc_membership_box(const NoSignalingBox& box, RibbonPoint pt) {
  McBoxVerdict out;
  bool first = true;
  for (int x = 0; x < box.x_card(); ++x)
    for (int y = 0; y < box.y_card(); ++y) {
      const McVerdict v = mc_membership(conditional_joint(box, x, y), pt);
      if (first || v.min_eigenvalue < out.min_eigenvalue) {
        first = false;
        out.min_eigenvalue = v.min_eigenvalue;
        out.x = x;
        out.y = y;
        out.has_witness = v.has_witness;
        if (v.has_witness) out.witness_f = v.witness_f;
      }
    }
  out.inside = out.min_eigenvalue >= -kPsdTolerance;
  return out;
}

namespace {

template <typename Oracle>
double boundary_slice(double lambda2, double tol, const Oracle& inside_at) {
  if (lambda2 < 0.0 || lambda2 > 1.0)
    throw std::invalid_argument("boundary slice: lambda2 must lie in [0,1]");
  if (inside_at(1.0)) return 1.0;
  double lo = 0.0, hi = 1.0;  // lambda1 = 0 is always inside (law of total variance)
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (inside_at(mid) ? lo : hi) = mid;
  }
  return lo;
}

}  // namespace

double mc_boundary_slice(const JointDistribution& d, double lambda2, double tol) {
  return boundary_slice(lambda2, tol, [&](double l1) {
    return mc_membership(d, {l1, lambda2}).inside;
  });
}

double mc_boundary_slice_box(const NoSignalingBox& box, double lambda2, double tol) {
  return boundary_slice(lambda2, tol, [&](double l1) {
    return mc_membership_box(box, {l1, lambda2}).inside;
  });
}

namespace {

template <typename Slice, typename Member>
double inf_ratio(int n_max, double rho_sq, const Slice& slice, const Member& inside_at) {
  if (n_max < 10) throw std::invalid_argument("inf ratio: n_max must be at least 10");
  std::vector<int> ns;
  for (int n = 10; n < n_max; n *= 10) ns.push_back(n);
  ns.push_back(n_max);
  double best = 1.0;  // slice at lambda2 = 1 never exceeds ratio 1
  for (int n : ns) {
    const double lambda2 = 1.0 / n;
    const double lambda1 = slice(lambda2, std::min(1e-8, lambda2 * 1e-4));
    best = std::min(best, (1.0 - lambda1) / lambda2);
  }
  const double eps = 1e-6;
  const RibbonPoint anchor{1.0 - (rho_sq + eps) / n_max, 1.0 / n_max};
  if (anchor.lambda1 >= 0.0 && inside_at(anchor)) best = std::min(best, rho_sq + eps);
  return best;
}

}  // namespace

double mc_inf_ratio(const JointDistribution& d, int n_max) {
  const double r = rho(d).rho;
  return inf_ratio(
      n_max, r * r,
      [&](double l2, double tol) { return mc_boundary_slice(d, l2, tol); },
      [&](RibbonPoint pt) { return mc_membership(d, pt).inside; });
}

double mc_inf_ratio_box(const NoSignalingBox& box, int n_max) {
  const double r = rho_box(box).rho;
  return inf_ratio(
      n_max, r * r,
      [&](double l2, double tol) { return mc_boundary_slice_box(box, l2, tol); },
      [&](RibbonPoint pt) { return mc_membership_box(box, pt).inside; });
}

namespace {

double upsilon_of_table(const Eigen::MatrixXd& q, RibbonPoint pt) {
  const JointDistribution d(q, 1e-9);
  return pt.lambda1 * entropy_marginal_a(d) + pt.lambda2 * entropy_marginal_b(d) - entropy(d);
}

}  // namespace

PerturbationCheck perturbation_second_order(const JointDistribution& d, const Eigen::MatrixXd& f,
                                            RibbonPoint pt, double epsilon) {
  check_point(pt);
  if (f.rows() != d.a_card() || f.cols() != d.b_card())
    throw std::invalid_argument("perturbation_second_order: f shape mismatch");
  const double mean = expectation(d, f);
  const double second = expectation(d, f.cwiseProduct(f));
  if (std::abs(mean) > 1e-9 || std::abs(second - 1.0) > 1e-9)
    throw std::invalid_argument("perturbation_second_order: f must be zero-mean, unit-variance");

  double max_abs_f = 0.0;
  for (int a = 0; a < d.a_card(); ++a)
    for (int b = 0; b < d.b_card(); ++b)
      if (d.in_support(a, b)) max_abs_f = std::max(max_abs_f, std::abs(f(a, b)));
  if (epsilon * max_abs_f >= 1.0)
    throw std::invalid_argument("perturbation_second_order: perturbation leaves the simplex; "
                                "largest admissible epsilon is " + std::to_string(1.0 / max_abs_f));

  PerturbationCheck out;
  const Eigen::VectorXd ma = conditional_mean_given_a(d, f);
  const Eigen::VectorXd mb = conditional_mean_given_b(d, f);
  out.quadratic_form = second -
                       pt.lambda1 * (d.marginal_a().array() * ma.array().square()).sum() -
                       pt.lambda2 * (d.marginal_b().array() * mb.array().square()).sum();

  const Eigen::MatrixXd plus = d.probs().cwiseProduct(Eigen::MatrixXd::Ones(f.rows(), f.cols()) +
                                                      epsilon * f);
  const Eigen::MatrixXd minus = d.probs().cwiseProduct(Eigen::MatrixXd::Ones(f.rows(), f.cols()) -
                                                       epsilon * f);
  const double center = upsilon_of_table(d.probs(), pt);
  out.fd_second_derivative =
      (upsilon_of_table(plus, pt) - 2.0 * center + upsilon_of_table(minus, pt)) /
      (epsilon * epsilon);
  return out;
}

}  // namespace nlbox
