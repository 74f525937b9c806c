#include "nlbox/maximal_correlation.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "nlbox/jacobi.hpp"

namespace nlbox {

RhoResult rho(const JointDistribution& d) {
  std::vector<int> rows, cols;
  for (int a = 0; a < d.a_card(); ++a)
    if (d.marginal_a()(a) > kSupportEpsilon) rows.push_back(a);
  for (int b = 0; b < d.b_card(); ++b)
    if (d.marginal_b()(b) > kSupportEpsilon) cols.push_back(b);

  RhoResult result;
  result.f = Eigen::VectorXd::Zero(d.a_card());
  result.g = Eigen::VectorXd::Zero(d.b_card());
  if (rows.size() < 2 || cols.size() < 2) return result;  // only constants exist

  const int na = static_cast<int>(rows.size());
  const int nb = static_cast<int>(cols.size());
  Eigen::VectorXd sa(na), sb(nb);
  for (int i = 0; i < na; ++i) sa(i) = std::sqrt(d.marginal_a()(rows[i]));
  for (int j = 0; j < nb; ++j) sb(j) = std::sqrt(d.marginal_b()(cols[j]));

  Eigen::MatrixXd m(na, nb);
  for (int i = 0; i < na; ++i)
    for (int j = 0; j < nb; ++j) m(i, j) = d.probs()(rows[i], cols[j]) / (sa(i) * sb(j));

  // The leading singular pair is (sqrt p_A, sqrt p_B) with value 1; removing
  // it first keeps the second value accurate even when it is near zero.
  m -= sa * sb.transpose();

  const bool tall = na >= nb;
  const Eigen::MatrixXd gram = tall ? Eigen::MatrixXd(m.transpose() * m)
                                    : Eigen::MatrixXd(m * m.transpose());
  const SymmetricEigen eig = jacobi_eigen(gram);
  const double top = std::max(0.0, eig.values(0));
  double r = std::sqrt(top);
  if (r > 1.0) {
    if (r > 1.0 + 1e-12) throw std::runtime_error("rho: singular value exceeds 1");
    r = 1.0;
  }
  result.rho = r;

  Eigen::VectorXd u, v;
  if (tall) {
    v = eig.vectors.col(0);
    u = r > 0.0 ? Eigen::VectorXd(m * v / r) : Eigen::VectorXd::Zero(na);
  } else {
    u = eig.vectors.col(0);
    v = r > 0.0 ? Eigen::VectorXd(m.transpose() * u / r) : Eigen::VectorXd::Zero(nb);
  }
  // f = u / sqrt(p_A) is zero-mean and unit-variance by orthogonality of u to
  // the removed leading vector; same for g, and E[f g] = r by construction.
  if (r > 0.0) {
    for (int i = 0; i < na; ++i) result.f(rows[i]) = u(i) / sa(i);
    for (int j = 0; j < nb; ++j) result.g(cols[j]) = v(j) / sb(j);
  }
  return result;
}

double rho_binary_closed_form(const JointDistribution& d) {
  if (d.a_card() != 2 || d.b_card() != 2)
    throw std::invalid_argument("rho_binary_closed_form: requires 2x2 distribution");
  const Eigen::MatrixXd& q = d.probs();
  const double alpha = d.marginal_a()(0) - d.marginal_a()(1);
  const double beta = d.marginal_b()(0) - d.marginal_b()(1);
  const double zeta = q(0, 0) - q(0, 1) - q(1, 0) + q(1, 1);
  const double denom_sq = (1.0 - alpha * alpha) * (1.0 - beta * beta);
  const double num = std::abs(zeta - alpha * beta);
  if (denom_sq <= 0.0) return 0.0;  // 0/0 convention
  return std::min(1.0, num / std::sqrt(denom_sq));
}

BoxRho rho_box(const NoSignalingBox& box) {
  BoxRho best;
  best.rho = -1.0;
  for (int x = 0; x < box.x_card(); ++x)
    for (int y = 0; y < box.y_card(); ++y) {
      const double r = rho(conditional_joint(box, x, y)).rho;
      if (r > best.rho) {
        best.rho = r;
        best.x = x;
        best.y = y;
      }
    }
  return best;
}

JointDistribution joint_with_inputs(const NoSignalingBox& box, const JointDistribution& q_xy) {
  if (q_xy.a_card() != box.x_card() || q_xy.b_card() != box.y_card())
    throw std::invalid_argument("joint_with_inputs: input distribution shape mismatch");
  Eigen::MatrixXd out =
      Eigen::MatrixXd::Zero(box.a_card() * box.x_card(), box.b_card() * box.y_card());
  for (int x = 0; x < box.x_card(); ++x)
    for (int y = 0; y < box.y_card(); ++y) {
      const Eigen::MatrixXd& q = box.conditional(x, y);
      for (int a = 0; a < box.a_card(); ++a)
        for (int b = 0; b < box.b_card(); ++b)
          out(a * box.x_card() + x, b * box.y_card() + y) = q_xy.probs()(x, y) * q(a, b);
    }
  out /= out.sum();
  return JointDistribution(std::move(out));
}

}  // namespace nlbox
