#include "nlbox/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace nlbox {

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double s = 0.0;
  for (int p = 0; p < a.rows(); ++p)
    for (int q = p + 1; q < a.cols(); ++q) s += a(p, q) * a(p, q);
  return std::sqrt(2.0 * s);
}

// B = J^T A J with J(p,p) = J(q,q) = c, J(p,q) = s, J(q,p) = -s,
// annihilating the (p,q) entry.
void rotate(Eigen::MatrixXd& a, Eigen::MatrixXd& v, int p, int q, double c, double s,
            double t) {
  const int n = static_cast<int>(a.rows());
  const double apq = a(p, q);
  for (int k = 0; k < n; ++k) {
    if (k == p || k == q) continue;
    const double akp = a(k, p);
    const double akq = a(k, q);
    a(k, p) = a(p, k) = c * akp - s * akq;
    a(k, q) = a(q, k) = s * akp + c * akq;
  }
  a(p, p) -= t * apq;
  a(q, q) += t * apq;
  a(p, q) = a(q, p) = 0.0;
  for (int k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

}  // namespace

SymmetricEigen jacobi_eigen(Eigen::MatrixXd a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("jacobi_eigen: matrix must be square");
  const int n = static_cast<int>(a.rows());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double tol = 1e-14 * std::max(1.0, a.norm());
  const int max_sweeps = 100;

  for (int sweep = 0; sweep < max_sweeps && off_diagonal_norm(a) > tol; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        rotate(a, v, p, q, c, t * c, t);
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int i, int j) { return a(i, i) > a(j, j); });

  SymmetricEigen result;
  result.values.resize(n);
  result.vectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    result.values(k) = a(order[k], order[k]);
    result.vectors.col(k) = v.col(order[k]);
  }
  return result;
}

}  // namespace nlbox
