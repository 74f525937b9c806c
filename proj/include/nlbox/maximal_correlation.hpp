#pragma once

#include <Eigen/Dense>

#include "nlbox/box.hpp"
#include "nlbox/prob.hpp"

namespace nlbox {

// Maximal correlation of p(a, b) together with an optimizing pair of
// functions. When rho > 0 and both marginal supports have at least two
// symbols, f and g are zero-mean, unit-variance and E[f g] = rho.
struct RhoResult {
  double rho = 0.0;
  Eigen::VectorXd f;  // function of a
  Eigen::VectorXd g;  // function of b
};

// Second singular value of M(a, b) = p(a, b) / sqrt(p_A(a) p_B(b)) restricted
// to the marginal supports, computed by deflating the leading pair and
// running cyclic Jacobi on the Gram matrix. Clamped into [0, 1].
RhoResult rho(const JointDistribution& d);

// |zeta - alpha beta| / sqrt((1 - alpha^2)(1 - beta^2)) with 0/0 = 0, for a
// 2 x 2 distribution written in the (alpha, beta, zeta) form.
double rho_binary_closed_form(const JointDistribution& d);

struct BoxRho {
  double rho = 0.0;
  int x = 0, y = 0;  // lexicographically first input pair attaining the max
};
BoxRho rho_box(const NoSignalingBox& box);

// q(ab, xy) = q_XY(x, y) p(a, b | x, y); A side indexes pairs (a, x) as
// a * x_card + x, B side indexes (b, y) as b * y_card + y.
JointDistribution joint_with_inputs(const NoSignalingBox& box, const JointDistribution& q_xy);

}  // namespace nlbox
