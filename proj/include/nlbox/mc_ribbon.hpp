#pragma once

#include <Eigen/Dense>

#include "nlbox/box.hpp"
#include "nlbox/prob.hpp"

namespace nlbox {

inline constexpr double kPsdTolerance = 1e-10;

struct RibbonPoint {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

// Result of a membership query against the variance inequality
//   Var[f] >= lambda1 Var_A E_{B|A}[f] + lambda2 Var_B E_{A|B}[f].
// min_eigenvalue is the smallest eigenvalue of the associated quadratic form
// on the zero-mean subspace; inside iff it is >= -kPsdTolerance. When the
// point is outside, witness_f is a zero-mean unit-variance function violating
// the inequality by |min_eigenvalue|.
struct McVerdict {
  bool inside = true;
  double min_eigenvalue = 0.0;
  bool has_witness = false;
  Eigen::MatrixXd witness_f;
};

McVerdict mc_membership(const JointDistribution& d, RibbonPoint pt);

struct McBoxVerdict {
  bool inside = true;
  double min_eigenvalue = 0.0;  // minimum over input pairs
  int x = 0, y = 0;             // input pair attaining it
  bool has_witness = false;
  Eigen::MatrixXd witness_f;
};

McBoxVerdict mc_membership_box(const NoSignalingBox& box, RibbonPoint pt);

// Largest lambda1 with (lambda1, lambda2) inside, located by bisection; the
// returned value is certified inside and within tol of the true boundary.
double mc_boundary_slice(const JointDistribution& d, double lambda2, double tol = 1e-8);
double mc_boundary_slice_box(const NoSignalingBox& box, double lambda2, double tol = 1e-8);

// Numerical estimate of inf (1 - lambda1) / lambda2 over the ribbon, from
// boundary slices at lambda2 = 1/n plus the n-indexed near-optimal sequence
// anchored at the spectral maximal correlation (epsilon fixed to 1e-6).
double mc_inf_ratio(const JointDistribution& d, int n_max = 10000);
double mc_inf_ratio_box(const NoSignalingBox& box, int n_max = 10000);

// Quadratic form D = E[f^2] - lambda1 E_A[(E_{B|A}f)^2] - lambda2 E_B[(E_{A|B}f)^2]
// for a zero-mean unit-variance f, together with the central-difference second
// derivative of epsilon -> Upsilon(p(1 + epsilon f)) at 0. Throws when the
// perturbed tables leave the simplex at the requested epsilon.
struct PerturbationCheck {
  double quadratic_form = 0.0;
  double fd_second_derivative = 0.0;
};

PerturbationCheck perturbation_second_order(const JointDistribution& d, const Eigen::MatrixXd& f,
                                            RibbonPoint pt, double epsilon = 1e-4);

}  // namespace nlbox
