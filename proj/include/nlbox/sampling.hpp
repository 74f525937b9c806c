#pragma once

#include <Eigen/Dense>

#include "nlbox/box.hpp"
#include "nlbox/prob.hpp"
#include "nlbox/rng.hpp"

namespace nlbox {

// Flat Dirichlet over the whole table.
JointDistribution random_distribution(int a_card, int b_card, Rng& rng);

// Mixture of random local-deterministic vertices (plus one random PR-type
// vertex when all alphabets are binary) with flat Dirichlet weights. Convexity
// keeps the sample inside the no-signaling polytope.
NoSignalingBox random_box(int x_card, int y_card, int a_card, int b_card, Rng& rng,
                          int n_local_vertices = 8);

// Column-stochastic kernel k(out, in) with Dirichlet columns.
Eigen::MatrixXd random_stochastic_map(int out_card, int in_card, Rng& rng);

// Gaussian values on the support, centered and scaled to E[f] = 0, E[f^2] = 1.
Eigen::MatrixXd random_zero_mean_unit_function(const JointDistribution& d, Rng& rng);

// Binary box parameters satisfying the positivity ranges together with
// sum over (x,y) of (-1)^(xy) zeta_xy >= 4 eta, i.e. CHSH >= (1 + eta) / 2.
// Requires eta >= 1/sqrt(2) (the frontier hypothesis).
BinaryBoxParams random_frontier_params(double eta, Rng& rng);

}  // namespace nlbox
