#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "nlbox/box.hpp"
#include "nlbox/mc_ribbon.hpp"
#include "nlbox/prob.hpp"

namespace nlbox {

inline constexpr double kHcTolerance = 1e-8;

enum class HcStatus { InsideHeuristic, OutsideCertified };

// Outcome of a hypercontractivity membership query. OutsideCertified always
// carries a concrete witness whose violation was re-verified by direct
// recomputation; InsideHeuristic only says the search found no violation and
// records how many restarts it spent trying.
struct HcVerdict {
  HcStatus status = HcStatus::InsideHeuristic;
  double violation = 0.0;
  int restarts_used = 0;
  bool has_channel_witness = false;
  Eigen::MatrixXd witness_channel;  // (a_card*b_card) x u_card, row a*b_card+b
  bool has_norm_witness = false;
  Eigen::VectorXd witness_f, witness_g;

  bool outside() const { return status == HcStatus::OutsideCertified; }
};

struct HcOptions {
  int restarts = 64;
  int max_iterations = 2000;
  int u_card = 0;  // 0 means |A| * |B| + 2
  std::uint64_t seed = 1;
  // A restart stops early once it holds a witness at least this strong, and
  // remaining restarts are skipped; violations reported are those of the
  // witness found, not a supremum.
  double stop_at_violation = 1e-4;
};

// lambda1 H(A) + lambda2 H(B) - H(AB), natural log.
double upsilon(const JointDistribution& d, RibbonPoint pt);

// I(U;AB) - lambda1 I(U;A) - lambda2 I(U;B) for the given channel p(u | ab)
// (rows indexed a*b_card+b; rows at zero-mass cells are ignored). Equals
// E_U[Upsilon(p_{AB|U})] - Upsilon(p_AB). Negative values witness exclusion.
double channel_objective(const JointDistribution& d, RibbonPoint pt,
                         const Eigen::MatrixXd& channel);

// E[f g] / (||f||_{1/lambda1} ||g||_{1/lambda2}) for non-negative f on A and
// g on B. Values above 1 witness exclusion via the norm characterization.
double norm_ratio(const JointDistribution& d, RibbonPoint pt, const Eigen::VectorXd& f,
                  const Eigen::VectorXd& g);

// Multistart exponentiated-gradient minimization of the channel objective
// over channels with |U| = u_card.
HcVerdict hc_membership_channel(const JointDistribution& d, RibbonPoint pt,
                                const HcOptions& opts = {});

// Alternating maximization of the norm ratio; each half-step is the exact
// Hoelder-optimal response. Requires lambda1, lambda2 > 0.
HcVerdict hc_membership_norms(const JointDistribution& d, RibbonPoint pt,
                              const HcOptions& opts = {});

struct HcBoxVerdict {
  HcVerdict verdict;
  int x = 0, y = 0;  // refuting input pair when outside
};

HcBoxVerdict hc_membership_box(const NoSignalingBox& box, RibbonPoint pt,
                               const HcOptions& opts = {});

// Estimate of inf (1 - lambda1) / lambda2 over points the channel search
// leaves inside, traced along lambda2 slices.
double s_star(const JointDistribution& d, int grid_resolution = 8, const HcOptions& opts = {});

}  // namespace nlbox
