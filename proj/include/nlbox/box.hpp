#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nlbox/prob.hpp"

namespace nlbox {

inline constexpr double kNsTolerance = 1e-9;

struct BoxIssue {
  enum class Kind { NegativeEntry, NotNormalized, Signaling };
  Kind kind;
  double magnitude;
  std::string detail;
};

struct BoxValidation {
  std::vector<BoxIssue> issues;
  double worst = 0.0;  // largest violation magnitude seen
  bool ok() const { return issues.empty(); }
  std::string summary() const;
};

// Conditional table p(a, b | x, y) over finite alphabets, validated
// no-signaling on construction. Immutable afterwards.
class NoSignalingBox {
 public:
  // conditionals[x * y_card + y] is the a_card x b_card table at input (x, y).
  // Throws std::invalid_argument with the validation summary on failure.
  NoSignalingBox(int x_card, int y_card, int a_card, int b_card,
                 std::vector<Eigen::MatrixXd> conditionals, double tolerance = kNsTolerance);

  // Non-throwing check of the same constraints, reporting every violation.
  static BoxValidation validate(int x_card, int y_card, int a_card, int b_card,
                                const std::vector<Eigen::MatrixXd>& conditionals,
                                double tolerance = kNsTolerance);

  int x_card() const { return x_card_; }
  int y_card() const { return y_card_; }
  int a_card() const { return a_card_; }
  int b_card() const { return b_card_; }
  bool binary() const { return x_card_ == 2 && y_card_ == 2 && a_card_ == 2 && b_card_ == 2; }

  const Eigen::MatrixXd& conditional(int x, int y) const;
  double prob(int x, int y, int a, int b) const { return conditional(x, y)(a, b); }

  // Output marginals, input-independent per side by no-signaling.
  Eigen::VectorXd marginal_a(int x) const;
  Eigen::VectorXd marginal_b(int y) const;

 private:
  int x_card_, y_card_, a_card_, b_card_;
  std::vector<Eigen::MatrixXd> cond_;
};

// PR_eta: p = (1 + eta)/4 when a xor b = x and y, else (1 - eta)/4.
NoSignalingBox isotropic_box(double eta);

// (1/4) sum over a,b,x,y of [a xor b = xy] p(a, b | x, y); binary boxes only.
double chsh_value(const NoSignalingBox& box);

// Eight-parameter form of a binary box:
// p(a, b | x, y) = (1/4) (1 + (-1)^a alpha_x + (-1)^b beta_y + (-1)^(a+b) zeta_xy)
struct BinaryBoxParams {
  Eigen::Vector2d alpha;
  Eigen::Vector2d beta;
  Eigen::Matrix2d zeta;  // zeta(x, y)
};

// Checks 1 - |alpha_x - beta_y| >= zeta_xy >= |alpha_x + beta_y| - 1 for all x, y.
bool binary_params_feasible(const BinaryBoxParams& params, double slack = 1e-12);

NoSignalingBox box_from_binary_params(const BinaryBoxParams& params);
BinaryBoxParams binary_params_of(const NoSignalingBox& box);

// p(a, b | x, y) for fixed inputs, renormalized exactly.
JointDistribution conditional_joint(const NoSignalingBox& box, int x, int y);

NoSignalingBox mix_boxes(const std::vector<NoSignalingBox>& boxes, const Eigen::VectorXd& weights);

}  // namespace nlbox
