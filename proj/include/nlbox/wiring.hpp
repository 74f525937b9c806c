#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "nlbox/box.hpp"
#include "nlbox/prob.hpp"
#include "nlbox/rng.hpp"

namespace nlbox {

inline constexpr int kMaxWiringBoxes = 4;
// Trajectory tables grow as (n!)^2 times the product of alphabet sizes; this
// cap admits four binary boxes.
inline constexpr std::int64_t kTrajectoryMaxEntries = 64'000'000;

enum class Side { Alice, Bob };

// What one party has seen at some point during a wiring: her external input
// and the ordered (box, input, output) triples observed so far.
struct History {
  int external = 0;
  std::vector<std::array<int, 3>> used;
  auto operator<=>(const History&) const = default;
};

// One party's complete view at output time: external input plus, for each box
// in box order, (action position, input, output).
struct PartyView {
  int external = 0;
  std::vector<std::array<int, 3>> per_box;
  auto operator<=>(const PartyView&) const = default;
};

// Adaptive single-party protocol: per step a stochastic choice of the next
// box and its input given the history, plus a stochastic final output map.
// Rows not set explicitly default to uniform over the allowed entries;
// reachable rows of concrete protocols should always be set.
class PartyStrategy {
 public:
  PartyStrategy(Side side, std::vector<int> input_cards, std::vector<int> output_cards,
                int external_card, int final_card);

  int n() const { return static_cast<int>(input_cards_.size()); }
  Side side() const { return side_; }
  int external_card() const { return external_card_; }
  int final_card() const { return final_card_; }
  int input_card(int box) const { return input_cards_[box]; }
  int output_card(int box) const { return output_cards_[box]; }

  // (box, input) pairs are flattened as pair_offset(box) + input.
  int pair_offset(int box) const { return pair_offset_[box]; }
  int pair_count() const { return pair_offset_[input_cards_.size()]; }

  // Rows must vanish on already-used boxes and sum to 1 within 1e-12 (they
  // are renormalized; larger deviations are errors).
  void set_step_rule(const History& history, Eigen::VectorXd row);
  void set_deterministic_step(const History& history, int box, int input);
  void set_output_rule(const PartyView& view, Eigen::VectorXd row);
  void set_deterministic_output(const PartyView& view, int value);
  // Compact deterministic output map: final output = output of the given box.
  void set_output_passthrough(int box);

  Eigen::VectorXd step_row(const History& history) const;
  Eigen::VectorXd output_row(const PartyView& view) const;

  const std::map<History, Eigen::VectorXd>& step_rules() const { return steps_; }
  const std::map<PartyView, Eigen::VectorXd>& output_rules() const { return outputs_; }
  int passthrough_box() const { return passthrough_box_; }  // -1 when not set

 private:
  Side side_;
  std::vector<int> input_cards_, output_cards_;
  std::vector<int> pair_offset_;
  int external_card_, final_card_;
  std::map<History, Eigen::VectorXd> steps_;
  std::map<PartyView, Eigen::VectorXd> outputs_;
  int passthrough_box_ = -1;
};

struct WiringInstance {
  std::vector<NoSignalingBox> boxes;
  PartyStrategy alice;
  PartyStrategy bob;
};

void check_instance(const WiringInstance& instance);

// Full joint distribution of the wiring at fixed external inputs, over
// variables a1..an, b1..bn, x1..xn, y1..yn and the two usage orders encoded
// as permutation ranks "pi" and "omega" (lexicographic rank of the position
// vectors).
TableDistribution execute(const WiringInstance& instance, int x_prime, int y_prime);

// The box the two parties end up with after applying their output maps.
NoSignalingBox derived_box(const WiringInstance& instance);

// Deterministic chain: each party feeds box 0 its external input and wires
// each box's output to the next box's input; final outputs are read from
// output_box (default the last box).
WiringInstance sequential_chain(const std::vector<NoSignalingBox>& boxes, int output_box = -1);

// Uniformly sampled rule tables over every reachable history and view;
// one-hot rows when deterministic is set. Reproducible from the seed.
PartyStrategy random_strategy(const std::vector<NoSignalingBox>& boxes, Side side,
                              int external_card, int final_card, std::uint64_t seed,
                              bool deterministic = false);

// Residuals of the four structural identities of the trajectory joint: the
// box outputs are independent of transcripts given the box inputs; each
// output is independent of the other party's box-i view given one's own;
// each output is independent of the other party's entire view; and each
// next-action choice is independent of the other party's entire view given
// one's own transcript.
struct LemmaResiduals {
  double transcript_independence = 0.0;
  double cross_independence = 0.0;
  double output_locality = 0.0;
  double choice_locality = 0.0;
  double max() const;
};

LemmaResiduals verify_structure_lemmas(const WiringInstance& instance, int x_prime, int y_prime);

// Residual of the entropy chain-rule identity
//   H(A X Pi) = sum_i H(Xt_i Pit_i | Tt_i) + H(A_i | T_i X_i Pi_i)
// and its Bob-side counterpart; returns the larger of the two.
double verify_chain_rule_lemma(const WiringInstance& instance, int x_prime, int y_prime);

// Lexicographic rank of a permutation given as a position vector.
int permutation_rank(const std::vector<int>& perm);

}  // namespace nlbox
