#include "nlbox/wiring.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace nlbox {

namespace {

int factorial(int n) {
  int f = 1;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

int permutation_rank(const std::vector<int>& perm) {
  const int n = static_cast<int>(perm.size());
  int rank = 0;
  for (int j = 0; j < n; ++j) {
    int smaller_after = 0;
    for (int k = j + 1; k < n; ++k)
      if (perm[k] < perm[j]) ++smaller_after;
    rank += smaller_after * factorial(n - 1 - j);
  }
  return rank;
}

PartyStrategy::PartyStrategy(Side side, std::vector<int> input_cards,
                             std::vector<int> output_cards, int external_card, int final_card)
    : side_(side), input_cards_(std::move(input_cards)), output_cards_(std::move(output_cards)),
      external_card_(external_card), final_card_(final_card) {
  if (input_cards_.empty() || input_cards_.size() != output_cards_.size())
    throw std::invalid_argument("PartyStrategy: inconsistent box cardinalities");
  if (external_card_ < 1 || final_card_ < 1)
    throw std::invalid_argument("PartyStrategy: cardinalities must be positive");
  pair_offset_.assign(input_cards_.size() + 1, 0);
  for (size_t k = 0; k < input_cards_.size(); ++k)
    pair_offset_[k + 1] = pair_offset_[k] + input_cards_[k];
}

namespace {

Eigen::VectorXd normalized_row(Eigen::VectorXd row, const char* what) {
  for (Eigen::Index i = 0; i < row.size(); ++i)
    if (row(i) < 0.0) throw std::invalid_argument(std::string(what) + ": negative probability");
  const double sum = row.sum();
  if (std::abs(sum - 1.0) > 1e-12)
    throw std::invalid_argument(std::string(what) + ": row sums to " + std::to_string(sum));
  return row / sum;
}

}  // namespace

void PartyStrategy::set_step_rule(const History& history, Eigen::VectorXd row) {
  if (row.size() != pair_count())
    throw std::invalid_argument("set_step_rule: row length must cover all (box, input) pairs");
  row = normalized_row(std::move(row), "set_step_rule");
  for (const auto& triple : history.used) {
    const int box = triple[0];
    for (int x = 0; x < input_cards_[box]; ++x)
      if (row(pair_offset_[box] + x) > 0.0)
        throw std::invalid_argument("set_step_rule: mass on an already-used box");
  }
  steps_[history] = std::move(row);
}

void PartyStrategy::set_deterministic_step(const History& history, int box, int input) {
  Eigen::VectorXd row = Eigen::VectorXd::Zero(pair_count());
  row(pair_offset_[box] + input) = 1.0;
  set_step_rule(history, std::move(row));
}

void PartyStrategy::set_output_rule(const PartyView& view, Eigen::VectorXd row) {
  if (row.size() != final_card_)
    throw std::invalid_argument("set_output_rule: row length must equal the final cardinality");
  outputs_[view] = normalized_row(std::move(row), "set_output_rule");
}

void PartyStrategy::set_deterministic_output(const PartyView& view, int value) {
  Eigen::VectorXd row = Eigen::VectorXd::Zero(final_card_);
  row(value) = 1.0;
  set_output_rule(view, std::move(row));
}

void PartyStrategy::set_output_passthrough(int box) {
  if (box < 0 || box >= n()) throw std::invalid_argument("set_output_passthrough: bad box index");
  if (output_cards_[box] != final_card_)
    throw std::invalid_argument("set_output_passthrough: final cardinality mismatch");
  passthrough_box_ = box;
}

Eigen::VectorXd PartyStrategy::step_row(const History& history) const {
  if (const auto it = steps_.find(history); it != steps_.end()) return it->second;
  // default: uniform over the unused (box, input) pairs
  std::vector<bool> used(input_cards_.size(), false);
  for (const auto& triple : history.used) used[triple[0]] = true;
  Eigen::VectorXd row = Eigen::VectorXd::Zero(pair_count());
  int allowed = 0;
  for (size_t k = 0; k < input_cards_.size(); ++k)
    if (!used[k]) allowed += input_cards_[k];
  for (size_t k = 0; k < input_cards_.size(); ++k)
    if (!used[k])
      for (int x = 0; x < input_cards_[k]; ++x) row(pair_offset_[k] + x) = 1.0 / allowed;
  return row;
}

Eigen::VectorXd PartyStrategy::output_row(const PartyView& view) const {
  if (passthrough_box_ >= 0) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(final_card_);
    row(view.per_box[passthrough_box_][2]) = 1.0;
    return row;
  }
  if (const auto it = outputs_.find(view); it != outputs_.end()) return it->second;
  return Eigen::VectorXd::Constant(final_card_, 1.0 / final_card_);
}

void check_instance(const WiringInstance& instance) {
  const int n = static_cast<int>(instance.boxes.size());
  if (n < 1) throw std::invalid_argument("wiring: need at least one box");
  if (n > kMaxWiringBoxes)
    throw std::invalid_argument("wiring: " + std::to_string(n) + " boxes exceeds the cap of " +
                                std::to_string(kMaxWiringBoxes));
  if (instance.alice.n() != n || instance.bob.n() != n)
    throw std::invalid_argument("wiring: strategy box count mismatch");
  if (instance.alice.side() != Side::Alice || instance.bob.side() != Side::Bob)
    throw std::invalid_argument("wiring: strategies assigned to the wrong sides");
  for (int i = 0; i < n; ++i) {
    const auto& box = instance.boxes[i];
    if (instance.alice.input_card(i) != box.x_card() ||
        instance.alice.output_card(i) != box.a_card() ||
        instance.bob.input_card(i) != box.y_card() || instance.bob.output_card(i) != box.b_card())
      throw std::invalid_argument("wiring: strategy shape mismatch at box " + std::to_string(i));
  }
}

namespace {

// One party's complete run: usage order, inputs and outputs (box-indexed),
// and the product of her strategy factors.
struct LocalTrajectory {
  std::vector<int> order;     // order[j] = box used at action j
  std::vector<int> position;  // position[i] = action at which box i is used
  std::vector<int> inputs;    // inputs[i] = input fed to box i
  std::vector<int> outputs;   // outputs[i] = output observed from box i
  double weight = 1.0;
  int perm_rank = 0;
};

void enumerate_locals_rec(const PartyStrategy& s, History& h, double weight,
                          std::vector<LocalTrajectory>& out) {
  const int n = s.n();
  const int j = static_cast<int>(h.used.size());
  if (j == n) {
    LocalTrajectory t;
    t.order.resize(n);
    t.position.assign(n, 0);
    t.inputs.assign(n, 0);
    t.outputs.assign(n, 0);
    for (int step = 0; step < n; ++step) {
      const auto& [box, input, output] = h.used[step];
      t.order[step] = box;
      t.position[box] = step;
      t.inputs[box] = input;
      t.outputs[box] = output;
    }
    t.weight = weight;
    t.perm_rank = permutation_rank(t.position);
    out.push_back(std::move(t));
    return;
  }
  const Eigen::VectorXd row = s.step_row(h);
  std::vector<bool> used(n, false);
  for (const auto& triple : h.used) used[triple[0]] = true;
  for (int k = 0; k < n; ++k) {
    if (used[k]) continue;
    for (int x = 0; x < s.input_card(k); ++x) {
      const double p = row(s.pair_offset(k) + x);
      if (p <= 0.0) continue;
      for (int o = 0; o < s.output_card(k); ++o) {
        h.used.push_back({k, x, o});
        enumerate_locals_rec(s, h, weight * p, out);
        h.used.pop_back();
      }
    }
  }
}

std::vector<LocalTrajectory> enumerate_locals(const PartyStrategy& s, int external) {
  std::vector<LocalTrajectory> out;
  History h;
  h.external = external;
  enumerate_locals_rec(s, h, 1.0, out);
  return out;
}

double boxes_factor(const WiringInstance& instance, const LocalTrajectory& al,
                    const LocalTrajectory& bl) {
  double p = 1.0;
  for (size_t i = 0; i < instance.boxes.size(); ++i)
    p *= instance.boxes[i].prob(al.inputs[i], bl.inputs[i], al.outputs[i], bl.outputs[i]);
  return p;
}

PartyView view_of(const LocalTrajectory& t, int external) {
  PartyView v;
  v.external = external;
  v.per_box.resize(t.position.size());
  for (size_t i = 0; i < t.position.size(); ++i)
    v.per_box[i] = {t.position[i], t.inputs[i], t.outputs[i]};
  return v;
}

}  // namespace

TableDistribution execute(const WiringInstance& instance, int x_prime, int y_prime) {
  check_instance(instance);
  if (x_prime < 0 || x_prime >= instance.alice.external_card() || y_prime < 0 ||
      y_prime >= instance.bob.external_card())
    throw std::out_of_range("execute: external input out of range");
  const int n = static_cast<int>(instance.boxes.size());
  const int nfact = factorial(n);

  std::vector<TableDistribution::Variable> vars;
  for (int i = 0; i < n; ++i) vars.push_back({"a" + std::to_string(i + 1), instance.boxes[i].a_card()});
  for (int i = 0; i < n; ++i) vars.push_back({"b" + std::to_string(i + 1), instance.boxes[i].b_card()});
  for (int i = 0; i < n; ++i) vars.push_back({"x" + std::to_string(i + 1), instance.boxes[i].x_card()});
  for (int i = 0; i < n; ++i) vars.push_back({"y" + std::to_string(i + 1), instance.boxes[i].y_card()});
  vars.push_back({"pi", nfact});
  vars.push_back({"omega", nfact});

  std::vector<std::int64_t> strides(vars.size(), 1);
  for (int k = static_cast<int>(vars.size()) - 2; k >= 0; --k)
    strides[k] = strides[k + 1] * vars[k + 1].card;
  std::int64_t total = strides[0] * vars[0].card;
  if (total > kTrajectoryMaxEntries)
    throw std::invalid_argument("execute: trajectory table of " + std::to_string(total) +
                                " entries exceeds the cap of " +
                                std::to_string(kTrajectoryMaxEntries));

  const auto alice = enumerate_locals(instance.alice, x_prime);
  const auto bob = enumerate_locals(instance.bob, y_prime);

  std::vector<std::int64_t> alice_index(alice.size(), 0), bob_index(bob.size(), 0);
  for (size_t t = 0; t < alice.size(); ++t) {
    std::int64_t idx = 0;
    for (int i = 0; i < n; ++i) idx += alice[t].outputs[i] * strides[i];
    for (int i = 0; i < n; ++i) idx += alice[t].inputs[i] * strides[2 * n + i];
    idx += alice[t].perm_rank * strides[4 * n];
    alice_index[t] = idx;
  }
  for (size_t t = 0; t < bob.size(); ++t) {
    std::int64_t idx = 0;
    for (int i = 0; i < n; ++i) idx += bob[t].outputs[i] * strides[n + i];
    for (int i = 0; i < n; ++i) idx += bob[t].inputs[i] * strides[3 * n + i];
    idx += bob[t].perm_rank * strides[4 * n + 1];
    bob_index[t] = idx;
  }

  Eigen::VectorXd probs = Eigen::VectorXd::Zero(total);
  for (size_t ta = 0; ta < alice.size(); ++ta)
    for (size_t tb = 0; tb < bob.size(); ++tb)
      probs(alice_index[ta] + bob_index[tb]) +=
          alice[ta].weight * bob[tb].weight * boxes_factor(instance, alice[ta], bob[tb]);

  return TableDistribution(std::move(vars), std::move(probs), kTrajectoryMaxEntries, 1e-10);
}

NoSignalingBox derived_box(const WiringInstance& instance) {
  check_instance(instance);
  const int xc = instance.alice.external_card();
  const int yc = instance.bob.external_card();
  const int ac = instance.alice.final_card();
  const int bc = instance.bob.final_card();
  std::vector<Eigen::MatrixXd> cond(xc * yc);

  std::vector<std::vector<LocalTrajectory>> alice(xc), bob(yc);
  std::vector<std::vector<Eigen::VectorXd>> alice_rows(xc), bob_rows(yc);
  for (int xp = 0; xp < xc; ++xp) {
    alice[xp] = enumerate_locals(instance.alice, xp);
    for (const auto& t : alice[xp])
      alice_rows[xp].push_back(instance.alice.output_row(view_of(t, xp)));
  }
  for (int yp = 0; yp < yc; ++yp) {
    bob[yp] = enumerate_locals(instance.bob, yp);
    for (const auto& t : bob[yp])
      bob_rows[yp].push_back(instance.bob.output_row(view_of(t, yp)));
  }

  for (int xp = 0; xp < xc; ++xp)
    for (int yp = 0; yp < yc; ++yp) {
      Eigen::MatrixXd q = Eigen::MatrixXd::Zero(ac, bc);
      for (size_t ta = 0; ta < alice[xp].size(); ++ta)
        for (size_t tb = 0; tb < bob[yp].size(); ++tb) {
          const double p = alice[xp][ta].weight * bob[yp][tb].weight *
                           boxes_factor(instance, alice[xp][ta], bob[yp][tb]);
          if (p > 0.0) q += p * (alice_rows[xp][ta] * bob_rows[yp][tb].transpose());
        }
      cond[xp * yc + yp] = q;
    }
  return NoSignalingBox(xc, yc, ac, bc, std::move(cond));
}

namespace {

void chain_histories_rec(PartyStrategy& s, const std::vector<int>& cards, History& h) {
  const int j = static_cast<int>(h.used.size());
  const int n = static_cast<int>(cards.size());
  if (j == n) return;
  const int input = (j == 0) ? h.external : h.used.back()[2];
  s.set_deterministic_step(h, j, input);
  for (int o = 0; o < cards[j]; ++o) {
    h.used.push_back({j, input, o});
    chain_histories_rec(s, cards, h);
    h.used.pop_back();
  }
}

PartyStrategy chain_strategy(Side side, const std::vector<int>& input_cards,
                             const std::vector<int>& output_cards, int output_box) {
  PartyStrategy s(side, input_cards, output_cards, input_cards[0], output_cards[output_box]);
  for (int external = 0; external < s.external_card(); ++external) {
    History h;
    h.external = external;
    chain_histories_rec(s, output_cards, h);
  }
  s.set_output_passthrough(output_box);
  return s;
}

}  // namespace

WiringInstance sequential_chain(const std::vector<NoSignalingBox>& boxes, int output_box) {
  const int n = static_cast<int>(boxes.size());
  if (n < 1) throw std::invalid_argument("sequential_chain: need at least one box");
  if (n > kMaxWiringBoxes)
    throw std::invalid_argument("sequential_chain: exceeds the cap of " +
                                std::to_string(kMaxWiringBoxes));
  if (output_box < 0) output_box = n - 1;
  for (int i = 0; i + 1 < n; ++i) {
    if (boxes[i].a_card() != boxes[i + 1].x_card())
      throw std::invalid_argument("sequential_chain: output of box " + std::to_string(i) +
                                  " does not fit the input of box " + std::to_string(i + 1) +
                                  " on Alice's side");
    if (boxes[i].b_card() != boxes[i + 1].y_card())
      throw std::invalid_argument("sequential_chain: output of box " + std::to_string(i) +
                                  " does not fit the input of box " + std::to_string(i + 1) +
                                  " on Bob's side");
  }
  std::vector<int> xin, aout, yin, bout;
  for (const auto& b : boxes) {
    xin.push_back(b.x_card());
    aout.push_back(b.a_card());
    yin.push_back(b.y_card());
    bout.push_back(b.b_card());
  }
  WiringInstance instance{boxes, chain_strategy(Side::Alice, xin, aout, output_box),
                          chain_strategy(Side::Bob, yin, bout, output_box)};
  return instance;
}

namespace {

void random_histories_rec(PartyStrategy& s, History& h, Rng& rng, bool deterministic) {
  const int n = s.n();
  const int j = static_cast<int>(h.used.size());
  if (j == n) return;
  std::vector<bool> used(n, false);
  for (const auto& triple : h.used) used[triple[0]] = true;
  std::vector<int> allowed;  // flat (box, input) pairs
  for (int k = 0; k < n; ++k)
    if (!used[k])
      for (int x = 0; x < s.input_card(k); ++x) allowed.push_back(s.pair_offset(k) + x);

  Eigen::VectorXd row = Eigen::VectorXd::Zero(s.pair_count());
  if (deterministic) {
    row(allowed[rng.below(static_cast<int>(allowed.size()))]) = 1.0;
  } else {
    const Eigen::VectorXd mass = rng.dirichlet(static_cast<int>(allowed.size()));
    for (size_t k = 0; k < allowed.size(); ++k) row(allowed[k]) = mass(k);
  }
  s.set_step_rule(h, row);

  for (int k = 0; k < n; ++k) {
    if (used[k]) continue;
    for (int x = 0; x < s.input_card(k); ++x) {
      if (row(s.pair_offset(k) + x) <= 0.0) continue;
      for (int o = 0; o < s.output_card(k); ++o) {
        h.used.push_back({k, x, o});
        random_histories_rec(s, h, rng, deterministic);
        h.used.pop_back();
      }
    }
  }
}

void random_views_rec(PartyStrategy& s, std::vector<int>& order, std::vector<bool>& taken,
                      Rng& rng, bool deterministic, int external) {
  const int n = s.n();
  if (static_cast<int>(order.size()) == n) {
    // order fixed; enumerate every input/output combination
    std::vector<int> position(n);
    for (int j = 0; j < n; ++j) position[order[j]] = j;
    std::vector<int> inputs(n, 0), outputs(n, 0);
    while (true) {
      PartyView v;
      v.external = external;
      v.per_box.resize(n);
      for (int i = 0; i < n; ++i) v.per_box[i] = {position[i], inputs[i], outputs[i]};
      if (deterministic) {
        s.set_deterministic_output(v, rng.below(s.final_card()));
      } else {
        s.set_output_rule(v, rng.dirichlet(s.final_card()));
      }
      int k = 0;
      for (; k < 2 * n; ++k) {
        auto& slot = (k < n) ? inputs[k] : outputs[k - n];
        const int card = (k < n) ? s.input_card(k) : s.output_card(k - n);
        if (++slot < card) break;
        slot = 0;
      }
      if (k == 2 * n) break;
    }
    return;
  }
  for (int k = 0; k < n; ++k) {
    if (taken[k]) continue;
    taken[k] = true;
    order.push_back(k);
    random_views_rec(s, order, taken, rng, deterministic, external);
    order.pop_back();
    taken[k] = false;
  }
}

}  // namespace

PartyStrategy random_strategy(const std::vector<NoSignalingBox>& boxes, Side side,
                              int external_card, int final_card, std::uint64_t seed,
                              bool deterministic) {
  const int n = static_cast<int>(boxes.size());
  if (n > kMaxWiringBoxes)
    throw std::invalid_argument("random_strategy: exceeds the cap of " +
                                std::to_string(kMaxWiringBoxes));
  std::vector<int> inputs, outputs;
  for (const auto& b : boxes) {
    inputs.push_back(side == Side::Alice ? b.x_card() : b.y_card());
    outputs.push_back(side == Side::Alice ? b.a_card() : b.b_card());
  }
  PartyStrategy s(side, inputs, outputs, external_card, final_card);
  Rng rng(seed);
  for (int external = 0; external < external_card; ++external) {
    History h;
    h.external = external;
    random_histories_rec(s, h, rng, deterministic);
  }
  for (int external = 0; external < external_card; ++external) {
    std::vector<int> order;
    std::vector<bool> taken(n, false);
    random_views_rec(s, order, taken, rng, deterministic, external);
  }
  return s;
}

double LemmaResiduals::max() const {
  return std::max({transcript_independence, cross_independence, output_locality, choice_locality});
}

namespace {

// Sparse joint over small integer tuples, packed mixed-radix into uint64.
class SparseJoint {
 public:
  explicit SparseJoint(std::vector<std::int64_t> cards) : cards_(std::move(cards)) {}

  void add(std::initializer_list<int> values, double p) {
    std::uint64_t key = 0;
    auto it = cards_.begin();
    for (int v : values) key = key * static_cast<std::uint64_t>(*it++) + v;
    p_[key] += p;
  }

  // I(A; B | C) with fields laid out [A..., B..., C...]
  double cmi(int na, int nb) const {
    const int total = static_cast<int>(cards_.size());
    std::unordered_map<std::uint64_t, double> pac, pbc, pc;
    for (const auto& [key, p] : p_) {
      const auto f = unpack(key);
      pac[pack_slice(f, 0, na, na + nb, total)] += p;
      pbc[pack_slice(f, na, total, 0, 0)] += p;
      pc[pack_slice(f, na + nb, total, 0, 0)] += p;
    }
    double mi = 0.0;
    for (const auto& [key, p] : p_) {
      if (p <= 0.0) continue;
      const auto f = unpack(key);
      const double num = p * pc.at(pack_slice(f, na + nb, total, 0, 0));
      const double den = pac.at(pack_slice(f, 0, na, na + nb, total)) *
                         pbc.at(pack_slice(f, na, total, 0, 0));
      mi += p * std::log(num / den);
    }
    return mi;
  }

  // H(first na fields | remaining fields)
  double conditional_entropy(int na) const {
    const int total = static_cast<int>(cards_.size());
    std::unordered_map<std::uint64_t, double> pc;
    for (const auto& [key, p] : p_) pc[pack_slice(unpack(key), na, total, 0, 0)] += p;
    double h = 0.0;
    for (const auto& [key, p] : p_) {
      if (p <= 0.0) continue;
      h -= p * std::log(p / pc.at(pack_slice(unpack(key), na, total, 0, 0)));
    }
    return h;
  }

  double entropy() const {
    double h = 0.0;
    for (const auto& [key, p] : p_)
      if (p > 0.0) h -= p * std::log(p);
    return h;
  }

 private:
  std::vector<int> unpack(std::uint64_t key) const {
    std::vector<int> f(cards_.size());
    for (int k = static_cast<int>(cards_.size()) - 1; k >= 0; --k) {
      f[k] = static_cast<int>(key % cards_[k]);
      key /= cards_[k];
    }
    return f;
  }

  // Packs fields [lo1, hi1) followed by [lo2, hi2).
  std::uint64_t pack_slice(const std::vector<int>& f, int lo1, int hi1, int lo2, int hi2) const {
    std::uint64_t key = 0;
    for (int k = lo1; k < hi1; ++k) key = key * cards_[k] + f[k];
    for (int k = lo2; k < hi2; ++k) key = key * cards_[k] + f[k];
    return key;
  }

  std::vector<std::int64_t> cards_;
  std::unordered_map<std::uint64_t, double> p_;
};

struct LocalAnnotations {
  // per box i: dictionary id of the transcript before using box i
  std::vector<std::vector<int>> transcript_id;
  // per action j: dictionary id of the transcript before action j
  std::vector<std::vector<int>> action_transcript_id;
  int dict_size = 0;
};

LocalAnnotations annotate(const std::vector<LocalTrajectory>& locals, int external) {
  LocalAnnotations ann;
  std::map<History, int> dict;
  ann.transcript_id.resize(locals.size());
  ann.action_transcript_id.resize(locals.size());
  for (size_t t = 0; t < locals.size(); ++t) {
    const auto& lt = locals[t];
    const int n = static_cast<int>(lt.order.size());
    std::vector<int> prefix_id(n);
    History h;
    h.external = external;
    for (int j = 0; j < n; ++j) {
      auto [it, inserted] = dict.try_emplace(h, static_cast<int>(dict.size()));
      prefix_id[j] = it->second;
      const int box = lt.order[j];
      h.used.push_back({box, lt.inputs[box], lt.outputs[box]});
    }
    ann.action_transcript_id[t] = prefix_id;
    ann.transcript_id[t].resize(n);
    for (int i = 0; i < n; ++i) ann.transcript_id[t][i] = prefix_id[lt.position[i]];
  }
  ann.dict_size = static_cast<int>(dict.size());
  return ann;
}

}  // namespace

LemmaResiduals verify_structure_lemmas(const WiringInstance& instance, int x_prime, int y_prime) {
  check_instance(instance);
  const int n = static_cast<int>(instance.boxes.size());
  const auto alice = enumerate_locals(instance.alice, x_prime);
  const auto bob = enumerate_locals(instance.bob, y_prime);
  const auto ann_a = annotate(alice, x_prime);
  const auto ann_b = annotate(bob, y_prime);
  const std::int64_t na_locals = static_cast<std::int64_t>(alice.size());
  const std::int64_t nb_locals = static_cast<std::int64_t>(bob.size());

  LemmaResiduals res;
  for (int i = 0; i < n; ++i) {
    const auto& box = instance.boxes[i];
    const std::int64_t ta = ann_a.dict_size, tb = ann_b.dict_size;
    const std::int64_t ac = box.a_card(), bc = box.b_card(), xc = box.x_card(), yc = box.y_card();

    // (i)  I(A_i B_i ; T_i S_i Pi_i Omega_i | X_i Y_i)
    SparseJoint j1({ac, bc, ta, tb, n, n, xc, yc});
    // (ii) I(A_i ; S_i Y_i Omega_i | T_i X_i Pi_i) and the mirror
    SparseJoint j2a({ac, tb, yc, n, ta, xc, n});
    SparseJoint j2b({bc, ta, xc, n, tb, yc, n});
    // (iii) I(A_i ; B_[n] Y_[n] Omega | T_i X_i Pi_i B_i Y_i Omega_i), mirror
    SparseJoint j3a({ac, nb_locals, ta, xc, n, bc, yc, n});
    SparseJoint j3b({bc, na_locals, tb, yc, n, ac, xc, n});

    for (std::int64_t u = 0; u < na_locals; ++u) {
      const auto& al = alice[u];
      for (std::int64_t v = 0; v < nb_locals; ++v) {
        const auto& bl = bob[v];
        const double p = al.weight * bl.weight * boxes_factor(instance, al, bl);
        if (p <= 0.0) continue;
        const int tid = ann_a.transcript_id[u][i];
        const int sid = ann_b.transcript_id[v][i];
        j1.add({al.outputs[i], bl.outputs[i], tid, sid, al.position[i], bl.position[i],
                al.inputs[i], bl.inputs[i]},
               p);
        j2a.add({al.outputs[i], sid, bl.inputs[i], bl.position[i], tid, al.inputs[i],
                 al.position[i]},
                p);
        j2b.add({bl.outputs[i], tid, al.inputs[i], al.position[i], sid, bl.inputs[i],
                 bl.position[i]},
                p);
        j3a.add({al.outputs[i], static_cast<int>(v), tid, al.inputs[i], al.position[i],
                 bl.outputs[i], bl.inputs[i], bl.position[i]},
                p);
        j3b.add({bl.outputs[i], static_cast<int>(u), sid, bl.inputs[i], bl.position[i],
                 al.outputs[i], al.inputs[i], al.position[i]},
                p);
      }
    }
    res.transcript_independence = std::max(res.transcript_independence, std::abs(j1.cmi(2, 4)));
    res.cross_independence = std::max({res.cross_independence, std::abs(j2a.cmi(1, 3)),
                                       std::abs(j2b.cmi(1, 3))});
    res.output_locality =
        std::max({res.output_locality, std::abs(j3a.cmi(1, 1)), std::abs(j3b.cmi(1, 1))});
  }

  // (iv) I(Xt_j Pit_j ; B_[n] Y_[n] Omega | Tt_j) per action j, and the mirror
  for (int j = 0; j < n; ++j) {
    std::int64_t max_in_a = 0, max_in_b = 0;
    for (const auto& b : instance.boxes) {
      max_in_a = std::max<std::int64_t>(max_in_a, b.x_card());
      max_in_b = std::max<std::int64_t>(max_in_b, b.y_card());
    }
    SparseJoint j4a({max_in_a, n, nb_locals, ann_a.dict_size});
    SparseJoint j4b({max_in_b, n, na_locals, ann_b.dict_size});
    for (std::int64_t u = 0; u < na_locals; ++u) {
      const auto& al = alice[u];
      for (std::int64_t v = 0; v < nb_locals; ++v) {
        const auto& bl = bob[v];
        const double p = al.weight * bl.weight * boxes_factor(instance, al, bl);
        if (p <= 0.0) continue;
        const int box_a = al.order[j];
        const int box_b = bl.order[j];
        j4a.add({al.inputs[box_a], box_a, static_cast<int>(v), ann_a.action_transcript_id[u][j]},
                p);
        j4b.add({bl.inputs[box_b], box_b, static_cast<int>(u), ann_b.action_transcript_id[v][j]},
                p);
      }
    }
    res.choice_locality =
        std::max({res.choice_locality, std::abs(j4a.cmi(2, 1)), std::abs(j4b.cmi(2, 1))});
  }
  return res;
}

double verify_chain_rule_lemma(const WiringInstance& instance, int x_prime, int y_prime) {
  check_instance(instance);
  const int n = static_cast<int>(instance.boxes.size());
  const auto alice = enumerate_locals(instance.alice, x_prime);
  const auto bob = enumerate_locals(instance.bob, y_prime);
  const auto ann_a = annotate(alice, x_prime);
  const auto ann_b = annotate(bob, y_prime);
  const std::int64_t na_locals = static_cast<std::int64_t>(alice.size());
  const std::int64_t nb_locals = static_cast<std::int64_t>(bob.size());

  std::int64_t max_in_a = 0, max_in_b = 0, max_out_a = 0, max_out_b = 0;
  for (const auto& b : instance.boxes) {
    max_in_a = std::max<std::int64_t>(max_in_a, b.x_card());
    max_in_b = std::max<std::int64_t>(max_in_b, b.y_card());
    max_out_a = std::max<std::int64_t>(max_out_a, b.a_card());
    max_out_b = std::max<std::int64_t>(max_out_b, b.b_card());
  }

  // H(A_[n] X_[n] Pi) is the entropy of the Alice-local marginal.
  SparseJoint marg_a({na_locals}), marg_b({nb_locals});
  std::vector<SparseJoint> step_a, step_b;    // (Xt_j, Pit_j | Tt_j)
  std::vector<SparseJoint> out_a, out_b;      // (A_i | T_i X_i Pi_i)
  for (int k = 0; k < n; ++k) {
    step_a.emplace_back(std::vector<std::int64_t>{max_in_a, n, ann_a.dict_size});
    step_b.emplace_back(std::vector<std::int64_t>{max_in_b, n, ann_b.dict_size});
    out_a.emplace_back(std::vector<std::int64_t>{max_out_a, ann_a.dict_size, max_in_a, n});
    out_b.emplace_back(std::vector<std::int64_t>{max_out_b, ann_b.dict_size, max_in_b, n});
  }

  for (std::int64_t u = 0; u < na_locals; ++u) {
    const auto& al = alice[u];
    for (std::int64_t v = 0; v < nb_locals; ++v) {
      const auto& bl = bob[v];
      const double p = al.weight * bl.weight * boxes_factor(instance, al, bl);
      if (p <= 0.0) continue;
      marg_a.add({static_cast<int>(u)}, p);
      marg_b.add({static_cast<int>(v)}, p);
      for (int j = 0; j < n; ++j) {
        const int box_a = al.order[j];
        const int box_b = bl.order[j];
        step_a[j].add({al.inputs[box_a], box_a, ann_a.action_transcript_id[u][j]}, p);
        step_b[j].add({bl.inputs[box_b], box_b, ann_b.action_transcript_id[v][j]}, p);
      }
      for (int i = 0; i < n; ++i) {
        out_a[i].add({al.outputs[i], ann_a.transcript_id[u][i], al.inputs[i], al.position[i]}, p);
        out_b[i].add({bl.outputs[i], ann_b.transcript_id[v][i], bl.inputs[i], bl.position[i]}, p);
      }
    }
  }

  double rhs_a = 0.0, rhs_b = 0.0;
  for (int k = 0; k < n; ++k) {
    rhs_a += step_a[k].conditional_entropy(2) + out_a[k].conditional_entropy(1);
    rhs_b += step_b[k].conditional_entropy(2) + out_b[k].conditional_entropy(1);
  }
  return std::max(std::abs(marg_a.entropy() - rhs_a), std::abs(marg_b.entropy() - rhs_b));
}

}  // namespace nlbox
