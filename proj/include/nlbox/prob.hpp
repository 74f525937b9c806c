#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace nlbox {

inline constexpr double kSupportEpsilon = 1e-12;
inline constexpr std::int64_t kDefaultMaxTableEntries = 10'000'000;

// Bipartite distribution p(a, b) over finite alphabets with cached marginals.
// Immutable after construction; all operations below are pure functions.
class JointDistribution {
 public:
  explicit JointDistribution(Eigen::MatrixXd probs, double sum_tolerance = 1e-12);

  int a_card() const { return static_cast<int>(p_.rows()); }
  int b_card() const { return static_cast<int>(p_.cols()); }
  const Eigen::MatrixXd& probs() const { return p_; }
  const Eigen::VectorXd& marginal_a() const { return pa_; }
  const Eigen::VectorXd& marginal_b() const { return pb_; }
  bool in_support(int a, int b) const { return p_(a, b) > kSupportEpsilon; }

 private:
  Eigen::MatrixXd p_;
  Eigen::VectorXd pa_, pb_;
};

// Real functions on A x B are plain matrices aligned with the probability
// table; every operator below weights by p, so off-support entries never
// contribute.
double expectation(const JointDistribution& d, const Eigen::MatrixXd& f);
double variance(const JointDistribution& d, const Eigen::MatrixXd& f);

// E_{B|A}[f] as a function of a (zero at symbols with no marginal mass).
Eigen::VectorXd conditional_mean_given_a(const JointDistribution& d, const Eigen::MatrixXd& f);
Eigen::VectorXd conditional_mean_given_b(const JointDistribution& d, const Eigen::MatrixXd& f);

struct VarianceDecomposition {
  double total;
  double var_of_cond_mean_a;   // Var_A E_{B|A}[f]
  double mean_of_cond_var_a;   // E_A Var_{B|A}[f]
  double var_of_cond_mean_b;
  double mean_of_cond_var_b;
};
VarianceDecomposition variance_decomposition(const JointDistribution& d, const Eigen::MatrixXd& f);

// p(a1 a2, b1 b2) = p(a1, b1) q(a2, b2); row/col index = a1 * a2_card + a2.
JointDistribution product(const JointDistribution& p, const JointDistribution& q);

// ka(a2, a1) = p(a2 | a1), kb(b2, b1) = p(b2 | b1); both column-stochastic.
JointDistribution apply_local_maps(const JointDistribution& d, const Eigen::MatrixXd& ka,
                                   const Eigen::MatrixXd& kb);

double entropy(const JointDistribution& d);            // H(AB), nats
double entropy_marginal_a(const JointDistribution& d); // H(A)
double entropy_marginal_b(const JointDistribution& d); // H(B)

// Dense distribution over a tuple of named finite variables. Flat storage,
// last variable fastest. Capped at max_entries (the trajectory joints of the
// wiring engine pass a larger cap than the default).
class TableDistribution {
 public:
  struct Variable {
    std::string name;
    int card;
  };

  TableDistribution(std::vector<Variable> variables, Eigen::VectorXd probs,
                    std::int64_t max_entries = kDefaultMaxTableEntries,
                    double sum_tolerance = 1e-10);

  const std::vector<Variable>& variables() const { return vars_; }
  std::int64_t size() const { return p_.size(); }
  const Eigen::VectorXd& probs() const { return p_; }

  int index_of(const std::string& name) const;  // throws on unknown name
  std::int64_t stride(int var) const { return strides_[var]; }
  int card(int var) const { return vars_[var].card; }

  double prob(std::span<const int> assignment) const;

  TableDistribution marginal(const std::vector<std::string>& keep) const;

 private:
  std::vector<Variable> vars_;
  std::vector<std::int64_t> strides_;
  Eigen::VectorXd p_;
};

// Entropy of the marginal on vars, in nats; 0 ln 0 = 0.
double entropy(const TableDistribution& t, const std::vector<std::string>& vars);
double entropy(const TableDistribution& t);

// I(A; B | C); the three groups must be disjoint. Clamped to 0 when within
// 1e-12 of zero from below.
double mutual_information(const TableDistribution& t, const std::vector<std::string>& vars_a,
                          const std::vector<std::string>& vars_b,
                          const std::vector<std::string>& vars_c = {});

// I(A; B; C | D) = I(A; B | D) - I(A; B | CD)
double triple_information(const TableDistribution& t, const std::vector<std::string>& vars_a,
                          const std::vector<std::string>& vars_b,
                          const std::vector<std::string>& vars_c,
                          const std::vector<std::string>& vars_d = {});

// Product of distributions over disjoint variable-name sets is a table over
// the concatenated variables.
TableDistribution tensor(const TableDistribution& s, const TableDistribution& t);

// Extends t with a fresh variable "name" of cardinality u_card distributed
// according to rows(i, u) = p(u | assignment i).
TableDistribution with_channel(const TableDistribution& t, const std::string& name, int u_card,
                               const Eigen::MatrixXd& rows);

}  // namespace nlbox
