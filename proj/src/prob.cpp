#include "nlbox/prob.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace nlbox {

namespace {

double neg_p_log_p(double p) { return p > 0.0 ? -p * std::log(p) : 0.0; }

void check_probability_mass(Eigen::Ref<Eigen::VectorXd> p, double sum_tolerance,
                            const char* what) {
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) < -1e-13) throw std::invalid_argument(std::string(what) + ": negative entry");
    if (p(i) < 0.0) p(i) = 0.0;
  }
  const double total = p.sum();
  if (std::abs(total - 1.0) > sum_tolerance)
    throw std::invalid_argument(std::string(what) + ": mass " + std::to_string(total) +
                                " not within tolerance of 1");
}

}  // namespace

JointDistribution::JointDistribution(Eigen::MatrixXd probs, double sum_tolerance)
    : p_(std::move(probs)) {
  if (p_.rows() < 1 || p_.cols() < 1)
    throw std::invalid_argument("JointDistribution: empty alphabet");
  Eigen::Map<Eigen::VectorXd> flat(p_.data(), p_.size());
  check_probability_mass(flat, sum_tolerance, "JointDistribution");
  pa_ = p_.rowwise().sum();
  pb_ = p_.colwise().sum().transpose();
}

double expectation(const JointDistribution& d, const Eigen::MatrixXd& f) {
  return (d.probs().array() * f.array()).sum();
}

double variance(const JointDistribution& d, const Eigen::MatrixXd& f) {
  const double m = expectation(d, f);
  return (d.probs().array() * (f.array() - m).square()).sum();
}

Eigen::VectorXd conditional_mean_given_a(const JointDistribution& d, const Eigen::MatrixXd& f) {
  Eigen::VectorXd out = (d.probs().array() * f.array()).rowwise().sum().matrix();
  for (int a = 0; a < d.a_card(); ++a)
    out(a) = d.marginal_a()(a) > kSupportEpsilon ? out(a) / d.marginal_a()(a) : 0.0;
  return out;
}

Eigen::VectorXd conditional_mean_given_b(const JointDistribution& d, const Eigen::MatrixXd& f) {
  Eigen::VectorXd out = (d.probs().array() * f.array()).colwise().sum().matrix().transpose();
  for (int b = 0; b < d.b_card(); ++b)
    out(b) = d.marginal_b()(b) > kSupportEpsilon ? out(b) / d.marginal_b()(b) : 0.0;
  return out;
}

VarianceDecomposition variance_decomposition(const JointDistribution& d,
                                             const Eigen::MatrixXd& f) {
  VarianceDecomposition r{};
  r.total = variance(d, f);
  const double mean = expectation(d, f);

  const Eigen::VectorXd ma = conditional_mean_given_a(d, f);
  r.var_of_cond_mean_a =
      (d.marginal_a().array() * (ma.array() - mean).square()).sum();
  r.mean_of_cond_var_a = 0.0;
  for (int a = 0; a < d.a_card(); ++a)
    for (int b = 0; b < d.b_card(); ++b)
      r.mean_of_cond_var_a += d.probs()(a, b) * (f(a, b) - ma(a)) * (f(a, b) - ma(a));

  const Eigen::VectorXd mb = conditional_mean_given_b(d, f);
  r.var_of_cond_mean_b =
      (d.marginal_b().array() * (mb.array() - mean).square()).sum();
  r.mean_of_cond_var_b = 0.0;
  for (int a = 0; a < d.a_card(); ++a)
    for (int b = 0; b < d.b_card(); ++b)
      r.mean_of_cond_var_b += d.probs()(a, b) * (f(a, b) - mb(b)) * (f(a, b) - mb(b));
  return r;
}

JointDistribution product(const JointDistribution& p, const JointDistribution& q) {
  Eigen::MatrixXd out(p.a_card() * q.a_card(), p.b_card() * q.b_card());
  for (int a1 = 0; a1 < p.a_card(); ++a1)
    for (int a2 = 0; a2 < q.a_card(); ++a2)
      for (int b1 = 0; b1 < p.b_card(); ++b1)
        for (int b2 = 0; b2 < q.b_card(); ++b2)
          out(a1 * q.a_card() + a2, b1 * q.b_card() + b2) = p.probs()(a1, b1) * q.probs()(a2, b2);
  return JointDistribution(std::move(out));
}

JointDistribution apply_local_maps(const JointDistribution& d, const Eigen::MatrixXd& ka,
                                   const Eigen::MatrixXd& kb) {
  if (ka.cols() != d.a_card() || kb.cols() != d.b_card())
    throw std::invalid_argument("apply_local_maps: kernel shape mismatch");
  Eigen::MatrixXd out = ka * d.probs() * kb.transpose();
  return JointDistribution(std::move(out), 1e-9);
}

double entropy(const JointDistribution& d) {
  double h = 0.0;
  for (int a = 0; a < d.a_card(); ++a)
    for (int b = 0; b < d.b_card(); ++b) h += neg_p_log_p(d.probs()(a, b));
  return h;
}

double entropy_marginal_a(const JointDistribution& d) {
  double h = 0.0;
  for (int a = 0; a < d.a_card(); ++a) h += neg_p_log_p(d.marginal_a()(a));
  return h;
}

double entropy_marginal_b(const JointDistribution& d) {
  double h = 0.0;
  for (int b = 0; b < d.b_card(); ++b) h += neg_p_log_p(d.marginal_b()(b));
  return h;
}

TableDistribution::TableDistribution(std::vector<Variable> variables, Eigen::VectorXd probs,
                                     std::int64_t max_entries, double sum_tolerance)
    : vars_(std::move(variables)), p_(std::move(probs)) {
  if (vars_.empty()) throw std::invalid_argument("TableDistribution: no variables");
  std::unordered_set<std::string> names;
  std::int64_t total = 1;
  for (const auto& v : vars_) {
    if (v.card < 1) throw std::invalid_argument("TableDistribution: cardinality must be positive");
    if (!names.insert(v.name).second)
      throw std::invalid_argument("TableDistribution: duplicate variable " + v.name);
    if (total > max_entries / v.card)
      throw std::invalid_argument("TableDistribution: table exceeds entry cap " +
                                  std::to_string(max_entries));
    total *= v.card;
  }
  if (p_.size() != total)
    throw std::invalid_argument("TableDistribution: table size does not match cardinalities");
  strides_.assign(vars_.size(), 1);
  for (int k = static_cast<int>(vars_.size()) - 2; k >= 0; --k)
    strides_[k] = strides_[k + 1] * vars_[k + 1].card;
  check_probability_mass(p_, sum_tolerance, "TableDistribution");
}

int TableDistribution::index_of(const std::string& name) const {
  for (int k = 0; k < static_cast<int>(vars_.size()); ++k)
    if (vars_[k].name == name) return k;
  throw std::invalid_argument("TableDistribution: unknown variable " + name);
}

double TableDistribution::prob(std::span<const int> assignment) const {
  if (assignment.size() != vars_.size())
    throw std::invalid_argument("TableDistribution: assignment arity mismatch");
  std::int64_t idx = 0;
  for (size_t k = 0; k < vars_.size(); ++k) idx += strides_[k] * assignment[k];
  return p_(idx);
}

namespace {

// (stride within t, cardinality, stride within the reduced table) per kept var
struct Reducer {
  std::vector<std::int64_t> in_stride;
  std::vector<int> card;
  std::vector<std::int64_t> out_stride;
  std::int64_t out_size = 1;
};

Reducer make_reducer(const TableDistribution& t, const std::vector<std::string>& keep) {
  Reducer r;
  for (const auto& name : keep) {
    const int k = t.index_of(name);
    r.in_stride.push_back(t.stride(k));
    r.card.push_back(t.card(k));
  }
  r.out_stride.assign(keep.size(), 1);
  for (int k = static_cast<int>(keep.size()) - 2; k >= 0; --k)
    r.out_stride[k] = r.out_stride[k + 1] * r.card[k + 1];
  for (int c : r.card) r.out_size *= c;
  return r;
}

Eigen::VectorXd accumulate_marginal(const TableDistribution& t, const Reducer& r) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(r.out_size);
  const auto& p = t.probs();
  for (std::int64_t i = 0; i < p.size(); ++i) {
    std::int64_t idx = 0;
    for (size_t k = 0; k < r.in_stride.size(); ++k)
      idx += ((i / r.in_stride[k]) % r.card[k]) * r.out_stride[k];
    out(idx) += p(i);
  }
  return out;
}

double marginal_entropy(const TableDistribution& t, const std::vector<std::string>& vars) {
  if (vars.empty()) return 0.0;
  const Eigen::VectorXd m = accumulate_marginal(t, make_reducer(t, vars));
  double h = 0.0;
  for (Eigen::Index i = 0; i < m.size(); ++i) h += neg_p_log_p(m(i));
  return h;
}

std::vector<std::string> joined(std::initializer_list<const std::vector<std::string>*> groups) {
  std::vector<std::string> out;
  for (const auto* g : groups) out.insert(out.end(), g->begin(), g->end());
  return out;
}

void check_disjoint(std::initializer_list<const std::vector<std::string>*> groups) {
  std::unordered_set<std::string> seen;
  for (const auto* g : groups)
    for (const auto& name : *g)
      if (!seen.insert(name).second)
        throw std::invalid_argument("mutual_information: variable groups overlap at " + name);
}

}  // namespace

TableDistribution TableDistribution::marginal(const std::vector<std::string>& keep) const {
  if (keep.empty()) throw std::invalid_argument("marginal: empty variable list");
  const Reducer r = make_reducer(*this, keep);
  Eigen::VectorXd out = accumulate_marginal(*this, r);
  std::vector<Variable> vars;
  for (const auto& name : keep) vars.push_back(vars_[index_of(name)]);
  return TableDistribution(std::move(vars), std::move(out), p_.size(), 1e-9);
}

double entropy(const TableDistribution& t, const std::vector<std::string>& vars) {
  return marginal_entropy(t, vars);
}

double entropy(const TableDistribution& t) {
  double h = 0.0;
  for (Eigen::Index i = 0; i < t.probs().size(); ++i) h += neg_p_log_p(t.probs()(i));
  return h;
}

double mutual_information(const TableDistribution& t, const std::vector<std::string>& vars_a,
                          const std::vector<std::string>& vars_b,
                          const std::vector<std::string>& vars_c) {
  check_disjoint({&vars_a, &vars_b, &vars_c});
  const double hac = marginal_entropy(t, joined({&vars_a, &vars_c}));
  const double hbc = marginal_entropy(t, joined({&vars_b, &vars_c}));
  const double habc = marginal_entropy(t, joined({&vars_a, &vars_b, &vars_c}));
  const double hc = marginal_entropy(t, vars_c);
  double mi = hac + hbc - habc - hc;
  if (mi < 0.0 && mi > -1e-12) mi = 0.0;
  return mi;
}

double triple_information(const TableDistribution& t, const std::vector<std::string>& vars_a,
                          const std::vector<std::string>& vars_b,
                          const std::vector<std::string>& vars_c,
                          const std::vector<std::string>& vars_d) {
  return mutual_information(t, vars_a, vars_b, vars_d) -
         mutual_information(t, vars_a, vars_b, joined({&vars_c, &vars_d}));
}

TableDistribution tensor(const TableDistribution& s, const TableDistribution& t) {
  std::vector<TableDistribution::Variable> vars = s.variables();
  vars.insert(vars.end(), t.variables().begin(), t.variables().end());
  Eigen::VectorXd out(s.size() * t.size());
  for (std::int64_t i = 0; i < s.size(); ++i)
    out.segment(i * t.size(), t.size()) = s.probs()(i) * t.probs();
  return TableDistribution(std::move(vars), std::move(out));
}

TableDistribution with_channel(const TableDistribution& t, const std::string& name, int u_card,
                               const Eigen::MatrixXd& rows) {
  if (rows.rows() != t.size() || rows.cols() != u_card)
    throw std::invalid_argument("with_channel: rows must be size x u_card");
  std::vector<TableDistribution::Variable> vars = t.variables();
  vars.push_back({name, u_card});
  Eigen::VectorXd out(t.size() * u_card);
  for (std::int64_t i = 0; i < t.size(); ++i)
    for (int u = 0; u < u_card; ++u) out(i * u_card + u) = t.probs()(i) * rows(i, u);
  return TableDistribution(std::move(vars), std::move(out), out.size());
}

}  // namespace nlbox
