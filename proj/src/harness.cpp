#include "nlbox/harness.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nlbox/maximal_correlation.hpp"
#include "nlbox/sampling.hpp"

namespace nlbox {

WiringInstance random_wiring_instance(int n_boxes, std::uint64_t case_seed, int external_card,
                                      int final_card) {
  Rng rng(case_seed);
  std::vector<NoSignalingBox> boxes;
  for (int i = 0; i < n_boxes; ++i) boxes.push_back(random_box(2, 2, 2, 2, rng));
  PartyStrategy alice =
      random_strategy(boxes, Side::Alice, external_card, final_card, rng.raw());
  PartyStrategy bob = random_strategy(boxes, Side::Bob, external_card, final_card, rng.raw());
  return WiringInstance{std::move(boxes), std::move(alice), std::move(bob)};
}

namespace {

std::string config_echo(std::initializer_list<std::pair<const char*, double>> kv) {
  std::ostringstream os;
  os << "{";
  bool first = true;
  for (const auto& [k, v] : kv) {
    if (!first) os << ",";
    first = false;
    os << "\"" << k << "\":" << format_double(v);
  }
  os << "}";
  return os.str();
}

}  // namespace

FuzzReport fuzz_rho_monotonicity(int n_boxes, int n_cases, std::uint64_t seed) {
  FuzzReport report;
  report.campaign = "rho-monotonicity";
  report.config_json = config_echo({{"n_boxes", static_cast<double>(n_boxes)},
                                    {"n_cases", static_cast<double>(n_cases)},
                                    {"seed", static_cast<double>(seed)}});
  for (int k = 0; k < n_cases; ++k) {
    const std::uint64_t case_seed = derive_seed(seed, k);
    const WiringInstance instance = random_wiring_instance(n_boxes, case_seed);
    double max_input_rho = 0.0;
    for (const auto& b : instance.boxes) max_input_rho = std::max(max_input_rho, rho_box(b).rho);
    const double derived_rho = rho_box(derived_box(instance)).rho;

    FuzzCase c;
    c.case_id = k;
    c.seed = case_seed;
    c.quantity = "rho(derived)<=max rho(box)";
    c.lhs = derived_rho;
    c.rhs = max_input_rho;
    c.margin = c.lhs - c.rhs;
    c.pass = c.margin <= 1e-9;
    report.add(std::move(c));
  }
  return report;
}

FuzzReport fuzz_mc_ribbon_monotonicity(int n_boxes, int n_cases,
                                       const std::vector<RibbonPoint>& grid, std::uint64_t seed,
                                       double boundary_band) {
  FuzzReport report;
  report.campaign = "mc-ribbon-monotonicity";
  report.config_json = config_echo({{"n_boxes", static_cast<double>(n_boxes)},
                                    {"n_cases", static_cast<double>(n_cases)},
                                    {"grid_points", static_cast<double>(grid.size())},
                                    {"seed", static_cast<double>(seed)},
                                    {"boundary_band", boundary_band}});
  for (int k = 0; k < n_cases; ++k) {
    const std::uint64_t case_seed = derive_seed(seed, k);
    const WiringInstance instance = random_wiring_instance(n_boxes, case_seed);
    const NoSignalingBox derived = derived_box(instance);
    for (const RibbonPoint& pt : grid) {
      double input_margin = 1.0;
      for (const auto& b : instance.boxes)
        input_margin = std::min(input_margin, mc_membership_box(b, pt).min_eigenvalue);
      if (input_margin <= boundary_band) continue;  // not robustly inside the intersection
      const McBoxVerdict v = mc_membership_box(derived, pt);

      FuzzCase c;
      c.case_id = k;
      c.seed = case_seed;
      std::ostringstream q;
      q << "inside at (" << format_double(pt.lambda1) << ";" << format_double(pt.lambda2) << ")";
      c.quantity = q.str();
      c.lhs = -v.min_eigenvalue;
      c.rhs = kPsdTolerance;
      c.margin = c.lhs - c.rhs;
      c.pass = v.inside;
      report.add(std::move(c));
    }
  }
  return report;
}

FuzzReport check_hc_wiring_inequality(const WiringInstance& instance, RibbonPoint pt,
                                      int n_channels, std::uint64_t seed, int u_card) {
  check_instance(instance);
  FuzzReport report;
  report.campaign = "hc-wiring-inequality";
  report.config_json = config_echo({{"lambda1", pt.lambda1},
                                    {"lambda2", pt.lambda2},
                                    {"n_channels", static_cast<double>(n_channels)},
                                    {"seed", static_cast<double>(seed)},
                                    {"u_card", static_cast<double>(u_card)}});
  const int n = static_cast<int>(instance.boxes.size());
  const int xc = instance.alice.external_card();
  const int yc = instance.bob.external_card();

  std::vector<std::string> alice_vars, bob_vars, all_vars;
  for (int i = 0; i < n; ++i) alice_vars.push_back("a" + std::to_string(i + 1));
  for (int i = 0; i < n; ++i) alice_vars.push_back("x" + std::to_string(i + 1));
  alice_vars.push_back("pi");
  for (int i = 0; i < n; ++i) bob_vars.push_back("b" + std::to_string(i + 1));
  for (int i = 0; i < n; ++i) bob_vars.push_back("y" + std::to_string(i + 1));
  bob_vars.push_back("omega");
  all_vars = alice_vars;
  all_vars.insert(all_vars.end(), bob_vars.begin(), bob_vars.end());

  std::vector<TableDistribution> tables;
  for (int xp = 0; xp < xc; ++xp)
    for (int yp = 0; yp < yc; ++yp) tables.push_back(execute(instance, xp, yp));

  Rng rng(seed);
  for (int k = 0; k < n_channels; ++k) {
    const TableDistribution& t = tables[k % tables.size()];
    Eigen::MatrixXd rows(t.size(), u_card);
    for (std::int64_t i = 0; i < t.size(); ++i) rows.row(i) = rng.dirichlet(u_card).transpose();
    const TableDistribution with_u = with_channel(t, "u", u_card, rows);

    const double lhs = pt.lambda1 * mutual_information(with_u, {"u"}, alice_vars) +
                       pt.lambda2 * mutual_information(with_u, {"u"}, bob_vars);
    const double rhs = mutual_information(with_u, {"u"}, all_vars);

    FuzzCase c;
    c.case_id = k;
    c.seed = seed;
    c.quantity = "hc inequality, externals " + std::to_string(k % tables.size());
    c.lhs = lhs;
    c.rhs = rhs;
    c.margin = lhs - rhs;
    c.pass = c.margin <= 1e-9;
    report.add(std::move(c));
  }
  return report;
}

std::vector<IsotropicRow> isotropic_scan(const std::vector<double>& eta_grid) {
  std::vector<IsotropicRow> rows;
  for (double eta : eta_grid) {
    const NoSignalingBox box = isotropic_box(eta);
    IsotropicRow r;
    r.eta = eta;
    r.rho = rho_box(box).rho;
    r.chsh = chsh_value(box);
    r.mc_inf_ratio = mc_inf_ratio_box(box);
    rows.push_back(r);
  }
  return rows;
}

std::string isotropic_scan_csv(const std::vector<IsotropicRow>& rows) {
  std::ostringstream os;
  os << "eta,rho,chsh,mc_inf_ratio\n";
  for (const auto& r : rows)
    os << format_double(r.eta) << "," << format_double(r.rho) << "," << format_double(r.chsh)
       << "," << format_double(r.mc_inf_ratio) << "\n";
  return os.str();
}

FuzzReport chsh_rho_frontier(double eta, int n_samples, std::uint64_t seed) {
  if (eta < 1.0 / std::sqrt(2.0) - 1e-12)
    throw std::invalid_argument("chsh_rho_frontier: eta must be at least 1/sqrt(2)");
  FuzzReport report;
  report.campaign = "chsh-rho-frontier";
  report.config_json = config_echo(
      {{"eta", eta}, {"n_samples", static_cast<double>(n_samples)},
       {"seed", static_cast<double>(seed)}});
  for (int k = 0; k < n_samples; ++k) {
    const std::uint64_t case_seed = derive_seed(seed, k);
    Rng rng(case_seed);
    const BinaryBoxParams params = random_frontier_params(eta, rng);
    const NoSignalingBox box = box_from_binary_params(params);
    const double r = rho_box(box).rho;

    FuzzCase c;
    c.case_id = k;
    c.seed = case_seed;
    c.quantity = "rho>=eta given CHSH>=(1+eta)/2";
    c.lhs = eta;
    c.rhs = r;
    c.margin = c.lhs - c.rhs;
    c.pass = c.margin <= 1e-9;
    report.add(std::move(c));
  }
  return report;
}

MixturePivot common_randomness_argument(double eta2, const std::vector<NoSignalingBox>& boxes,
                                        const Eigen::VectorXd& weights) {
  if (boxes.empty() || weights.size() != static_cast<Eigen::Index>(boxes.size()))
    throw std::invalid_argument("common_randomness_argument: need one weight per component");
  MixturePivot out;
  const double threshold = (1.0 + eta2) / 2.0;
  double mixture_chsh = 0.0;
  for (size_t r = 0; r < boxes.size(); ++r) mixture_chsh += weights(r) * chsh_value(boxes[r]);
  out.hypothesis_met = mixture_chsh >= threshold - 1e-12;
  if (!out.hypothesis_met) {
    out.ok = true;  // nothing to certify
    return out;
  }
  // linearity: the best weighted component reaches the mixture's level
  for (size_t r = 0; r < boxes.size(); ++r) {
    if (weights(r) <= 0.0) continue;
    const double v = chsh_value(boxes[r]);
    if (out.component < 0 || v > out.component_chsh) {
      out.component = static_cast<int>(r);
      out.component_weight = weights(r);
      out.component_chsh = v;
    }
  }
  if (out.component < 0 || out.component_chsh < threshold - 1e-9) return out;  // ok stays false
  out.component_rho = rho_box(boxes[out.component]).rho;
  out.ok = eta2 < 1.0 / std::sqrt(2.0) - 1e-12 || out.component_rho >= eta2 - 1e-9;
  return out;
}

}  // namespace nlbox
