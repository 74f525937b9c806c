#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nlbox/harness.hpp"
#include "nlbox/hc_ribbon.hpp"
#include "nlbox/io.hpp"
#include "nlbox/maximal_correlation.hpp"
#include "nlbox/mc_ribbon.hpp"
#include "nlbox/report.hpp"
#include "nlbox/wiring.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitViolation = 3;

using nlbox::format_double;

int cmd_validate(const std::string& path, double tolerance) {
  const nlbox::RawBoxTable raw = nlbox::load_raw_box_table(path);
  const nlbox::BoxValidation v = nlbox::NoSignalingBox::validate(
      raw.x_card, raw.y_card, raw.a_card, raw.b_card, raw.conditionals, tolerance);
  if (v.ok()) {
    std::cout << "valid\n";
    return kExitOk;
  }
  for (const auto& issue : v.issues) std::cout << issue.detail << "\n";
  std::cout << "worst violation " << format_double(v.worst) << "\n";
  return kExitInvalid;
}

int cmd_measures(const std::string& path, double tolerance, const std::string& format) {
  const nlbox::NoSignalingBox box = nlbox::load_box(path, tolerance);
  const nlbox::BoxRho r = nlbox::rho_box(box);
  const bool binary = box.binary();
  const double chsh = binary ? nlbox::chsh_value(box) : 0.0;
  if (format == "json") {
    std::ostringstream os;
    os << "{\"rho\":" << format_double(r.rho) << ",\"argmax_x\":" << r.x
       << ",\"argmax_y\":" << r.y;
    if (binary) os << ",\"chsh\":" << format_double(chsh);
    os << "}";
    std::cout << os.str() << "\n";
  } else {
    std::cout << "quantity,value\n";
    std::cout << "rho," << format_double(r.rho) << "\n";
    std::cout << "argmax_x," << r.x << "\n";
    std::cout << "argmax_y," << r.y << "\n";
    if (binary) std::cout << "chsh," << format_double(chsh) << "\n";
  }
  return kExitOk;
}

int cmd_ribbon(const std::string& path, const std::string& which, int grid,
               const std::string& out, double tolerance, int restarts, int u_card,
               std::uint64_t seed) {
  const nlbox::NoSignalingBox box = nlbox::load_box(path, tolerance);
  std::ostringstream os;
  if (which == "mc") {
    os << "lambda1,lambda2,inside,margin\n";
    for (int i = 0; i < grid; ++i)
      for (int j = 0; j < grid; ++j) {
        const nlbox::RibbonPoint pt{static_cast<double>(i) / (grid - 1),
                                    static_cast<double>(j) / (grid - 1)};
        const nlbox::McBoxVerdict v = nlbox::mc_membership_box(box, pt);
        os << format_double(pt.lambda1) << "," << format_double(pt.lambda2) << ","
           << (v.inside ? "true" : "false") << "," << format_double(v.min_eigenvalue) << "\n";
      }
  } else if (which == "hc") {
    nlbox::HcOptions opts;
    opts.restarts = restarts;
    opts.u_card = u_card;
    opts.seed = seed;
    os << "lambda1,lambda2,inside,margin,certified\n";
    for (int i = 0; i < grid; ++i)
      for (int j = 0; j < grid; ++j) {
        const nlbox::RibbonPoint pt{static_cast<double>(i) / (grid - 1),
                                    static_cast<double>(j) / (grid - 1)};
        const nlbox::HcBoxVerdict v = nlbox::hc_membership_box(box, pt, opts);
        const bool outside = v.verdict.outside();
        os << format_double(pt.lambda1) << "," << format_double(pt.lambda2) << ","
           << (outside ? "false" : "true") << "," << format_double(-v.verdict.violation) << ","
           << (outside ? "exact" : "heuristic") << "\n";
      }
  } else {
    std::cerr << "ribbon: --which must be mc or hc\n";
    return kExitUsage;
  }
  if (out.empty())
    std::cout << os.str();
  else
    nlbox::write_text_file(out, os.str());
  return kExitOk;
}

int cmd_wire(const std::string& spec, const std::string& out, double tolerance) {
  const nlbox::WiringInstance instance = nlbox::load_wiring(spec, tolerance);
  const nlbox::NoSignalingBox derived = nlbox::derived_box(instance);
  if (!out.empty()) nlbox::save_box(derived, out);

  std::cout << "derived box: " << derived.x_card() << "x" << derived.y_card() << " inputs, "
            << derived.a_card() << "x" << derived.b_card() << " outputs\n";
  if (instance.boxes.size() <= 3) {
    double worst_structure = 0.0, worst_chain = 0.0;
    for (int xp = 0; xp < instance.alice.external_card(); ++xp)
      for (int yp = 0; yp < instance.bob.external_card(); ++yp) {
        worst_structure =
            std::max(worst_structure, nlbox::verify_structure_lemmas(instance, xp, yp).max());
        worst_chain = std::max(worst_chain, nlbox::verify_chain_rule_lemma(instance, xp, yp));
      }
    std::cout << "structure residual " << format_double(worst_structure) << "\n";
    std::cout << "chain-rule residual " << format_double(worst_chain) << "\n";
  } else {
    std::cout << "residual checks skipped (more than 3 boxes)\n";
  }
  return kExitOk;
}

int write_fuzz_outputs(const nlbox::FuzzReport& report, const std::string& out) {
  if (out.empty()) {
    std::cout << nlbox::fuzz_report_summary(report) << "\n";
  } else {
    nlbox::write_text_file(out + ".csv", nlbox::fuzz_report_csv(report));
    nlbox::write_text_file(out + ".json", nlbox::fuzz_report_summary(report));
    std::cout << (report.passed() ? "pass" : "FAIL") << ": " << report.cases_run
              << " cases, worst margin " << format_double(report.worst_margin) << "\n";
  }
  return report.passed() ? kExitOk : kExitViolation;
}

int cmd_fuzz(const std::string& campaign, int cases, int boxes, std::uint64_t seed, int grid,
             int channels, double lambda1, double lambda2, const std::string& out) {
  if (campaign == "rho") {
    return write_fuzz_outputs(nlbox::fuzz_rho_monotonicity(boxes, cases, seed), out);
  }
  if (campaign == "mc") {
    std::vector<nlbox::RibbonPoint> pts;
    for (int i = 0; i < grid; ++i)
      for (int j = 0; j < grid; ++j)
        pts.push_back({static_cast<double>(i) / (grid - 1), static_cast<double>(j) / (grid - 1)});
    return write_fuzz_outputs(nlbox::fuzz_mc_ribbon_monotonicity(boxes, cases, pts, seed), out);
  }
  if (campaign == "hc-ineq") {
    nlbox::FuzzReport merged;
    merged.campaign = "hc-wiring-inequality";
    std::ostringstream cfg;
    cfg << "{\"cases\":" << cases << ",\"boxes\":" << boxes << ",\"seed\":" << seed
        << ",\"channels\":" << channels << ",\"lambda1\":" << format_double(lambda1)
        << ",\"lambda2\":" << format_double(lambda2) << "}";
    merged.config_json = cfg.str();
    for (int k = 0; k < cases; ++k) {
      const std::uint64_t case_seed = nlbox::derive_seed(seed, k);
      const nlbox::WiringInstance instance = nlbox::random_wiring_instance(boxes, case_seed);
      const nlbox::FuzzReport one = nlbox::check_hc_wiring_inequality(
          instance, {lambda1, lambda2}, channels, nlbox::derive_seed(case_seed, 1));
      for (const auto& c : one.cases) {
        nlbox::FuzzCase merged_case = c;
        merged_case.case_id = k;
        merged_case.seed = case_seed;
        merged.add(std::move(merged_case));
      }
    }
    return write_fuzz_outputs(merged, out);
  }
  std::cerr << "fuzz: --campaign must be rho, mc or hc-ineq\n";
  return kExitUsage;
}

int cmd_scan_isotropic(int grid, const std::string& out) {
  std::vector<double> etas;
  for (int i = 0; i < grid; ++i) etas.push_back(static_cast<double>(i) / (grid - 1));
  const std::string csv = nlbox::isotropic_scan_csv(nlbox::isotropic_scan(etas));
  if (out.empty())
    std::cout << csv;
  else
    nlbox::write_text_file(out, csv);
  return kExitOk;
}

int cmd_frontier(double eta, int n, std::uint64_t seed, const std::string& out) {
  return write_fuzz_outputs(nlbox::chsh_rho_frontier(eta, n, seed), out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"monotone measures of non-locality for no-signaling boxes"};
  app.require_subcommand(1);

  double tolerance = nlbox::kNsTolerance;
  std::uint64_t seed = 1;
  std::string out;
  std::string format = "csv";
  int grid = 21;
  int restarts = 64;
  int u_card = 0;

  std::string box_path, which = "mc", spec_path, campaign;
  int cases = 100, boxes = 2, channels = 100, n_samples = 1000;
  double eta = 0.75, lambda1 = 0.5, lambda2 = 0.5;

  auto* validate = app.add_subcommand("validate", "check a box file against no-signaling");
  validate->add_option("box", box_path)->required();
  validate->add_option("--tolerance", tolerance);

  auto* measures = app.add_subcommand("measures", "maximal correlation and CHSH of a box");
  measures->add_option("box", box_path)->required();
  measures->add_option("--tolerance", tolerance);
  measures->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}));

  auto* ribbon = app.add_subcommand("ribbon", "membership scan over the lambda grid");
  ribbon->add_option("box", box_path)->required();
  ribbon->add_option("--which", which)->check(CLI::IsMember({"mc", "hc"}));
  ribbon->add_option("--grid", grid);
  ribbon->add_option("--out", out);
  ribbon->add_option("--tolerance", tolerance);
  ribbon->add_option("--restarts", restarts);
  ribbon->add_option("--u-card", u_card);
  ribbon->add_option("--seed", seed);

  auto* wire = app.add_subcommand("wire", "execute a wiring spec and extract the derived box");
  wire->add_option("spec", spec_path)->required();
  wire->add_option("--out", out);
  wire->add_option("--tolerance", tolerance);

  auto* fuzz = app.add_subcommand("fuzz", "randomized monotonicity campaigns");
  fuzz->add_option("--campaign", campaign)->required()->check(
      CLI::IsMember({"rho", "mc", "hc-ineq"}));
  fuzz->add_option("--cases", cases);
  fuzz->add_option("--boxes", boxes);
  fuzz->add_option("--seed", seed);
  fuzz->add_option("--grid", grid);
  fuzz->add_option("--channels", channels);
  fuzz->add_option("--lambda1", lambda1);
  fuzz->add_option("--lambda2", lambda2);
  fuzz->add_option("--out", out);

  auto* scan = app.add_subcommand("scan-isotropic", "eta, rho, CHSH and inf-ratio table");
  scan->add_option("--grid", grid);
  scan->add_option("--out", out);

  auto* frontier = app.add_subcommand("frontier", "CHSH-constrained boxes against rho >= eta");
  frontier->add_option("--eta", eta)->required();
  frontier->add_option("--n", n_samples);
  frontier->add_option("--seed", seed);
  frontier->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(box_path, tolerance);
    if (measures->parsed()) return cmd_measures(box_path, tolerance, format);
    if (ribbon->parsed())
      return cmd_ribbon(box_path, which, grid, out, tolerance, restarts, u_card, seed);
    if (wire->parsed()) return cmd_wire(spec_path, out, tolerance);
    if (fuzz->parsed())
      return cmd_fuzz(campaign, cases, boxes, seed, grid, channels, lambda1, lambda2, out);
    if (scan->parsed()) return cmd_scan_isotropic(grid, out);
    if (frontier->parsed()) return cmd_frontier(eta, n_samples, seed, out);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
