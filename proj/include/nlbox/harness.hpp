#pragma once

#include <cstdint>
#include <vector>

#include "nlbox/box.hpp"
#include "nlbox/mc_ribbon.hpp"
#include "nlbox/report.hpp"
#include "nlbox/wiring.hpp"

namespace nlbox {

// rho(derived) <= max_i rho(box_i) + 1e-9 on random boxes with random
// adaptive strategies.
FuzzReport fuzz_rho_monotonicity(int n_boxes, int n_cases, std::uint64_t seed);

// Every grid point robustly inside the intersection of the input boxes'
// variance ribbons (margin above the boundary band) stays inside the derived
// box's ribbon.
FuzzReport fuzz_mc_ribbon_monotonicity(int n_boxes, int n_cases,
                                       const std::vector<RibbonPoint>& grid, std::uint64_t seed,
                                       double boundary_band = 1e-6);

// lambda1 I(U; Alice view) + lambda2 I(U; Bob view) <= I(U; both) on random
// channels over the trajectory joint, cycling through the external inputs.
FuzzReport check_hc_wiring_inequality(const WiringInstance& instance, RibbonPoint pt,
                                      int n_channels, std::uint64_t seed, int u_card = 3);

struct IsotropicRow {
  double eta = 0.0;
  double rho = 0.0;
  double chsh = 0.0;
  double mc_inf_ratio = 0.0;
};

std::vector<IsotropicRow> isotropic_scan(const std::vector<double>& eta_grid);
std::string isotropic_scan_csv(const std::vector<IsotropicRow>& rows);

// Random binary boxes constrained to CHSH >= (1 + eta) / 2 must have
// rho >= eta - 1e-9. Requires eta >= 1/sqrt(2).
FuzzReport chsh_rho_frontier(double eta, int n_samples, std::uint64_t seed);

// Numerical check of the common-randomness pivot: a mixture with
// CHSH >= (1 + eta2) / 2 must contain a weighted component at or above that
// threshold, whose maximal correlation is then at least eta2 when
// eta2 >= 1/sqrt(2).
struct MixturePivot {
  bool hypothesis_met = false;
  int component = -1;
  double component_weight = 0.0;
  double component_chsh = 0.0;
  double component_rho = 0.0;
  bool ok = false;
};

MixturePivot common_randomness_argument(double eta2, const std::vector<NoSignalingBox>& boxes,
                                        const Eigen::VectorXd& weights);

// Shared case generator for the wiring campaigns.
WiringInstance random_wiring_instance(int n_boxes, std::uint64_t case_seed, int external_card = 2,
                                      int final_card = 2);

}  // namespace nlbox
