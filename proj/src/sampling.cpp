#include "nlbox/sampling.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace nlbox {

JointDistribution random_distribution(int a_card, int b_card, Rng& rng) {
  Eigen::MatrixXd p(a_card, b_card);
  for (int a = 0; a < a_card; ++a)
    for (int b = 0; b < b_card; ++b) p(a, b) = rng.exponential();
  p /= p.sum();
  return JointDistribution(std::move(p));
}

namespace {

std::vector<Eigen::MatrixXd> local_vertex(int x_card, int y_card, int a_card, int b_card,
                                          Rng& rng) {
  std::vector<int> fa(x_card), gb(y_card);
  for (int x = 0; x < x_card; ++x) fa[x] = rng.below(a_card);
  for (int y = 0; y < y_card; ++y) gb[y] = rng.below(b_card);
  std::vector<Eigen::MatrixXd> cond(x_card * y_card, Eigen::MatrixXd::Zero(a_card, b_card));
  for (int x = 0; x < x_card; ++x)
    for (int y = 0; y < y_card; ++y) cond[x * y_card + y](fa[x], gb[y]) = 1.0;
  return cond;
}

// a xor b = xy xor rx xor sy xor t with uniform outputs
std::vector<Eigen::MatrixXd> pr_vertex(int r, int s, int t) {
  std::vector<Eigen::MatrixXd> cond(4, Eigen::MatrixXd::Zero(2, 2));
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          if ((a ^ b) == ((x & y) ^ (r & x) ^ (s & y) ^ t)) cond[x * 2 + y](a, b) = 0.5;
  return cond;
}

}  // namespace

NoSignalingBox random_box(int x_card, int y_card, int a_card, int b_card, Rng& rng,
                          int n_local_vertices) {
  std::vector<std::vector<Eigen::MatrixXd>> vertices;
  for (int k = 0; k < n_local_vertices; ++k)
    vertices.push_back(local_vertex(x_card, y_card, a_card, b_card, rng));
  if (x_card == 2 && y_card == 2 && a_card == 2 && b_card == 2)
    vertices.push_back(pr_vertex(rng.below(2), rng.below(2), rng.below(2)));

  const Eigen::VectorXd w = rng.dirichlet(static_cast<int>(vertices.size()));
  std::vector<Eigen::MatrixXd> cond(x_card * y_card, Eigen::MatrixXd::Zero(a_card, b_card));
  for (size_t k = 0; k < vertices.size(); ++k)
    for (int xy = 0; xy < x_card * y_card; ++xy) cond[xy] += w(k) * vertices[k][xy];
  return NoSignalingBox(x_card, y_card, a_card, b_card, std::move(cond));
}

Eigen::MatrixXd random_stochastic_map(int out_card, int in_card, Rng& rng) {
  Eigen::MatrixXd k(out_card, in_card);
  for (int j = 0; j < in_card; ++j) k.col(j) = rng.dirichlet(out_card);
  return k;
}

Eigen::MatrixXd random_zero_mean_unit_function(const JointDistribution& d, Rng& rng) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(d.a_card(), d.b_card());
    for (int a = 0; a < d.a_card(); ++a)
      for (int b = 0; b < d.b_card(); ++b)
        if (d.in_support(a, b)) f(a, b) = rng.gaussian();
    f.array() -= expectation(d, f);
    for (int a = 0; a < d.a_card(); ++a)
      for (int b = 0; b < d.b_card(); ++b)
        if (!d.in_support(a, b)) f(a, b) = 0.0;
    const double v = expectation(d, f.cwiseProduct(f));
    if (v > 1e-12) return f / std::sqrt(v);
  }
  throw std::runtime_error("random_zero_mean_unit_function: support admits no non-constant f");
}

BinaryBoxParams random_frontier_params(double eta, Rng& rng) {
  if (eta < 1.0 / std::sqrt(2.0) - 1e-12 || eta > 1.0)
    throw std::invalid_argument("random_frontier_params: eta must lie in [1/sqrt(2), 1]");
  const double span = std::min(1.0, 2.0 * (1.0 - eta));
  for (int attempt = 0; attempt < 100000; ++attempt) {
    BinaryBoxParams p;
    for (int x = 0; x < 2; ++x) p.alpha(x) = rng.uniform(-span, span);
    for (int y = 0; y < 2; ++y) p.beta(y) = rng.uniform(-span, span);

    // w_xy = (-1)^(xy) zeta_xy; the target sum(w) >= 4 eta must fit under the
    // per-coordinate maxima allowed by positivity.
    double hi[2][2], len[2][2];
    double s_max = 0.0, total_len = 0.0;
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        const double zhi = 1.0 - std::abs(p.alpha(x) - p.beta(y));
        const double zlo = std::abs(p.alpha(x) + p.beta(y)) - 1.0;
        hi[x][y] = (x == 1 && y == 1) ? -zlo : zhi;
        len[x][y] = zhi - zlo;
        s_max += hi[x][y];
        total_len += len[x][y];
      }
    if (s_max < 4.0 * eta) continue;

    const double target = (total_len < 1e-15)
                              ? s_max
                              : 4.0 * eta + rng.uniform01() * (s_max - 4.0 * eta);
    double deficit = s_max - target;
    if (deficit > total_len + 1e-12) continue;

    double give[2][2] = {};
    if (deficit > 0.0 && total_len > 0.0) {
      const Eigen::VectorXd tilt = rng.dirichlet(4);
      bool fits = true;
      for (int x = 0; x < 2 && fits; ++x)
        for (int y = 0; y < 2; ++y)
          if (tilt(2 * x + y) * deficit > len[x][y]) {
            fits = false;
            break;
          }
      for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
          give[x][y] = fits ? tilt(2 * x + y) * deficit : deficit * len[x][y] / total_len;
    }
    for (int x = 0; x < 2; ++x)
      for (int y = 0; y < 2; ++y) {
        const double w = hi[x][y] - give[x][y];
        p.zeta(x, y) = (x == 1 && y == 1) ? -w : w;
      }
    return p;
  }
  throw std::runtime_error("random_frontier_params: sampling failed to find feasible parameters");
}

}  // namespace nlbox
