#include "nlbox/hc_ribbon.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "nlbox/rng.hpp"

namespace nlbox {

namespace {

constexpr double kLogFloor = -745.0;  // below exp underflow

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

struct Cells {
  std::vector<int> a, b;
  Eigen::VectorXd p;
  int a_card = 0, b_card = 0;
};

Cells support_cells(const JointDistribution& d) {
  Cells c;
  c.a_card = d.a_card();
  c.b_card = d.b_card();
  for (int a = 0; a < d.a_card(); ++a)
    for (int b = 0; b < d.b_card(); ++b)
      if (d.in_support(a, b)) {
        c.a.push_back(a);
        c.b.push_back(b);
      }
  c.p.resize(c.a.size());
  for (size_t i = 0; i < c.a.size(); ++i) c.p(i) = d.probs()(c.a[i], c.b[i]);
  return c;
}

// Joint statistics of p(cell) W(u | cell) needed by both the objective and
// the gradient.
struct ChannelStats {
  Eigen::VectorXd pu;          // p(u)
  Eigen::MatrixXd pau, pbu;    // p(a, u), p(b, u)
  double objective = 0.0;
};

ChannelStats channel_stats(const Cells& c, const JointDistribution& d, RibbonPoint pt,
                           const Eigen::MatrixXd& w) {
  const int n = static_cast<int>(c.a.size());
  const int u_card = static_cast<int>(w.cols());
  ChannelStats s;
  s.pu = Eigen::VectorXd::Zero(u_card);
  s.pau = Eigen::MatrixXd::Zero(c.a_card, u_card);
  s.pbu = Eigen::MatrixXd::Zero(c.b_card, u_card);
  for (int i = 0; i < n; ++i)
    for (int u = 0; u < u_card; ++u) {
      const double m = c.p(i) * w(i, u);
      s.pu(u) += m;
      s.pau(c.a[i], u) += m;
      s.pbu(c.b[i], u) += m;
    }

  // I(U;AB) = sum p(cell) W ln(W / p(u))
  double i_uab = 0.0;
  for (int i = 0; i < n; ++i)
    for (int u = 0; u < u_card; ++u)
      if (w(i, u) > 0.0 && s.pu(u) > 0.0)
        i_uab += c.p(i) * w(i, u) * std::log(w(i, u) / s.pu(u));

  const double hu = -s.pu.unaryExpr([](double p) { return xlogx(p); }).sum();
  double hua = 0.0, hub = 0.0;
  for (int a = 0; a < c.a_card; ++a)
    for (int u = 0; u < u_card; ++u) hua -= xlogx(s.pau(a, u));
  for (int b = 0; b < c.b_card; ++b)
    for (int u = 0; u < u_card; ++u) hub -= xlogx(s.pbu(b, u));
  double ha = 0.0, hb = 0.0;
  for (int a = 0; a < c.a_card; ++a) ha -= xlogx(d.marginal_a()(a));
  for (int b = 0; b < c.b_card; ++b) hb -= xlogx(d.marginal_b()(b));

  const double i_ua = ha + hu - hua;
  const double i_ub = hb + hu - hub;
  s.objective = i_uab - pt.lambda1 * i_ua - pt.lambda2 * i_ub;
  return s;
}

// Scaled gradient of the objective with respect to W(u | cell), divided by
// p(cell) so the exponentiated step treats every row uniformly.
Eigen::MatrixXd scaled_gradient(const Cells& c, const JointDistribution& d, RibbonPoint pt,
                                const Eigen::MatrixXd& w, const ChannelStats& s) {
  const int n = static_cast<int>(c.a.size());
  const int u_card = static_cast<int>(w.cols());
  Eigen::MatrixXd g(n, u_card);
  for (int i = 0; i < n; ++i) {
    const double log_pa = std::log(d.marginal_a()(c.a[i]));
    const double log_pb = std::log(d.marginal_b()(c.b[i]));
    for (int u = 0; u < u_card; ++u) {
      const double log_w = w(i, u) > 0.0 ? std::log(w(i, u)) : kLogFloor;
      const double log_pu = s.pu(u) > 0.0 ? std::log(s.pu(u)) : kLogFloor;
      const double log_pau = s.pau(c.a[i], u) > 0.0 ? std::log(s.pau(c.a[i], u)) : kLogFloor;
      const double log_pbu = s.pbu(c.b[i], u) > 0.0 ? std::log(s.pbu(c.b[i], u)) : kLogFloor;
      g(i, u) = (log_w - log_pu) - pt.lambda1 * (log_pau - log_pa - log_pu) -
                pt.lambda2 * (log_pbu - log_pb - log_pu);
    }
  }
  return g;
}

Eigen::MatrixXd eg_step(const Eigen::MatrixXd& w, const Eigen::MatrixXd& grad, double eta) {
  Eigen::MatrixXd out(w.rows(), w.cols());
  for (int i = 0; i < w.rows(); ++i) {
    Eigen::VectorXd lw(w.cols());
    for (int u = 0; u < w.cols(); ++u) {
      const double log_w = w(i, u) > 0.0 ? std::log(w(i, u)) : kLogFloor;
      lw(u) = log_w - eta * grad(i, u);
    }
    const double m = lw.maxCoeff();
    double z = 0.0;
    for (int u = 0; u < w.cols(); ++u) {
      out(i, u) = std::exp(std::max(lw(u) - m, kLogFloor));
      z += out(i, u);
    }
    out.row(i) /= z;
  }
  return out;
}

Eigen::MatrixXd expand_channel(const Cells& c, const Eigen::MatrixXd& w) {
  const int u_card = static_cast<int>(w.cols());
  Eigen::MatrixXd full =
      Eigen::MatrixXd::Constant(c.a_card * c.b_card, u_card, 1.0 / u_card);
  for (size_t i = 0; i < c.a.size(); ++i)
    full.row(c.a[i] * c.b_card + c.b[i]) = w.row(i);
  return full;
}

Eigen::MatrixXd smoothed_rows(Eigen::MatrixXd w, double floor_mass) {
  for (int i = 0; i < w.rows(); ++i) {
    w.row(i).array() += floor_mass;
    w.row(i) /= w.row(i).sum();
  }
  return w;
}

// Best norm-ratio pair found by alternating maximization; shared between the
// norm certifier and the tilt seeding of the channel search.
struct NormSearch {
  double ratio = 0.0;
  Eigen::VectorXd f, g;
};

NormSearch norms_search(const JointDistribution& d, RibbonPoint pt, int restarts, int iterations,
                        std::uint64_t seed, double stop_at);

// One-hot-ish channel assigning each cell to a fixed label.
Eigen::MatrixXd labeled_init(const Cells& c, int u_card,
                             const std::vector<int>& labels) {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(c.a.size(), u_card);
  for (size_t i = 0; i < c.a.size(); ++i) w(i, labels[i] % u_card) = 1.0;
  return smoothed_rows(std::move(w), 1e-6);
}

// Flat Dirichlet rows, or spiky ones (4th powers) that start near the corners
// of the simplex where mixture witnesses tend to live.
Eigen::MatrixXd random_rows(int n, int u_card, Rng& rng, bool spiky) {
  Eigen::MatrixXd w(n, u_card);
  for (int i = 0; i < n; ++i)
    for (int u = 0; u < u_card; ++u) {
      const double e = rng.exponential();
      w(i, u) = spiky ? e * e * e * e : e;
    }
  return smoothed_rows(std::move(w), 0.0);
}

// Binary channel splitting off a tilted component proportional to
// (f(a) g(b))^gamma, expanded to u_card states.
Eigen::MatrixXd tilt_init(const Cells& c, int u_card, const Eigen::VectorXd& f,
                          const Eigen::VectorXd& g, double gamma, double scale) {
  const int n = static_cast<int>(c.a.size());
  Eigen::VectorXd t(n);
  for (int i = 0; i < n; ++i)
    t(i) = std::pow(std::max(f(c.a[i]) * g(c.b[i]), 1e-12), gamma);
  t *= scale / t.maxCoeff();
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, u_card);
  for (int i = 0; i < n; ++i) {
    w(i, 0) = t(i);
    w(i, 1) = 1.0 - t(i);
  }
  return smoothed_rows(std::move(w), 1e-9);
}

}  // namespace

double upsilon(const JointDistribution& d, RibbonPoint pt) {
  return pt.lambda1 * entropy_marginal_a(d) + pt.lambda2 * entropy_marginal_b(d) - entropy(d);
}

double channel_objective(const JointDistribution& d, RibbonPoint pt,
                         const Eigen::MatrixXd& channel) {
  const Cells c = support_cells(d);
  if (channel.rows() != d.a_card() * d.b_card())
    throw std::invalid_argument("channel_objective: channel must have a_card*b_card rows");
  Eigen::MatrixXd w(c.a.size(), channel.cols());
  for (size_t i = 0; i < c.a.size(); ++i) w.row(i) = channel.row(c.a[i] * c.b_card + c.b[i]);
  return channel_stats(c, d, pt, w).objective;
}

HcVerdict hc_membership_channel(const JointDistribution& d, RibbonPoint pt,
                                const HcOptions& opts) {
  if (pt.lambda1 < 0.0 || pt.lambda1 > 1.0 || pt.lambda2 < 0.0 || pt.lambda2 > 1.0)
    throw std::invalid_argument("hc_membership_channel: point must lie in [0,1]^2");
  const Cells c = support_cells(d);
  const int n = static_cast<int>(c.a.size());
  const int u_card = opts.u_card > 0 ? opts.u_card : d.a_card() * d.b_card() + 2;
  if (u_card < 2) throw std::invalid_argument("hc_membership_channel: u_card must be >= 2");
  Rng rng(opts.seed);

  double best_value = 0.0;
  Eigen::MatrixXd best_w;
  int restarts_used = 0;

  // Tilt seeds derived from the norm search cover exclusions whose witnesses
  // are far-from-uniform mixtures; computed lazily, certified independently.
  const bool can_tilt = pt.lambda1 > 0.0 && pt.lambda2 > 0.0;
  bool norms_ready = false;
  NormSearch ns;
  const double tilt_gamma[6] = {0.5, 0.5, 1.0, 1.0, 2.0, 2.0};
  const double tilt_scale[6] = {0.5, 0.9, 0.5, 0.9, 0.5, 0.9};

  for (int restart = 0; restart < opts.restarts; ++restart) {
    ++restarts_used;
    Eigen::MatrixXd w;
    if (restart == 0) {
      std::vector<int> labels(n);
      for (int i = 0; i < n; ++i) labels[i] = i;  // U = (A, B)
      w = labeled_init(c, u_card, labels);
    } else if (restart == 1) {
      // Second-order seed: perturbation channel built from the variance-form
      // witness, the direction in which exclusion shows up first.
      const McVerdict mc = mc_membership(d, pt);
      if (mc.has_witness) {
        double max_abs = 0.0;
        for (int i = 0; i < n; ++i)
          max_abs = std::max(max_abs, std::abs(mc.witness_f(c.a[i], c.b[i])));
        const double eps = 0.9 / max_abs;
        w = Eigen::MatrixXd::Zero(n, u_card);
        for (int i = 0; i < n; ++i) {
          const double v = eps * mc.witness_f(c.a[i], c.b[i]);
          w(i, 0) = (1.0 + v) / 2.0;
          w(i, 1) = (1.0 - v) / 2.0;
        }
        w = smoothed_rows(std::move(w), 1e-9);
      } else {
        w = random_rows(n, u_card, rng, false);
      }
    } else if (restart == 2) {
      w = labeled_init(c, u_card, c.a);  // U = A
    } else if (restart == 3) {
      w = labeled_init(c, u_card, c.b);  // U = B
    } else if (restart < 10 && can_tilt) {
      if (!norms_ready) {
        ns = norms_search(d, pt, 8, 192, opts.seed + 0x517cc1b727220a95ULL, 1e9);
        norms_ready = true;
      }
      w = tilt_init(c, u_card, ns.f, ns.g, tilt_gamma[restart - 4], tilt_scale[restart - 4]);
    } else {
      w = random_rows(n, u_card, rng, restart % 2 == 0);
    }

    ChannelStats stats = channel_stats(c, d, pt, w);
    double value = stats.objective;
    if (value < best_value) {
      best_value = value;
      best_w = w;
    }
    double eta = 0.5;
    int stall = 0;
    for (int iter = 0; iter < opts.max_iterations; ++iter) {
      const Eigen::MatrixXd grad = scaled_gradient(c, d, pt, w, stats);
      const Eigen::MatrixXd w_next = eg_step(w, grad, eta);
      const ChannelStats next = channel_stats(c, d, pt, w_next);
      if (next.objective < value) {
        if (value - next.objective < 1e-13) ++stall; else stall = 0;
        w = w_next;
        stats = next;
        value = next.objective;
        eta = std::min(eta * 1.1, 4.0);
        if (value < best_value) {
          best_value = value;
          best_w = w;
        }
        if (stall >= 8 || value < -opts.stop_at_violation) break;
      } else {
        eta *= 0.5;
        if (eta < 1e-10) break;
      }
    }
    if (best_value < -opts.stop_at_violation) break;
  }

  HcVerdict verdict;
  verdict.restarts_used = restarts_used;
  if (best_w.size() > 0) {
    // re-verify the candidate from scratch before certifying
    const Eigen::MatrixXd full = expand_channel(c, best_w);
    const double value = channel_objective(d, pt, full);
    if (value < -kHcTolerance) {
      verdict.status = HcStatus::OutsideCertified;
      verdict.violation = -value;
      verdict.has_channel_witness = true;
      verdict.witness_channel = full;
    }
  }
  return verdict;
}

namespace {

double p_norm(const Eigen::VectorXd& weights, const Eigen::VectorXd& f, double exponent) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < f.size(); ++i)
    if (weights(i) > 0.0) s += weights(i) * std::pow(f(i), exponent);
  return std::pow(s, 1.0 / exponent);
}

// Hoelder-optimal response to the conditional mean h, for the norm exponent
// 1/lambda: proportional to h^(lambda/(1-lambda)), degenerating to the argmax
// indicator as lambda -> 1. Strictly positive via a relative floor.
Eigen::VectorXd holder_response(const Eigen::VectorXd& h, double lambda) {
  const double hmax = h.maxCoeff();
  Eigen::VectorXd f(h.size());
  if (lambda > 1.0 - 1e-12) {
    for (Eigen::Index i = 0; i < h.size(); ++i) f(i) = (h(i) >= hmax) ? 1.0 : 1e-12;
  } else {
    const double kappa = lambda / (1.0 - lambda);
    for (Eigen::Index i = 0; i < h.size(); ++i)
      f(i) = std::max(std::pow(std::max(h(i), 0.0) / hmax, kappa), 1e-12);
  }
  return f;
}

}  // namespace

double norm_ratio(const JointDistribution& d, RibbonPoint pt, const Eigen::VectorXd& f,
                  const Eigen::VectorXd& g) {
  if (pt.lambda1 <= 0.0 || pt.lambda2 <= 0.0)
    throw std::invalid_argument("norm_ratio: requires lambda1, lambda2 > 0");
  double efg = 0.0;
  for (int a = 0; a < d.a_card(); ++a)
    for (int b = 0; b < d.b_card(); ++b) efg += d.probs()(a, b) * f(a) * g(b);
  const double nf = p_norm(d.marginal_a(), f, 1.0 / pt.lambda1);
  const double ng = p_norm(d.marginal_b(), g, 1.0 / pt.lambda2);
  return efg / (nf * ng);
}

namespace {

NormSearch norms_search(const JointDistribution& d, RibbonPoint pt, int restarts, int iterations,
                        std::uint64_t seed, double stop_at) {
  Rng rng(seed);

  // p(b | a) and p(a | b) restricted to marginal supports
  Eigen::MatrixXd b_given_a = d.probs();
  Eigen::MatrixXd a_given_b = d.probs();
  for (int a = 0; a < d.a_card(); ++a) {
    const double pa = d.marginal_a()(a);
    b_given_a.row(a) = pa > kSupportEpsilon ? (d.probs().row(a) / pa).eval()
                                            : Eigen::RowVectorXd::Zero(d.b_card()).eval();
  }
  for (int b = 0; b < d.b_card(); ++b) {
    const double pb = d.marginal_b()(b);
    a_given_b.col(b) = pb > kSupportEpsilon ? (d.probs().col(b) / pb).eval()
                                            : Eigen::VectorXd::Zero(d.a_card()).eval();
  }

  NormSearch best;
  for (int restart = 0; restart < restarts; ++restart) {
    Eigen::VectorXd g(d.b_card());
    if (restart == 0) {
      g.setOnes();
    } else if (restart <= d.b_card()) {
      // indicator seeds reach corner optima the smooth iteration cannot climb to
      g.setConstant(1e-9);
      g(restart - 1) = 1.0;
    } else {
      for (int b = 0; b < d.b_card(); ++b) g(b) = std::exp(rng.gaussian());
    }
    Eigen::VectorXd f = Eigen::VectorXd::Ones(d.a_card());
    double ratio = 0.0;
    for (int iter = 0; iter < iterations; ++iter) {
      f = holder_response(b_given_a * g, pt.lambda1);
      f /= p_norm(d.marginal_a(), f, 1.0 / pt.lambda1);
      g = holder_response(a_given_b.transpose() * f, pt.lambda2);
      g /= p_norm(d.marginal_b(), g, 1.0 / pt.lambda2);
      const double next = norm_ratio(d, pt, f, g);
      if (next - ratio < 1e-14 && iter > 2) {
        ratio = std::max(ratio, next);
        break;
      }
      ratio = next;
    }
    if (ratio > best.ratio) {
      best.ratio = ratio;
      best.f = f;
      best.g = g;
    }
    if (best.ratio > 1.0 + stop_at) break;
  }
  return best;
}

}  // namespace

HcVerdict hc_membership_norms(const JointDistribution& d, RibbonPoint pt,
                              const HcOptions& opts) {
  if (pt.lambda1 <= 0.0 || pt.lambda2 <= 0.0 || pt.lambda1 > 1.0 || pt.lambda2 > 1.0)
    throw std::invalid_argument(
        "hc_membership_norms: requires lambda1, lambda2 in (0,1]; use the channel method at 0");
  const int iterations = std::max(64, opts.max_iterations / 8);
  const NormSearch best =
      norms_search(d, pt, opts.restarts, iterations, opts.seed, opts.stop_at_violation);

  HcVerdict verdict;
  verdict.restarts_used = opts.restarts;
  if (best.f.size() > 0) {
    const double ratio = norm_ratio(d, pt, best.f, best.g);  // re-verified
    if (ratio > 1.0 + kHcTolerance) {
      verdict.status = HcStatus::OutsideCertified;
      verdict.violation = ratio - 1.0;
      verdict.has_norm_witness = true;
      verdict.witness_f = best.f;
      verdict.witness_g = best.g;
    }
  }
  return verdict;
}

HcBoxVerdict hc_membership_box(const NoSignalingBox& box, RibbonPoint pt,
                               const HcOptions& opts) {
  HcBoxVerdict out;
  int restarts = 0;
  for (int x = 0; x < box.x_card(); ++x)
    for (int y = 0; y < box.y_card(); ++y) {
      HcVerdict v = hc_membership_channel(conditional_joint(box, x, y), pt, opts);
      restarts += v.restarts_used;
      if (v.outside()) {
        out.verdict = std::move(v);
        out.verdict.restarts_used = restarts;
        out.x = x;
        out.y = y;
        return out;
      }
    }
  out.verdict.restarts_used = restarts;
  return out;
}

double s_star(const JointDistribution& d, int grid_resolution, const HcOptions& opts) {
  if (grid_resolution < 1) throw std::invalid_argument("s_star: grid_resolution must be >= 1");
  std::vector<double> slices;
  for (int k = 1; k <= grid_resolution; ++k)
    slices.push_back(static_cast<double>(k) / grid_resolution);
  slices.push_back(0.01);

  double best = 1.0;
  for (double lambda2 : slices) {
    const auto inside_at = [&](double l1) {
      return !hc_membership_channel(d, {l1, lambda2}, opts).outside();
    };
    double lo = 0.0, hi = 1.0;
    if (inside_at(1.0)) {
      lo = 1.0;
    } else {
      while (hi - lo > 1e-4) {
        const double mid = 0.5 * (lo + hi);
        (inside_at(mid) ? lo : hi) = mid;
      }
    }
    best = std::min(best, (1.0 - lo) / lambda2);
  }
  return best;
}

}  // namespace nlbox
