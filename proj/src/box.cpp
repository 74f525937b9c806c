#include "nlbox/box.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace nlbox {

std::string BoxValidation::summary() const {
  if (ok()) return "valid";
  std::ostringstream os;
  for (size_t i = 0; i < issues.size(); ++i) {
    if (i) os << "; ";
    os << issues[i].detail;
  }
  return os.str();
}

namespace {

void push_issue(BoxValidation& v, BoxIssue::Kind kind, double magnitude, std::string detail) {
  v.issues.push_back({kind, magnitude, std::move(detail)});
  v.worst = std::max(v.worst, magnitude);
}

}  // namespace

BoxValidation NoSignalingBox::validate(int x_card, int y_card, int a_card, int b_card,
                                       const std::vector<Eigen::MatrixXd>& conditionals,
                                       double tolerance) {
  BoxValidation v;
  if (x_card < 1 || y_card < 1 || a_card < 1 || b_card < 1) {
    push_issue(v, BoxIssue::Kind::NotNormalized, 0.0, "non-positive cardinality");
    return v;
  }
  if (static_cast<int>(conditionals.size()) != x_card * y_card) {
    push_issue(v, BoxIssue::Kind::NotNormalized, 0.0, "conditional count mismatch");
    return v;
  }
  for (int x = 0; x < x_card; ++x) {
    for (int y = 0; y < y_card; ++y) {
      const Eigen::MatrixXd& q = conditionals[x * y_card + y];
      if (q.rows() != a_card || q.cols() != b_card) {
        push_issue(v, BoxIssue::Kind::NotNormalized, 0.0, "conditional shape mismatch");
        return v;
      }
      for (int a = 0; a < a_card; ++a)
        for (int b = 0; b < b_card; ++b)
          if (q(a, b) < -tolerance) {
            std::ostringstream os;
            os << "NegativeEntry at (x=" << x << ",y=" << y << ",a=" << a << ",b=" << b
               << "): " << q(a, b);
            push_issue(v, BoxIssue::Kind::NegativeEntry, -q(a, b), os.str());
          }
      const double deficit = std::abs(q.sum() - 1.0);
      if (deficit > tolerance) {
        std::ostringstream os;
        os << "NotNormalized at (x=" << x << ",y=" << y << "): deficit " << deficit;
        push_issue(v, BoxIssue::Kind::NotNormalized, deficit, os.str());
      }
    }
  }

  // p(a | x, y) must not depend on y, and p(b | x, y) must not depend on x.
  double worst_a = 0.0, worst_b = 0.0;
  int wa_x = 0, wa_y = 0, wb_x = 0, wb_y = 0;
  for (int x = 0; x < x_card; ++x) {
    const Eigen::VectorXd ref = conditionals[x * y_card].rowwise().sum();
    for (int y = 1; y < y_card; ++y) {
      const Eigen::VectorXd ma = conditionals[x * y_card + y].rowwise().sum();
      const double dev = (ma - ref).cwiseAbs().maxCoeff();
      if (dev > worst_a) worst_a = dev, wa_x = x, wa_y = y;
    }
  }
  for (int y = 0; y < y_card; ++y) {
    const Eigen::VectorXd ref = conditionals[y].colwise().sum().transpose();
    for (int x = 1; x < x_card; ++x) {
      const Eigen::VectorXd mb = conditionals[x * y_card + y].colwise().sum().transpose();
      const double dev = (mb - ref).cwiseAbs().maxCoeff();
      if (dev > worst_b) worst_b = dev, wb_x = x, wb_y = y;
    }
  }
  if (worst_a > tolerance) {
    std::ostringstream os;
    os << "Signaling on side A: p(a|x=" << wa_x << ") varies with y (y=" << wa_y
       << "), max deviation " << worst_a;
    push_issue(v, BoxIssue::Kind::Signaling, worst_a, os.str());
  }
  if (worst_b > tolerance) {
    std::ostringstream os;
    os << "Signaling on side B: p(b|y=" << wb_y << ") varies with x (x=" << wb_x
       << "), max deviation " << worst_b;
    push_issue(v, BoxIssue::Kind::Signaling, worst_b, os.str());
  }
  return v;
}

NoSignalingBox::NoSignalingBox(int x_card, int y_card, int a_card, int b_card,
                               std::vector<Eigen::MatrixXd> conditionals, double tolerance)
    : x_card_(x_card), y_card_(y_card), a_card_(a_card), b_card_(b_card),
      cond_(std::move(conditionals)) {
  const BoxValidation v = validate(x_card_, y_card_, a_card_, b_card_, cond_, tolerance);
  if (!v.ok()) throw std::invalid_argument("NoSignalingBox: " + v.summary());
  for (auto& q : cond_) q = q.cwiseMax(0.0);
}

const Eigen::MatrixXd& NoSignalingBox::conditional(int x, int y) const {
  if (x < 0 || x >= x_card_ || y < 0 || y >= y_card_)
    throw std::out_of_range("NoSignalingBox: input index out of range");
  return cond_[x * y_card_ + y];
}

Eigen::VectorXd NoSignalingBox::marginal_a(int x) const {
  return conditional(x, 0).rowwise().sum();
}

Eigen::VectorXd NoSignalingBox::marginal_b(int y) const {
  return conditional(0, y).colwise().sum().transpose();
}

NoSignalingBox isotropic_box(double eta) {
  if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("isotropic_box: eta must be in [0,1]");
  std::vector<Eigen::MatrixXd> cond(4, Eigen::MatrixXd(2, 2));
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          cond[x * 2 + y](a, b) = ((a ^ b) == (x & y)) ? (1.0 + eta) / 4.0 : (1.0 - eta) / 4.0;
  return NoSignalingBox(2, 2, 2, 2, std::move(cond));
}

double chsh_value(const NoSignalingBox& box) {
  if (!box.binary()) throw std::invalid_argument("chsh_value: requires binary box");
  double v = 0.0;
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
          if ((a ^ b) == (x & y)) v += box.prob(x, y, a, b);
  return v / 4.0;
}

bool binary_params_feasible(const BinaryBoxParams& p, double slack) {
  for (int x = 0; x < 2; ++x) {
    if (std::abs(p.alpha(x)) > 1.0 + slack) return false;
    if (std::abs(p.beta(x)) > 1.0 + slack) return false;
  }
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const double hi = 1.0 - std::abs(p.alpha(x) - p.beta(y));
      const double lo = std::abs(p.alpha(x) + p.beta(y)) - 1.0;
      if (p.zeta(x, y) > hi + slack || p.zeta(x, y) < lo - slack) return false;
    }
  return true;
}

NoSignalingBox box_from_binary_params(const BinaryBoxParams& p) {
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const double hi = 1.0 - std::abs(p.alpha(x) - p.beta(y));
      const double lo = std::abs(p.alpha(x) + p.beta(y)) - 1.0;
      if (p.zeta(x, y) > hi + 1e-12 || p.zeta(x, y) < lo - 1e-12) {
        std::ostringstream os;
        os << "box_from_binary_params: zeta out of range at (x=" << x << ",y=" << y << ")";
        throw std::invalid_argument(os.str());
      }
    }
  std::vector<Eigen::MatrixXd> cond(4, Eigen::MatrixXd(2, 2));
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y)
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
          const double sa = (a == 0) ? 1.0 : -1.0;
          const double sb = (b == 0) ? 1.0 : -1.0;
          cond[x * 2 + y](a, b) =
              0.25 * (1.0 + sa * p.alpha(x) + sb * p.beta(y) + sa * sb * p.zeta(x, y));
        }
  return NoSignalingBox(2, 2, 2, 2, std::move(cond));
}

BinaryBoxParams binary_params_of(const NoSignalingBox& box) {
  if (!box.binary()) throw std::invalid_argument("binary_params_of: requires binary box");
  BinaryBoxParams p;
  for (int x = 0; x < 2; ++x) {
    const Eigen::VectorXd ma = box.marginal_a(x);
    p.alpha(x) = ma(0) - ma(1);
    const Eigen::VectorXd mb = box.marginal_b(x);
    p.beta(x) = mb(0) - mb(1);
  }
  for (int x = 0; x < 2; ++x)
    for (int y = 0; y < 2; ++y) {
      const Eigen::MatrixXd& q = box.conditional(x, y);
      p.zeta(x, y) = q(0, 0) - q(0, 1) - q(1, 0) + q(1, 1);
    }
  return p;
}

JointDistribution conditional_joint(const NoSignalingBox& box, int x, int y) {
  Eigen::MatrixXd q = box.conditional(x, y);
  return JointDistribution(q / q.sum());
}

NoSignalingBox mix_boxes(const std::vector<NoSignalingBox>& boxes,
                         const Eigen::VectorXd& weights) {
  if (boxes.empty() || weights.size() != static_cast<Eigen::Index>(boxes.size()))
    throw std::invalid_argument("mix_boxes: need one weight per box");
  if (std::abs(weights.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("mix_boxes: weights must sum to 1");
  const auto& first = boxes.front();
  for (const auto& b : boxes)
    if (b.x_card() != first.x_card() || b.y_card() != first.y_card() ||
        b.a_card() != first.a_card() || b.b_card() != first.b_card())
      throw std::invalid_argument("mix_boxes: shape mismatch");
  std::vector<Eigen::MatrixXd> cond(first.x_card() * first.y_card(),
                                    Eigen::MatrixXd::Zero(first.a_card(), first.b_card()));
  for (size_t r = 0; r < boxes.size(); ++r)
    for (int x = 0; x < first.x_card(); ++x)
      for (int y = 0; y < first.y_card(); ++y)
        cond[x * first.y_card() + y] += weights(r) * boxes[r].conditional(x, y);
  return NoSignalingBox(first.x_card(), first.y_card(), first.a_card(), first.b_card(),
                        std::move(cond));
}

}  // namespace nlbox
