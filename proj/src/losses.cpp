#include "bmp/losses.hpp"

#include <algorithm>
#include <cmath>

#include "bmp/error.hpp"

namespace bmp {

OrdinalRelation ordinal_relation(double d_m, double d_n, double T) {
  if (d_n - d_m > T) return OrdinalRelation::kFirstCloser;
  if (d_m - d_n > T) return OrdinalRelation::kSecondCloser;
  return OrdinalRelation::kSameDepth;
}

PairRelations::PairRelations(int n) : n_(n), upper_(static_cast<std::size_t>(n) * (n > 0 ? n - 1 : 0) / 2) {
  if (n < 0) fail(ErrorCode::InvalidConfig, "negative person count");
}

PairRelations PairRelations::from_depths(const std::vector<double>& depths, double T) {
  PairRelations r(static_cast<int>(depths.size()));
  for (int m = 0; m < r.size(); ++m)
    for (int n = m + 1; n < r.size(); ++n)
      r.set(m, n, ordinal_relation(depths[static_cast<std::size_t>(m)], depths[static_cast<std::size_t>(n)], T));
  return r;
}

std::size_t PairRelations::slot(int m, int n) const {
  if (m < 0 || n < 0 || m >= n_ || n >= n_ || m >= n) fail(ErrorCode::InvalidConfig, "pair index out of range");
  // Row-major upper triangle without the diagonal.
  const auto mm = static_cast<std::size_t>(m);
  const auto nn = static_cast<std::size_t>(n);
  const auto N = static_cast<std::size_t>(n_);
  return mm * (2 * N - mm - 1) / 2 + (nn - mm - 1);
}

void PairRelations::set(int m, int n, OrdinalRelation r) {
  if (m > n) {
    std::swap(m, n);
    r = negate(r);
  }
  upper_[slot(m, n)] = r;
}

std::optional<OrdinalRelation> PairRelations::get(int m, int n) const {
  if (m > n) {
    auto r = upper_[slot(n, m)];
    if (r) return negate(*r);
    return std::nullopt;
  }
  return upper_[slot(m, n)];
}

void LossWeights::validate() const {
  for (double w : {w3d, w2d, shape, conf, adv, rank})
    if (!(w >= 0.0)) fail(ErrorCode::InvalidConfig, "loss weights must be non-negative");
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

PairLoss pair_ordinal_loss(double z_m, double z_n, OrdinalRelation r) {
  const double diff = z_m - z_n;
  switch (r) {
    case OrdinalRelation::kFirstCloser: {
      const double s = sigmoid(diff);
      return {softplus(diff), s, -s};
    }
    case OrdinalRelation::kSecondCloser: {
      const double s = sigmoid(-diff);
      return {softplus(-diff), -s, s};
    }
    case OrdinalRelation::kSameDepth:
      return {diff * diff, 2.0 * diff, -2.0 * diff};
  }
  return {};
}

ScalarLoss rank_loss(const std::vector<double>& z, const std::vector<double>& confidence, const PairRelations& relations) {
  const auto n = static_cast<int>(z.size());
  if (confidence.size() != z.size()) fail(ErrorCode::LengthMismatch, "rank_loss needs one confidence per person");
  if (n >= 2 && relations.size() != n) fail(ErrorCode::MissingRelation, "relations cover a different person count");
  ScalarLoss out{0.0, VecX::Zero(n)};
  const long pairs = static_cast<long>(n) * (n - 1) / 2;
  if (pairs == 0) return out;
  for (int m = 0; m < n; ++m) {
    for (int k = m + 1; k < n; ++k) {
      const auto r = relations.get(m, k);
      if (!r) fail(ErrorCode::MissingRelation, "no relation for pair (" + std::to_string(m) + ", " + std::to_string(k) + ")");
      const double w = confidence[static_cast<std::size_t>(m)] * confidence[static_cast<std::size_t>(k)];
      const PairLoss pl = pair_ordinal_loss(z[static_cast<std::size_t>(m)], z[static_cast<std::size_t>(k)], *r);
      out.value += w * pl.loss;
      out.grad[m] += w * pl.grad_m;
      out.grad[k] += w * pl.grad_n;
    }
  }
  out.value /= static_cast<double>(pairs);
  out.grad /= static_cast<double>(pairs);
  return out;
}

ScalarLoss depth_loss(const std::vector<double>& pred, const std::vector<double>& gt) {
  if (pred.size() != gt.size()) fail(ErrorCode::LengthMismatch, "depth_loss inputs differ in length");
  ScalarLoss out{0.0, VecX::Zero(static_cast<Eigen::Index>(pred.size()))};
  if (pred.empty()) return out;
  const double n = static_cast<double>(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - gt[i];
    out.value += d * d / n;
    out.grad[static_cast<Eigen::Index>(i)] = 2.0 * d / n;
  }
  return out;
}

namespace {

// Mean over entries of squared differences; accumulates `scale` · dMSE into grad.
template <typename A>
double mse_into(const A& pred, const A& gt, double scale, A& grad, const char* what) {
  if (pred.rows() != gt.rows() || pred.cols() != gt.cols())
    fail(ErrorCode::DimensionMismatch, std::string(what) + " shapes differ");
  if (pred.size() == 0) {
    grad = A::Zero(pred.rows(), pred.cols());
    return 0.0;
  }
  const double n = static_cast<double>(pred.size());
  const A diff = pred - gt;
  grad = (2.0 * scale / n) * diff;
  return diff.squaredNorm() / n;
}

}  // namespace

MeshLossResult mesh_loss(const std::vector<MeshPrediction>& pred, const std::vector<MeshTarget>& gt,
                         const LossWeights& weights) {
  if (pred.size() != gt.size()) fail(ErrorCode::DimensionMismatch, "mesh_loss needs one target per prediction");
  MeshLossResult out;
  out.grads.resize(pred.size());
  if (pred.empty()) return out;
  const double inv_p = 1.0 / static_cast<double>(pred.size());

  for (std::size_t p = 0; p < pred.size(); ++p) {
    const MeshPrediction& a = pred[p];
    const MeshTarget& b = gt[p];
    MeshGradient& g = out.grads[p];
    const double pose = mse_into(a.theta, b.theta, inv_p, g.theta, "theta");
    const double shape = mse_into(a.beta, b.beta, weights.shape * inv_p, g.beta, "beta");
    const double kp3d = mse_into(a.keypoints3d, b.keypoints3d, weights.w3d * inv_p, g.keypoints3d, "keypoints3d");
    const double vert = mse_into(a.vertices, b.vertices, inv_p, g.vertices, "vertices");

    if (a.keypoints2d.rows() != b.keypoints2d.rows() || b.visibility.size() != b.keypoints2d.rows())
      fail(ErrorCode::DimensionMismatch, "keypoints2d shapes differ");
    g.keypoints2d = Points2::Zero(a.keypoints2d.rows(), 2);
    double kp2d = 0.0;
    int visible = 0;
    for (Eigen::Index k = 0; k < b.visibility.size(); ++k)
      if (b.visibility[k] > 0.0) ++visible;
    if (visible > 0) {
      for (Eigen::Index k = 0; k < b.visibility.size(); ++k) {
        if (!(b.visibility[k] > 0.0)) continue;
        const Eigen::RowVector2d diff = a.keypoints2d.row(k) - b.keypoints2d.row(k);
        const double dist = diff.norm();
        kp2d += dist / visible;
        if (dist > 0.0) g.keypoints2d.row(k) = (weights.w2d * inv_p / visible) * diff / dist;
      }
    }

    const double dc = a.confidence - b.confidence;
    const double conf = dc * dc;
    g.confidence = weights.conf * inv_p * 2.0 * dc;

    out.terms.pose += inv_p * pose;
    out.terms.shape += inv_p * shape;
    out.terms.keypoints3d += inv_p * kp3d;
    out.terms.vertices += inv_p * vert;
    out.terms.keypoints2d += inv_p * kp2d;
    out.terms.confidence += inv_p * conf;
  }
  const MeshTerms& t = out.terms;
  out.terms.total = t.pose + t.vertices + weights.w3d * t.keypoints3d + weights.w2d * t.keypoints2d +
                    weights.shape * t.shape + weights.conf * t.confidence + weights.adv * t.adversarial;
  return out;
}

FocalLossResult instance_focal_loss(const InstanceMap& pred, const InstanceMap& gt, const FocalParams& params) {
  if (pred.levels.size() != gt.levels.size()) fail(ErrorCode::ConfigMismatch, "instance maps differ in level count");
  FocalLossResult out;
  out.grad.levels.reserve(pred.levels.size());
  const double a = params.alpha;
  const double gamma = params.gamma;
  for (std::size_t k = 0; k < pred.levels.size(); ++k) {
    const GridMap& P = pred.levels[k];
    const GridMap& Y = gt.levels[k];
    if (P.grid != Y.grid || P.channels != Y.channels) fail(ErrorCode::ConfigMismatch, "instance map level shapes differ");
    GridMap G(P.grid, P.channels);
    const double n = static_cast<double>(P.data.size());
    double level_sum = 0.0;
    for (std::size_t c = 0; c < P.data.size(); ++c) {
      const double raw = P.data[c];
      const bool clamped = raw < params.eps || raw > 1.0 - params.eps;
      const double p = std::clamp(raw, params.eps, 1.0 - params.eps);
      double loss, dldp;
      if (Y.data[c] >= 0.5) {
        const double q = 1.0 - p;
        loss = -a * std::pow(q, gamma) * std::log(p);
        dldp = a * (gamma * std::pow(q, gamma - 1.0) * std::log(p) - std::pow(q, gamma) / p);
      } else {
        loss = -(1.0 - a) * std::pow(p, gamma) * std::log(1.0 - p);
        dldp = -(1.0 - a) * (gamma * std::pow(p, gamma - 1.0) * std::log(1.0 - p) - std::pow(p, gamma) / (1.0 - p));
      }
      level_sum += loss;
      G.data[c] = clamped ? 0.0 : dldp / n;
    }
    out.value += level_sum / n;
    out.grad.levels.push_back(std::move(G));
  }
  return out;
}

TotalLossResult total_loss(const SceneLossInput& scene, const LossWeights& weights, const FocalParams& focal) {
  weights.validate();
  TotalLossResult out;
  const FocalLossResult inst = instance_focal_loss(scene.pred_instance, scene.gt_instance, focal);
  MeshLossResult mesh = mesh_loss(scene.pred_mesh, scene.gt_mesh, weights);
  const ScalarLoss depth = depth_loss(scene.pred_depth, scene.gt_depth);

  out.value = inst.value + mesh.terms.total + depth.value;
  out.breakdown = {{"inst", inst.value}, {"mesh", mesh.terms.total}, {"depth", depth.value}};
  out.grad_rank_depth = VecX::Zero(static_cast<Eigen::Index>(scene.rank_depth.size()));
  if (scene.rank_depth.size() >= 2) {
    const ScalarLoss rank = rank_loss(scene.rank_depth, scene.rank_confidence, scene.relations);
    out.value += weights.rank * rank.value;
    out.breakdown.emplace_back("rank", weights.rank * rank.value);
    out.grad_rank_depth = weights.rank * rank.grad;
  }
  out.breakdown.emplace_back("total", out.value);
  out.mesh_terms = mesh.terms;
  out.grad_instance = inst.grad;
  out.grad_mesh = std::move(mesh.grads);
  out.grad_depth = depth.grad;
  return out;
}

}  // namespace bmp
