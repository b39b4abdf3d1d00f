#include "bmp/toy_regressor.hpp"

#include <cmath>

#include "bmp/encoding.hpp"
#include "bmp/error.hpp"

namespace bmp {

ToyRegressor ToyRegressor::init(int input_dim, int hidden_dim, const VecX& out_offset, const VecX& out_scale,
                                Rng& rng, const VecX& in_offset, const VecX& in_scale) {
  if (input_dim <= 0 || hidden_dim <= 0) fail(ErrorCode::InvalidConfig, "regressor dimensions must be positive");
  if (out_offset.size() != channel::kCount || out_scale.size() != channel::kCount)
    fail(ErrorCode::DimensionMismatch, "output standardization must have 159 entries");
  ToyRegressor r;
  r.in_offset = in_offset.size() == 0 ? VecX::Zero(input_dim) : in_offset;
  r.in_scale = in_scale.size() == 0 ? VecX::Ones(input_dim) : in_scale;
  if (r.in_offset.size() != input_dim || r.in_scale.size() != input_dim || !(r.in_scale.array() > 0.0).all())
    fail(ErrorCode::InvalidConfig, "input standardization needs one positive scale per feature");
  r.w1 = MatX(hidden_dim, input_dim);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  for (Eigen::Index k = 0; k < r.w1.size(); ++k) r.w1.data()[k] = s1 * rng.normal();
  r.b1 = VecX::Zero(hidden_dim);
  r.w2 = MatX(channel::kCount, hidden_dim);
  const double s2 = 0.1 / std::sqrt(static_cast<double>(hidden_dim));
  for (Eigen::Index k = 0; k < r.w2.size(); ++k) r.w2.data()[k] = s2 * rng.normal();
  r.b2 = VecX::Zero(channel::kCount);
  r.out_offset = out_offset;
  r.out_scale = out_scale;
  r.inst_w = VecX::Zero(kInstanceFeatures);
  return r;
}

ToyRegressor ToyRegressor::zeros_like() const {
  ToyRegressor g;
  g.w1 = MatX::Zero(w1.rows(), w1.cols());
  g.b1 = VecX::Zero(b1.size());
  g.w2 = MatX::Zero(w2.rows(), w2.cols());
  g.b2 = VecX::Zero(b2.size());
  g.in_offset = in_offset;
  g.in_scale = in_scale;
  g.out_offset = out_offset;
  g.out_scale = out_scale;
  g.inst_w = VecX::Zero(inst_w.size());
  return g;
}

ToyRegressor::Forward ToyRegressor::forward(const VecX& x) const {
  if (x.size() != w1.cols()) fail(ErrorCode::DimensionMismatch, "feature length does not match the regressor");
  Forward f;
  f.input = (x - in_offset).cwiseQuotient(in_scale);
  f.hidden = (w1 * f.input + b1).array().tanh().matrix();
  f.head = out_offset + out_scale.cwiseProduct(w2 * f.hidden + b2);
  return f;
}

void ToyRegressor::backward(const Forward& fwd, const VecX& grad_head, ToyRegressor& grad) const {
  const VecX g_raw = grad_head.cwiseProduct(out_scale);
  grad.w2.noalias() += g_raw * fwd.hidden.transpose();
  grad.b2 += g_raw;
  const VecX g_pre = (w2.transpose() * g_raw).cwiseProduct((1.0 - fwd.hidden.array().square()).matrix());
  grad.w1.noalias() += g_pre * fwd.input.transpose();
  grad.b1 += g_pre;
}

VecX ToyRegressor::parameters_from_head(const VecX& head) {
  VecX p = head;
  p[channel::kCamera] = std::exp(head[channel::kCamera]);
  return p;
}

double ToyRegressor::instance_logit(const double* cues) const {
  double z = 0.0;
  for (int k = 0; k < kInstanceFeatures; ++k) z += inst_w[k] * cues[k];
  return z;
}

Eigen::Index ToyRegressor::num_weights() const {
  return w1.size() + b1.size() + w2.size() + b2.size() + inst_w.size();
}

VecX ToyRegressor::flatten() const {
  VecX out(num_weights());
  Eigen::Index o = 0;
  for (const auto* block : {&w1, &w2}) {
    out.segment(o, block->size()) = Eigen::Map<const VecX>(block->data(), block->size());
    o += block->size();
  }
  for (const auto* v : {&b1, &b2, &inst_w}) {
    out.segment(o, v->size()) = *v;
    o += v->size();
  }
  return out;
}

void ToyRegressor::unflatten(const VecX& weights) {
  if (weights.size() != num_weights()) fail(ErrorCode::DimensionMismatch, "weight vector has the wrong length");
  Eigen::Index o = 0;
  for (auto* block : {&w1, &w2}) {
    Eigen::Map<VecX>(block->data(), block->size()) = weights.segment(o, block->size());
    o += block->size();
  }
  for (auto* v : {&b1, &b2, &inst_w}) {
    *v = weights.segment(o, v->size());
    o += v->size();
  }
}

bool ToyRegressor::all_finite() const { return flatten().allFinite(); }

namespace {
template <class A>
bool same(const A& a, const A& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}
}  // namespace

bool ToyRegressor::operator==(const ToyRegressor& o) const {
  return same(w1, o.w1) && same(b1, o.b1) && same(w2, o.w2) && same(b2, o.b2) && same(in_offset, o.in_offset) &&
         same(in_scale, o.in_scale) && same(out_offset, o.out_offset) &&
         same(out_scale, o.out_scale) && same(inst_w, o.inst_w);
}

}  // namespace bmp
