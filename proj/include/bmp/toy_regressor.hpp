#pragma once

#include "bmp/rng.hpp"
#include "bmp/types.hpp"

namespace bmp {

// Per-person head: x' = (x - in_offset) / in_scale,
// raw = W2 tanh(W1 x' + b1) + b2, head = out_offset + out_scale ⊙ raw.
// The head holds the 159-dim layout except that the camera scale channel is
// log s. Offsets and scales standardize inputs and targets and are not
// trained. A logistic instance head scores grid cells from
// kInstanceFeatures cues.
struct ToyRegressor {
  static constexpr int kInstanceFeatures = 3;

  MatX w1;  // H×F
  VecX b1;
  MatX w2;  // 159×H
  VecX b2;
  VecX in_offset;
  VecX in_scale;
  VecX out_offset;
  VecX out_scale;
  VecX inst_w;  // kInstanceFeatures

  int input_dim() const { return static_cast<int>(w1.cols()); }
  int hidden_dim() const { return static_cast<int>(w1.rows()); }

  // in_offset/in_scale default to the identity map when empty.
  static ToyRegressor init(int input_dim, int hidden_dim, const VecX& out_offset, const VecX& out_scale, Rng& rng,
                           const VecX& in_offset = {}, const VecX& in_scale = {});
  // Same shapes, every trainable weight zero, standardization copied.
  ToyRegressor zeros_like() const;

  struct Forward {
    VecX input;  // standardized
    VecX hidden;
    VecX head;
  };
  Forward forward(const VecX& x) const;
  // Accumulates the weight gradient for one input into `grad`.
  void backward(const Forward& fwd, const VecX& grad_head, ToyRegressor& grad) const;

  // 159-dim parameter vector (camera scale exponentiated).
  static VecX parameters_from_head(const VecX& head);
  VecX predict(const VecX& x) const { return parameters_from_head(forward(x).head); }

  double instance_logit(const double* cues) const;

  Eigen::Index num_weights() const;
  VecX flatten() const;
  void unflatten(const VecX& weights);
  bool all_finite() const;

  bool operator==(const ToyRegressor& o) const;
};

}  // namespace bmp
