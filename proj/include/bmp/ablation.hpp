#pragma once

#include <cstdint>
#include <vector>

#include "bmp/body_model.hpp"
#include "bmp/losses.hpp"
#include "bmp/metrics.hpp"
#include "bmp/scene.hpp"
#include "bmp/training.hpp"

namespace bmp {

struct AblationConfig {
  int train_scenes = 100;
  int heldout_scenes = 100;
  // Persons stay close to the ground-plane line, and training runs longer than the plain defaults.
  SceneConfig scene = [] {
    SceneConfig s;
    s.center_jitter = 0.005;
    return s;
  }();
  TrainOptions train = [] {
    TrainOptions t;
    t.steps = 600;
    t.lr = 2e-2;
    return t;
  }();
  ToyModelConfig model;
  LossWeights weights;       // rank weight of the "with" arm comes from here
  double eval_threshold = 0.0;  // T for held-out depth ordering
  int jobs = 1;              // scene generation threads

  void validate() const;
};

struct AblationArm {
  double rank_weight = 0.0;
  double accuracy = 0.0;
  long pairs = 0;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

struct AblationReport {
  std::uint64_t seed = 0;
  AblationArm with_rank;
  AblationArm without_rank;
  double improvement() const { return with_rank.accuracy - without_rank.accuracy; }
};

// Depth-ordering pairs pooled over held-out scenes; scenes with fewer than two
// persons contribute nothing.
PairCount pooled_order_counts(const std::vector<std::vector<double>>& predicted, const std::vector<Scene>& scenes,
                              double T);

// Held-out depth-ordering accuracy of camera-recovered depths.
AblationArm evaluate_arm(const TrainingProblem& train, const std::vector<Scene>& heldout, const LossWeights& weights,
                         const AblationConfig& config);

// Trains with the configured rank weight and with rank weight 0 from the same
// initialization and scenes.
AblationReport evaluate_ablation(std::uint64_t seed, const AblationConfig& config);

}  // namespace bmp
