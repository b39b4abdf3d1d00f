#pragma once

#include <cstdint>
#include <vector>

#include "bmp/body_model.hpp"
#include "bmp/features.hpp"
#include "bmp/losses.hpp"
#include "bmp/pyramid.hpp"
#include "bmp/scene.hpp"
#include "bmp/toy_regressor.hpp"

namespace bmp {

struct TrainOptions {
  double lr = 1e-2;
  int steps = 300;
  std::uint64_t seed = 0;
  int hidden = 32;
  FeatureNoise noise;
  double pseudo_sigma = 0.1;    // m, noise of the simulated depth estimator
  double rank_threshold = 0.3;  // T, m
  FocalParams focal;
  PyramidConfig pyramid = PyramidConfig::standard();
  CameraGlobals globals;  // long_edge is taken from the scenes

  void validate() const;
};

// Seeded features of person `index` in `scene`.
VecX scene_person_features(const Scene& scene, int index, const FeatureNoise& noise);

struct TrainingPerson {
  VecX features;
  MeshTarget target;  // keypoints2d in normalized [-1, 1] coordinates
  Points2 keypoints_px;
  CameraParams camera;  // generating camera, used for standardization only
  double area = 0.0;
};

struct TrainingScene {
  ImageSize image;
  CameraGlobals globals;
  std::vector<TrainingPerson> persons;
  std::vector<double> gt_depth;
  PairRelations relations;  // pseudo relations
  InstanceMap gt_instance;
  // Per level, G·G·kInstanceFeatures cues, cell-major like GridMap.
  std::vector<std::vector<double>> cues;
};

struct TrainingProblem {
  BodyModelSpec model;
  std::vector<TrainingScene> scenes;
  VecX oks_constants;
};

TrainingProblem prepare_training(const std::vector<Scene>& scenes, const BodyModelSpec& model,
                                 const TrainOptions& options);

// Standardized fresh regressor: head offsets and scales from target statistics.
ToyRegressor initial_regressor(const TrainingProblem& problem, const TrainOptions& options);

// Held constant within one gradient evaluation: the OKS confidence targets
// and the rank-loss confidence weights.
struct FrozenTargets {
  std::vector<std::vector<double>> oks;
  std::vector<std::vector<double>> rank_confidence;
};

FrozenTargets freeze_targets(const TrainingProblem& problem, const ToyRegressor& reg);

struct ObjectiveResult {
  double value = 0.0;
  LossBreakdown breakdown;  // means over scenes; entries sum to "total"
  VecX grad;                // flattened like ToyRegressor::flatten, empty unless requested
};

// Mean over scenes of the total loss.
ObjectiveResult training_objective(const TrainingProblem& problem, const ToyRegressor& reg, const LossWeights& weights,
                                   const FrozenTargets& frozen, const FocalParams& focal, bool with_grad);

struct TrainResult {
  ToyRegressor model;
  std::vector<LossBreakdown> history;  // steps + 1 entries, the last after the final update
};

// Full-batch gradient descent. Throws DivergedLoss on a non-finite loss.
TrainResult train_toy(const TrainingProblem& problem, const LossWeights& weights, const TrainOptions& options);
TrainResult train_toy(const std::vector<Scene>& scenes, const BodyModelSpec& model, const LossWeights& weights,
                      const TrainOptions& options);

// Central-difference check of the analytic gradient on a random subset of
// weights; returns the norm-wise relative error.
double check_training_gradient(const TrainingProblem& problem, const ToyRegressor& reg, const LossWeights& weights,
                               const FocalParams& focal, double fraction, Rng& rng);

struct PersonPrediction {
  VecX parameters;  // 159
  CameraParams camera;
  double camera_depth = 0.0;  // z recovered from the camera scale
};

std::vector<PersonPrediction> predict_scene(const ToyRegressor& reg, const Scene& scene, const FeatureNoise& noise,
                                            const CameraGlobals& globals);

}  // namespace bmp
