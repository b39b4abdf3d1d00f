#include "bmp/ablation.hpp"

#include "bmp/error.hpp"

namespace bmp {

void AblationConfig::validate() const {
  if (train_scenes < 1 || heldout_scenes < 1) fail(ErrorCode::InvalidConfig, "scene counts must be positive");
  if (!(eval_threshold >= 0.0)) fail(ErrorCode::InvalidConfig, "eval_threshold must be non-negative");
  scene.validate();
  train.validate();
  weights.validate();
}

PairCount pooled_order_counts(const std::vector<std::vector<double>>& predicted, const std::vector<Scene>& scenes,
                              double T) {
  if (predicted.size() != scenes.size()) fail(ErrorCode::LengthMismatch, "one prediction list per scene");
  PairCount total;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    if (scenes[i].persons.size() < 2) continue;
    const PairCount c = depth_order_counts(predicted[i], scenes[i].depths(), T);
    total.correct += c.correct;
    total.total += c.total;
  }
  return total;
}

AblationArm evaluate_arm(const TrainingProblem& train, const std::vector<Scene>& heldout, const LossWeights& weights,
                         const AblationConfig& config) {
  const TrainResult trained = train_toy(train, weights, config.train);
  std::vector<std::vector<double>> z;
  for (const Scene& s : heldout) {
    std::vector<double> zs;
    for (const auto& p : predict_scene(trained.model, s, config.train.noise, config.train.globals))
      zs.push_back(p.camera_depth);
    z.push_back(std::move(zs));
  }
  const PairCount c = pooled_order_counts(z, heldout, config.eval_threshold);
  AblationArm arm;
  arm.rank_weight = weights.rank;
  arm.accuracy = c.fraction();
  arm.pairs = c.total;
  const auto total_of = [](const LossBreakdown& b) { return b.back().second; };
  arm.initial_loss = total_of(trained.history.front());
  arm.final_loss = total_of(trained.history.back());
  return arm;
}

AblationReport evaluate_ablation(std::uint64_t seed, const AblationConfig& config) {
  config.validate();
  const BodyModelSpec model = make_toy_model(config.model);
  const auto train_scenes = generate_scenes(derive_seed(seed, 1), config.train_scenes, config.scene, model, config.jobs);
  const auto heldout = generate_scenes(derive_seed(seed, 2), config.heldout_scenes, config.scene, model, config.jobs);

  AblationConfig cfg = config;
  cfg.train.seed = derive_seed(seed, 3);
  cfg.train.noise.seed = derive_seed(seed, 4);
  const TrainingProblem problem = prepare_training(train_scenes, model, cfg.train);

  AblationReport report;
  report.seed = seed;
  report.with_rank = evaluate_arm(problem, heldout, cfg.weights, cfg);
  LossWeights no_rank = cfg.weights;
  no_rank.rank = 0.0;
  report.without_rank = evaluate_arm(problem, heldout, no_rank, cfg);
  return report;
}

}  // namespace bmp
