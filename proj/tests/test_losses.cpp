#include <doctest.h>

#include <cmath>

#include "bmp/finite_diff.hpp"
#include "bmp/losses.hpp"
#include "test_util.hpp"

using namespace bmp;
using bmp::test::error_code;

namespace {

constexpr OrdinalRelation kRelations[] = {OrdinalRelation::kFirstCloser, OrdinalRelation::kSecondCloser,
                                          OrdinalRelation::kSameDepth};

OrdinalRelation random_relation(Rng& rng) { return kRelations[rng.index(3)]; }

InstanceMap small_map(std::initializer_list<int> grids) {
  InstanceMap m;
  for (int g : grids) m.levels.emplace_back(g, 1);
  return m;
}

template <typename M>
M random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double sigma = 1.0) {
  M m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal(0, sigma);
  return m;
}

MeshTarget random_target(Rng& rng, int J, int V) {
  MeshTarget t;
  t.theta = random_matrix<VecX>(rng, 144, 1);
  t.beta = random_matrix<VecX>(rng, 10, 1);
  t.keypoints3d = random_matrix<Points3>(rng, J, 3);
  t.vertices = random_matrix<Points3>(rng, V, 3);
  t.keypoints2d = random_matrix<Points2>(rng, J, 2, 50.0);
  t.visibility = VecX(J);
  for (int k = 0; k < J; ++k) t.visibility[k] = rng.bernoulli(0.7) ? 1.0 : 0.0;
  t.visibility[0] = 1.0;
  t.confidence = rng.uniform();
  return t;
}

MeshPrediction perturbed(Rng& rng, const MeshTarget& t, double sigma) {
  MeshPrediction p;
  p.theta = t.theta + random_matrix<VecX>(rng, t.theta.size(), 1, sigma);
  p.beta = t.beta + random_matrix<VecX>(rng, t.beta.size(), 1, sigma);
  p.keypoints3d = t.keypoints3d + random_matrix<Points3>(rng, t.keypoints3d.rows(), 3, sigma);
  p.vertices = t.vertices + random_matrix<Points3>(rng, t.vertices.rows(), 3, sigma);
  p.keypoints2d = t.keypoints2d + random_matrix<Points2>(rng, t.keypoints2d.rows(), 2, 10 * sigma);
  p.confidence = t.confidence + rng.normal(0, sigma);
  return p;
}

// Packs every predicted number of every person into one vector and back.
struct MeshPacker {
  std::vector<MeshPrediction> shape;

  VecX pack(const std::vector<MeshPrediction>& preds) const {
    std::vector<double> v;
    auto put = [&](const auto& m) { v.insert(v.end(), m.data(), m.data() + m.size()); };
    for (const auto& p : preds) {
      put(p.theta), put(p.beta), put(p.keypoints3d), put(p.vertices), put(p.keypoints2d);
      v.push_back(p.confidence);
    }
    return Eigen::Map<VecX>(v.data(), static_cast<Eigen::Index>(v.size()));
  }

  std::vector<MeshPrediction> unpack(const VecX& x) const {
    std::vector<MeshPrediction> out = shape;
    Eigen::Index at = 0;
    auto take = [&](auto& m) {
      std::copy(x.data() + at, x.data() + at + m.size(), m.data());
      at += m.size();
    };
    for (auto& p : out) {
      take(p.theta), take(p.beta), take(p.keypoints3d), take(p.vertices), take(p.keypoints2d);
      p.confidence = x[at++];
    }
    return out;
  }
};

}  // namespace

TEST_CASE("ordinal relation") {
  CHECK(ordinal_relation(1, 5, 1) == OrdinalRelation::kFirstCloser);
  CHECK(ordinal_relation(5, 1, 1) == OrdinalRelation::kSecondCloser);
  CHECK(ordinal_relation(3, 3.5, 1) == OrdinalRelation::kSameDepth);
  CHECK(ordinal_relation(3, 4, 1) == OrdinalRelation::kSameDepth);  // strict margin

  const auto r = PairRelations::from_depths({2, 5, 2.1, 9}, 0.3);
  CHECK(r.get(0, 1) == OrdinalRelation::kFirstCloser);
  CHECK(r.get(1, 0) == OrdinalRelation::kSecondCloser);
  CHECK(r.get(0, 2) == OrdinalRelation::kSameDepth);
  CHECK(r.get(3, 2) == OrdinalRelation::kSecondCloser);
  PairRelations partial(3);
  CHECK(!partial.get(0, 2).has_value());
  partial.set(2, 0, OrdinalRelation::kFirstCloser);
  CHECK(partial.get(0, 2) == OrdinalRelation::kSecondCloser);
}

TEST_CASE("pair ordinal loss values") {
  auto l = pair_ordinal_loss(1.5, 1.5, OrdinalRelation::kSameDepth);
  CHECK(l.loss == 0);
  CHECK(l.grad_m == 0);
  CHECK(l.grad_n == 0);
  CHECK(pair_ordinal_loss(2, 2, OrdinalRelation::kFirstCloser).loss == doctest::Approx(0.693147).epsilon(1e-6));

  // Stable form against extended precision.
  for (double diff : {30.0, 50.0, -30.0, 1e-3}) {
    const long double naive = std::log1p(std::exp(static_cast<long double>(diff)));
    CHECK(pair_ordinal_loss(diff + 1, 1, OrdinalRelation::kFirstCloser).loss ==
          doctest::Approx(static_cast<double>(naive)).epsilon(1e-14));
  }
  const auto huge = pair_ordinal_loss(1000, 0, OrdinalRelation::kFirstCloser);
  CHECK(huge.loss == 1000);
  CHECK(huge.grad_m == 1);
  CHECK(std::isfinite(pair_ordinal_loss(-1000, 0, OrdinalRelation::kFirstCloser).loss));
}

TEST_CASE("pair ordinal loss properties") {
  Rng rng(1);
  for (int t = 0; t < 2000; ++t) {
    const double zm = rng.normal(0, 5), zn = rng.normal(0, 5);
    const auto r = random_relation(rng);
    const auto a = pair_ordinal_loss(zm, zn, r);
    CHECK(a.loss >= 0);
    const auto b = pair_ordinal_loss(zn, zm, negate(r));
    CHECK(a.loss == doctest::Approx(b.loss).epsilon(1e-14));
    CHECK(a.grad_m == doctest::Approx(b.grad_n).epsilon(1e-14));
    CHECK(a.grad_m == -a.grad_n);
    if (r != OrdinalRelation::kSameDepth) {
      // Strictly increasing in the margin by which the "closer" person looks farther.
      const double sign = r == OrdinalRelation::kFirstCloser ? 1.0 : -1.0;
      const double eps = rng.uniform(0.01, 1);
      CHECK(pair_ordinal_loss(zm + sign * eps, zn, r).loss > a.loss);
      CHECK(a.loss > 0);
    }
  }
}

TEST_CASE("rank loss matches a pair enumeration oracle") {
  Rng rng(2);
  CHECK(rank_loss({3.0}, {1.0}, PairRelations(1)).value == 0);
  CHECK(rank_loss({}, {}, PairRelations()).value == 0);
  CHECK(rank_loss({2, 2}, {1, 1}, PairRelations::from_depths({5, 5}, 0.3)).value == 0);

  for (int t = 0; t < 500; ++t) {
    const int n = rng.integer(2, 7);
    std::vector<double> z(n), c(n);
    PairRelations rel(n);
    for (int m = 0; m < n; ++m) {
      z[m] = rng.normal(5, 3);
      c[m] = rng.uniform();
    }
    for (int m = 0; m < n; ++m)
      for (int k = m + 1; k < n; ++k) rel.set(m, k, random_relation(rng));

    // Oracle: every ordered pair at half weight.
    double sum = 0;
    for (int m = 0; m < n; ++m) {
      for (int k = 0; k < n; ++k) {
        if (m == k) continue;
        const double d = z[m] - z[k];
        double loss = 0;
        switch (*rel.get(m, k)) {
          case OrdinalRelation::kFirstCloser: loss = std::log(1 + std::exp(d)); break;
          case OrdinalRelation::kSecondCloser: loss = std::log(1 + std::exp(-d)); break;
          case OrdinalRelation::kSameDepth: loss = d * d; break;
        }
        sum += 0.5 * c[m] * c[k] * loss;
      }
    }
    const double expected = sum / (n * (n - 1) / 2.0);
    const auto got = rank_loss(z, c, rel);
    REQUIRE(got.value == doctest::Approx(expected).epsilon(1e-12));

    auto f = [&](const VecX& x) { return rank_loss(std::vector<double>(x.data(), x.data() + n), c, rel).value; };
    CHECK(relative_error(got.grad, finite_diff_grad(f, Eigen::Map<VecX>(z.data(), n))) < 1e-6);

    std::vector<double> zero_c(n, 0.0);
    CHECK(rank_loss(z, zero_c, rel).value == 0);
  }
}

TEST_CASE("rank loss errors") {
  CHECK(error_code([] { rank_loss({1, 2}, {1}, PairRelations(2)); }) == ErrorCode::LengthMismatch);
  CHECK(error_code([] { rank_loss({1, 2}, {1, 1}, PairRelations(2)); }) == ErrorCode::MissingRelation);
  CHECK(error_code([] { rank_loss({1, 2, 3}, {1, 1, 1}, PairRelations(2)); }) == ErrorCode::MissingRelation);
}

TEST_CASE("depth loss") {
  CHECK(depth_loss({1, 2}, {1, 2}).value == 0);
  CHECK(depth_loss({4, -2}, {1, 2}).value == 12.5);
  CHECK(depth_loss({}, {}).value == 0);
  CHECK(error_code([] { depth_loss({1}, {1, 2}); }) == ErrorCode::LengthMismatch);
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    const int n = rng.integer(1, 10);
    std::vector<double> p(n), g(n);
    for (int i = 0; i < n; ++i) p[i] = rng.normal(5, 3), g[i] = rng.normal(5, 3);
    auto f = [&](const VecX& x) { return depth_loss(std::vector<double>(x.data(), x.data() + n), g).value; };
    CHECK(relative_error(depth_loss(p, g).grad, finite_diff_grad(f, Eigen::Map<VecX>(p.data(), n))) < 1e-6);
  }
}

TEST_CASE("mesh loss values") {
  Rng rng(4);
  MeshTarget t = random_target(rng, 17, 30);
  MeshPrediction p{t.theta, t.beta, t.keypoints3d, t.vertices, t.keypoints2d, t.confidence};
  CHECK(mesh_loss({p}, {t}, {}).terms.total == 0);

  p.theta[7] += 0.3;
  const auto r = mesh_loss({p}, {t}, {});
  CHECK(r.terms.total == doctest::Approx(0.09 / 144).epsilon(1e-12));
  CHECK(r.terms.pose == r.terms.total);

  // 2D term: mean Euclidean distance over visible keypoints only.
  MeshPrediction q{t.theta, t.beta, t.keypoints3d, t.vertices, t.keypoints2d, t.confidence};
  int visible = 0;
  for (int k = 0; k < 17; ++k) {
    q.keypoints2d.row(k) += Eigen::RowVector2d(3, 4);
    if (t.visibility[k] > 0) ++visible;
  }
  q.keypoints2d.row(0) += Eigen::RowVector2d(3, 4);  // keypoint 0 is visible, now 10 px off
  const auto r2 = mesh_loss({q}, {t}, {});
  CHECK(r2.terms.keypoints2d == doctest::Approx((5.0 * (visible - 1) + 10.0) / visible));
  CHECK(r2.terms.total == doctest::Approx(4 * r2.terms.keypoints2d));

  LossWeights w;
  w.w2d = 0;
  CHECK(mesh_loss({q}, {t}, w).terms.total == 0);
  CHECK(mesh_loss({}, {}, {}).terms.total == 0);

  MeshPrediction bad = p;
  bad.vertices = Points3::Zero(29, 3);
  CHECK(error_code([&] { mesh_loss({bad}, {t}, {}); }) == ErrorCode::DimensionMismatch);
  CHECK(error_code([&] { mesh_loss({p, p}, {t}, {}); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("mesh loss gradients match finite differences") {
  Rng rng(5);
  for (int t = 0; t < 100; ++t) {
    const int P = rng.integer(1, 3);
    std::vector<MeshTarget> gt;
    std::vector<MeshPrediction> pred;
    for (int p = 0; p < P; ++p) {
      gt.push_back(random_target(rng, 6, 8));
      pred.push_back(perturbed(rng, gt.back(), 0.5));
    }
    LossWeights w;
    w.shape = rng.uniform(0, 1);
    const MeshPacker packer{pred};
    auto f = [&](const VecX& x) { return mesh_loss(packer.unpack(x), gt, w).terms.total; };
    const auto res = mesh_loss(pred, gt, w);
    const VecX analytic = packer.pack(res.grads);
    CHECK(relative_error(analytic, finite_diff_grad(f, packer.pack(pred))) < 1e-5);
  }
}

TEST_CASE("focal loss values") {
  auto pred = small_map({4, 3});
  auto gt = small_map({4, 3});
  CHECK(instance_focal_loss(pred, gt).value <= 1e-5);

  pred.levels[0].at({1, 1}) = 0.5;
  gt.levels[0].at({1, 1}) = 1.0;
  const double cell = 0.25 * 0.25 * std::log(2.0);
  CHECK(cell == doctest::Approx(0.043322).epsilon(1e-5));
  // Mean over the level's cells; zero cells contribute about nothing.
  CHECK(instance_focal_loss(pred, gt).value == doctest::Approx(cell / 16).epsilon(1e-6));

  CHECK(error_code([&] { instance_focal_loss(pred, small_map({4})); }) == ErrorCode::ConfigMismatch);
  CHECK(error_code([&] { instance_focal_loss(pred, small_map({4, 4})); }) == ErrorCode::ConfigMismatch);
}

TEST_CASE("focal loss gradient and monotonicity") {
  Rng rng(6);
  for (int t = 0; t < 100; ++t) {
    auto pred = small_map({4, 3});
    auto gt = small_map({4, 3});
    for (auto* m : {&pred, &gt})
      for (auto& l : m->levels)
        for (auto& v : l.data) v = m == &pred ? rng.uniform(0.02, 0.98) : (rng.bernoulli(0.3) ? 1.0 : 0.0);
    const FocalParams fp{rng.uniform(0.1, 0.9), rng.uniform(0.5, 3), 1e-7};

    VecX x(16 + 9);
    std::copy(pred.levels[0].data.begin(), pred.levels[0].data.end(), x.data());
    std::copy(pred.levels[1].data.begin(), pred.levels[1].data.end(), x.data() + 16);
    auto f = [&](const VecX& v) {
      auto p = pred;
      std::copy(v.data(), v.data() + 16, p.levels[0].data.begin());
      std::copy(v.data() + 16, v.data() + 25, p.levels[1].data.begin());
      return instance_focal_loss(p, gt, fp).value;
    };
    const auto res = instance_focal_loss(pred, gt, fp);
    VecX analytic(25);
    std::copy(res.grad.levels[0].data.begin(), res.grad.levels[0].data.end(), analytic.data());
    std::copy(res.grad.levels[1].data.begin(), res.grad.levels[1].data.end(), analytic.data() + 16);
    CHECK(relative_error(analytic, finite_diff_grad(f, x)) < 1e-5);

    // Raising a positive cell's probability lowers the loss.
    for (std::size_t c = 0; c < 16; ++c) {
      if (gt.levels[0].data[c] < 0.5) continue;
      auto up = pred;
      up.levels[0].data[c] = std::min(0.999, up.levels[0].data[c] + 0.01);
      CHECK(instance_focal_loss(up, gt, fp).value < res.value);
    }
  }
}

TEST_CASE("finite difference helper") {
  auto sq = [](const VecX& x) { return x[0] * x[0]; };
  CHECK(finite_diff_grad(sq, VecX::Constant(1, 3.0))[0] == doctest::Approx(6).epsilon(1e-8));
  auto sp = [](const VecX& x) { return softplus(x[0]); };
  CHECK(std::abs(finite_diff_grad(sp, VecX::Zero(1))[0] - 0.5) < 1e-8);
  CHECK(relative_error(VecX::Zero(3), VecX::Zero(3)) == 0);
}

namespace {

SceneLossInput random_scene(Rng& rng, int persons) {
  SceneLossInput s;
  s.pred_instance = small_map({4, 3});
  s.gt_instance = small_map({4, 3});
  for (auto& v : s.pred_instance.levels[0].data) v = rng.uniform(0.05, 0.95);
  s.gt_instance.levels[0].at({2, 1}) = 1.0;
  std::vector<double> depths;
  for (int p = 0; p < persons; ++p) {
    s.gt_mesh.push_back(random_target(rng, 5, 6));
    s.pred_mesh.push_back(perturbed(rng, s.gt_mesh.back(), 0.3));
    depths.push_back(rng.uniform(2, 10));
    s.gt_depth.push_back(depths.back());
    s.pred_depth.push_back(depths.back() + rng.normal(0, 1));
    s.rank_depth.push_back(depths.back() + rng.normal(0, 1));
    s.rank_confidence.push_back(rng.uniform());
  }
  s.relations = PairRelations::from_depths(depths, 0.3);
  return s;
}

}  // namespace

TEST_CASE("total loss composes its terms") {
  Rng rng(7);
  for (int t = 0; t < 100; ++t) {
    const int n = rng.integer(1, 5);
    const SceneLossInput s = random_scene(rng, n);
    const LossWeights w;
    const auto total = total_loss(s, w);
    const double inst = instance_focal_loss(s.pred_instance, s.gt_instance).value;
    const double mesh = mesh_loss(s.pred_mesh, s.gt_mesh, w).terms.total;
    const double depth = depth_loss(s.pred_depth, s.gt_depth).value;
    const double rank = n >= 2 ? rank_loss(s.rank_depth, s.rank_confidence, s.relations).value : 0.0;
    CHECK(total.value == doctest::Approx(inst + mesh + depth + 0.1 * rank).epsilon(1e-12));

    std::vector<std::string> names;
    for (const auto& [name, value] : total.breakdown) names.push_back(name);
    if (n >= 2) {
      CHECK(names == std::vector<std::string>{"inst", "mesh", "depth", "rank", "total"});
      CHECK(total.breakdown[3].second == doctest::Approx(0.1 * rank).epsilon(1e-12));
    } else {
      CHECK(names == std::vector<std::string>{"inst", "mesh", "depth", "total"});
    }
    CHECK(total.breakdown.back().second == total.value);

    if (n >= 2) {
      auto f = [&](const VecX& z) {
        SceneLossInput c = s;
        c.rank_depth.assign(z.data(), z.data() + z.size());
        return total_loss(c, w).value;
      };
      const VecX z0 = Eigen::Map<const VecX>(s.rank_depth.data(), n);
      CHECK(relative_error(total.grad_rank_depth, finite_diff_grad(f, z0)) < 1e-5);
    }
  }
}

TEST_CASE("perfect predictions cost nothing") {
  Rng rng(8);
  SceneLossInput s = random_scene(rng, 3);
  s.pred_instance = s.gt_instance;
  for (auto& l : s.pred_instance.levels)
    for (auto& v : l.data) v = v > 0.5 ? 1.0 : 0.0;
  for (std::size_t p = 0; p < 3; ++p) {
    const auto& t = s.gt_mesh[p];
    s.pred_mesh[p] = {t.theta, t.beta, t.keypoints3d, t.vertices, t.keypoints2d, t.confidence};
    s.pred_depth[p] = s.gt_depth[p];
  }
  s.rank_depth = s.gt_depth;
  s.rank_confidence.assign(3, 0.0);
  const auto r = total_loss(s, {});
  CHECK(r.value <= 1e-5);
}

TEST_CASE("loss weights validation") {
  LossWeights w;
  CHECK_NOTHROW(w.validate());
  CHECK(w.w3d == 4);
  CHECK(w.w2d == 4);
  CHECK(w.shape == 0.01);
  CHECK(w.conf == 1);
  CHECK(w.adv == 0.01);
  CHECK(w.rank == 0.1);
  w.rank = -1;
  CHECK(error_code([&] { w.validate(); }) == ErrorCode::InvalidConfig);
}
