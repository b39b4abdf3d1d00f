#include "bmp/serialization.hpp"

#include "bmp/error.hpp"

namespace bmp {

namespace {

template <class F>
auto guarded(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Json::exception& e) {
    fail(ErrorCode::FormatError, std::string("malformed document: ") + e.what());
  }
}

void check_version(const Json& j) {
  if (!j.is_object() || !j.contains("version")) fail(ErrorCode::FormatError, "document has no version field");
  if (j.at("version").get<int>() != kSchemaVersion)
    fail(ErrorCode::FormatError, "unsupported schema version " + j.at("version").dump());
}

Json vec_json(const VecX& v) { return Json(std::vector<double>(v.data(), v.data() + v.size())); }

VecX json_vec(const Json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const VecX>(v.data(), static_cast<Eigen::Index>(v.size()));
}

template <class Points>
Json points_json(const Points& p) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < p.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < p.cols(); ++c) row.push_back(p(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

template <class Points>
Points json_points(const Json& j) {
  Points p(static_cast<Eigen::Index>(j.size()), Points::ColsAtCompileTime);
  for (std::size_t r = 0; r < j.size(); ++r) {
    if (j[r].size() != static_cast<std::size_t>(Points::ColsAtCompileTime))
      fail(ErrorCode::FormatError, "point row has the wrong length");
    for (Eigen::Index c = 0; c < p.cols(); ++c) p(static_cast<Eigen::Index>(r), c) = j[r][static_cast<std::size_t>(c)].get<double>();
  }
  return p;
}

Json matrix_json(const MatX& m) {
  return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data(), m.data() + m.size())}};
}

MatX json_matrix(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (rows < 0 || cols < 0 || static_cast<std::size_t>(rows * cols) != data.size())
    fail(ErrorCode::FormatError, "matrix data does not match its shape");
  return Eigen::Map<const MatX>(data.data(), rows, cols);
}

Json camera_json(const CameraParams& c) { return Json{{"scale", c.scale}, {"tx", c.tx}, {"ty", c.ty}}; }

CameraParams json_camera(const Json& j) {
  return {j.at("scale").get<double>(), j.at("tx").get<double>(), j.at("ty").get<double>()};
}

}  // namespace

Json scene_to_json(const Scene& scene) {
  Json persons = Json::array();
  for (const auto& p : scene.persons) {
    Json jp{{"center", {p.center.x(), p.center.y()}},
            {"height", p.height},
            {"width", p.width},
            {"pose6d", vec_json(p.pose6d)},
            {"beta", vec_json(p.beta)},
            {"depth", p.depth},
            {"keypoints2d", points_json(p.keypoints2d)},
            {"visibility", vec_json(p.visibility)},
            {"keypoints3d", points_json(p.keypoints3d)}};
    if (p.camera) jp["camera"] = camera_json(*p.camera);
    persons.push_back(std::move(jp));
  }
  return Json{{"version", kSchemaVersion},
              {"image", {{"width", scene.image.width}, {"height", scene.image.height}}},
              {"seed", scene.seed},
              {"persons", std::move(persons)}};
}

Scene scene_from_json(const Json& j) {
  return guarded([&] {
    check_version(j);
    Scene s;
    s.image = {j.at("image").at("width").get<int>(), j.at("image").at("height").get<int>()};
    s.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& jp : j.at("persons")) {
      PersonAnnotation p;
      const auto c = jp.at("center").get<std::vector<double>>();
      if (c.size() != 2) fail(ErrorCode::FormatError, "center must have two entries");
      p.center = Vec2(c[0], c[1]);
      p.height = jp.at("height").get<double>();
      p.width = jp.at("width").get<double>();
      p.pose6d = json_vec(jp.at("pose6d"));
      p.beta = json_vec(jp.at("beta"));
      p.depth = jp.at("depth").get<double>();
      p.keypoints2d = json_points<Points2>(jp.at("keypoints2d"));
      p.visibility = json_vec(jp.at("visibility"));
      p.keypoints3d = json_points<Points3>(jp.at("keypoints3d"));
      if (jp.contains("camera")) p.camera = json_camera(jp.at("camera"));
      p.validate();
      s.persons.push_back(std::move(p));
    }
    return s;
  });
}

Json detections_to_json(const std::vector<Detection>& detections) {
  Json out = Json::array();
  for (const auto& d : detections) {
    out.push_back(Json{{"level", d.level},
                       {"cell", {d.cell.i, d.cell.j}},
                       {"prob", d.prob},
                       {"theta", vec_json(d.theta)},
                       {"beta", vec_json(d.beta)},
                       {"camera", camera_json(d.camera)},
                       {"confidence", d.confidence},
                       {"depth", d.depth},
                       {"score", d.score}});
  }
  return Json{{"version", kSchemaVersion}, {"detections", std::move(out)}};
}

std::vector<Detection> detections_from_json(const Json& j) {
  return guarded([&] {
    check_version(j);
    std::vector<Detection> out;
    for (const auto& jd : j.at("detections")) {
      Detection d;
      d.level = jd.at("level").get<int>();
      const auto cell = jd.at("cell").get<std::vector<int>>();
      if (cell.size() != 2) fail(ErrorCode::FormatError, "cell must have two entries");
      d.cell = {cell[0], cell[1]};
      d.prob = jd.at("prob").get<double>();
      d.theta = json_vec(jd.at("theta"));
      d.beta = json_vec(jd.at("beta"));
      d.camera = json_camera(jd.at("camera"));
      d.confidence = jd.at("confidence").get<double>();
      d.depth = jd.at("depth").get<double>();
      d.score = jd.at("score").get<double>();
      out.push_back(std::move(d));
    }
    return out;
  });
}

Json breakdown_to_json(const LossBreakdown& breakdown) {
  Json out = Json::object();
  for (const auto& [name, value] : breakdown) out[name] = value;
  return out;
}

Json history_to_json(const std::vector<LossBreakdown>& history) {
  Json steps = Json::array();
  for (std::size_t t = 0; t < history.size(); ++t) {
    Json entry = breakdown_to_json(history[t]);
    entry["step"] = t;
    steps.push_back(std::move(entry));
  }
  return Json{{"version", kSchemaVersion}, {"history", std::move(steps)}};
}

Json regressor_to_json(const ToyRegressor& reg) {
  return Json{{"version", kSchemaVersion},   {"w1", matrix_json(reg.w1)},
              {"b1", vec_json(reg.b1)},      {"w2", matrix_json(reg.w2)},
              {"b2", vec_json(reg.b2)},      {"in_offset", vec_json(reg.in_offset)},
              {"in_scale", vec_json(reg.in_scale)}, {"out_offset", vec_json(reg.out_offset)},
              {"out_scale", vec_json(reg.out_scale)}, {"inst_w", vec_json(reg.inst_w)}};
}

ToyRegressor regressor_from_json(const Json& j) {
  return guarded([&] {
    check_version(j);
    ToyRegressor r;
    r.w1 = json_matrix(j.at("w1"));
    r.b1 = json_vec(j.at("b1"));
    r.w2 = json_matrix(j.at("w2"));
    r.b2 = json_vec(j.at("b2"));
    r.in_offset = json_vec(j.at("in_offset"));
    r.in_scale = json_vec(j.at("in_scale"));
    r.out_offset = json_vec(j.at("out_offset"));
    r.out_scale = json_vec(j.at("out_scale"));
    r.inst_w = json_vec(j.at("inst_w"));
    const Eigen::Index H = r.w1.rows();
    const Eigen::Index F = r.w1.cols();
    if (r.b1.size() != H || r.w2.cols() != H || r.w2.rows() != channel::kCount || r.b2.size() != channel::kCount ||
        r.in_offset.size() != F || r.in_scale.size() != F || r.out_offset.size() != channel::kCount ||
        r.out_scale.size() != channel::kCount || r.inst_w.size() != ToyRegressor::kInstanceFeatures)
      fail(ErrorCode::FormatError, "regressor blocks have inconsistent shapes");
    return r;
  });
}

Json ablation_to_json(const AblationReport& report) {
  const auto arm = [](const AblationArm& a) {
    return Json{{"rank_weight", a.rank_weight},
                {"accuracy", a.accuracy},
                {"pairs", a.pairs},
                {"initial_loss", a.initial_loss},
                {"final_loss", a.final_loss}};
  };
  return Json{{"version", kSchemaVersion},
              {"seed", report.seed},
              {"with_rank", arm(report.with_rank)},
              {"without_rank", arm(report.without_rank)},
              {"improvement", report.improvement()}};
}

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    fail(ErrorCode::FormatError, std::string("invalid JSON: ") + e.what());
  }
}

}  // namespace bmp
