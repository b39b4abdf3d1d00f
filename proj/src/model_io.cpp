#include "bmp/model_io.hpp"

#include <algorithm>
#include <fstream>

#include "bmp/atomic_file.hpp"
#include "bmp/binary_io.hpp"

namespace bmp {

namespace {

constexpr char kMagic[5] = "BMPM";
// Guards against absurd allocations from corrupt headers.
constexpr std::uint32_t kMaxDim = 1u << 24;

template <typename Matrix>
void write_matrix(std::ostream& os, const Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) binary::write_le<double>(os, m(r, c));
}

template <typename Matrix>
void read_matrix(std::istream& is, Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  m.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = binary::read_le<double>(is, what);
}

}  // namespace

void save_model(const BodyModelSpec& model, const std::filesystem::path& path) {
  model.validate();
  write_file_atomically(path, [&](std::ostream& os) {
    binary::write_magic(os, kMagic);
    binary::write_le<std::uint32_t>(os, kModelFormatVersion);
    binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.num_vertices()));
    binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.num_joints()));
    binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.num_betas()));
    binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.num_keypoints()));
    write_matrix(os, model.template_vertices);
    write_matrix(os, model.shape_blendshapes);
    write_matrix(os, model.joint_regressor);
    write_matrix(os, model.skinning_weights);
    write_matrix(os, model.keypoint_regressor);
    for (int p : model.parent) binary::write_le<std::int32_t>(os, p);
    binary::write_le<std::uint32_t>(os, static_cast<std::uint32_t>(model.faces.size()));
    for (const auto& f : model.faces)
      for (int idx : f) binary::write_le<std::int32_t>(os, idx);
  });
}

BodyModelSpec load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoError, "cannot open model file " + path.string());
  binary::expect_magic(is, kMagic);
  const auto version = binary::read_le<std::uint32_t>(is, "version");
  if (version != kModelFormatVersion) fail(ErrorCode::FormatError, "unsupported model format version " + std::to_string(version));
  const auto V = binary::read_le<std::uint32_t>(is, "V");
  const auto Jm = binary::read_le<std::uint32_t>(is, "Jm");
  const auto B = binary::read_le<std::uint32_t>(is, "B");
  const auto J = binary::read_le<std::uint32_t>(is, "J");
  if (std::max({V, Jm, B, J}) > kMaxDim) fail(ErrorCode::FormatError, "implausible model dimensions");

  BodyModelSpec m;
  read_matrix(is, m.template_vertices, V, 3, "template_vertices");
  read_matrix(is, m.shape_blendshapes, 3 * Eigen::Index{V}, B, "shape_blendshapes");
  read_matrix(is, m.joint_regressor, Jm, V, "joint_regressor");
  read_matrix(is, m.skinning_weights, V, Jm, "skinning_weights");
  read_matrix(is, m.keypoint_regressor, J, V, "keypoint_regressor");
  m.parent.resize(Jm);
  for (auto& p : m.parent) p = binary::read_le<std::int32_t>(is, "parent");
  const auto F = binary::read_le<std::uint32_t>(is, "face count");
  if (F > kMaxDim) fail(ErrorCode::FormatError, "implausible face count");
  m.faces.resize(F);
  for (auto& f : m.faces)
    for (int& idx : f) idx = binary::read_le<std::int32_t>(is, "faces");
  if (is.peek() != std::char_traits<char>::eof()) fail(ErrorCode::FormatError, "trailing bytes after model payload");
  m.validate();
  return m;
}

}  // namespace bmp
