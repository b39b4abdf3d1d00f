#include "bmp/rotation.hpp"

#include <cmath>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "bmp/error.hpp"

namespace bmp {

namespace {

struct GramSchmidt {
  Vec3 a1, a2;
  double n1 = 0.0;  // |a1|
  Vec3 b1;
  double proj = 0.0;  // b1 · a2
  Vec3 u;             // a2 - proj b1
  double nu = 0.0;    // |u|
  Vec3 b2, b3;
};

GramSchmidt orthonormalize(const Vec6& r) {
  GramSchmidt g;
  g.a1 = r.head<3>();
  g.a2 = r.tail<3>();
  g.n1 = g.a1.norm();
  if (!(g.n1 > kGramSchmidtTolerance)) fail(ErrorCode::DegenerateRotation, "first 6D half is (near-)zero");
  g.b1 = g.a1 / g.n1;
  g.proj = g.b1.dot(g.a2);
  g.u = g.a2 - g.proj * g.b1;
  g.nu = g.u.norm();
  if (!(g.nu > kGramSchmidtTolerance))
    fail(ErrorCode::DegenerateRotation, "6D halves are (near-)parallel or second half is zero");
  g.b2 = g.u / g.nu;
  g.b3 = g.b1.cross(g.b2);
  return g;
}

}  // namespace

Mat3 rot6d_to_matrix(const Vec6& r) {
  const GramSchmidt g = orthonormalize(r);
  Mat3 R;
  R.col(0) = g.b1;
  R.col(1) = g.b2;
  R.col(2) = g.b3;
  return R;
}

bool is_rotation(const Mat3& R, double tol) {
  if (!R.allFinite()) return false;
  if (((R.transpose() * R) - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
  return std::abs(R.determinant() - 1.0) <= tol;
}

Vec6 matrix_to_rot6d(const Mat3& R) {
  if (!is_rotation(R, 1e-6)) fail(ErrorCode::NotARotation, "matrix is not orthonormal with det +1");
  Vec6 r;
  r.head<3>() = R.col(0);
  r.tail<3>() = R.col(1);
  return r;
}

Mat3 axis_angle_to_matrix(const Vec3& v) {
  const double angle = v.norm();
  if (angle == 0.0) return Mat3::Identity();
  const Vec3 k = v / angle;
  Mat3 K;
  K << 0.0, -k.z(), k.y(),
       k.z(), 0.0, -k.x(),
       -k.y(), k.x(), 0.0;
  return Mat3::Identity() + std::sin(angle) * K + (1.0 - std::cos(angle)) * (K * K);
}

Vec6 rot6d_backward(const Vec6& r, const Mat3& grad_R) {
  const GramSchmidt g = orthonormalize(r);
  const Vec3 g3 = grad_R.col(2);
  // b3 = b1 x b2
  Vec3 gb1 = grad_R.col(0) + g.b2.cross(g3);
  Vec3 gb2 = grad_R.col(1) + g3.cross(g.b1);
  // b2 = u / |u|
  const Vec3 gu = (gb2 - g.b2 * g.b2.dot(gb2)) / g.nu;
  // u = a2 - (b1 · a2) b1
  const double gu_b1 = g.b1.dot(gu);
  const Vec3 ga2 = gu - g.b1 * gu_b1;
  gb1 += -g.proj * gu - gu_b1 * g.a2;
  // b1 = a1 / |a1|
  const Vec3 ga1 = (gb1 - g.b1 * g.b1.dot(gb1)) / g.n1;
  Vec6 out;
  out.head<3>() = ga1;
  out.tail<3>() = ga2;
  return out;
}

}  // namespace bmp
