#pragma once

#include "bmp/types.hpp"

namespace bmp {

inline constexpr double kGramSchmidtTolerance = 1e-8;

// Continuous 6D rotation: the two halves are Gram-Schmidt orthonormalized into
// the first two columns; the third column is their cross product.
// Throws DegenerateRotation when a half vanishes or the halves are parallel.
Mat3 rot6d_to_matrix(const Vec6& r);

// Inverse convention: the first two columns, stacked. Throws NotARotation when
// R is not orthonormal (1e-6) with det +1.
Vec6 matrix_to_rot6d(const Mat3& R);

// Rodrigues' formula.
Mat3 axis_angle_to_matrix(const Vec3& v);

// Reverse-mode derivative of rot6d_to_matrix: given dL/dR returns dL/dr.
Vec6 rot6d_backward(const Vec6& r, const Mat3& grad_R);

bool is_rotation(const Mat3& R, double tol);

}  // namespace bmp
