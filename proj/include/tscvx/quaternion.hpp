/*
 Copyright 2026 The tscvx Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef TSCVX_QUATERNION_HPP
#define TSCVX_QUATERNION_HPP

#include <cmath>

#include <Eigen/Dense>

// Scalar-first quaternions (q0, q1, q2, q3). A vehicle attitude q = q_{B<-I}
// follows the kinematics q' = 1/2 Omega(w_B) q, which makes C_{I<-B}(q) the
// Hamilton rotation matrix of q and C_{B<-I}(q) its transpose.

namespace tscvx::quat {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <typename Scalar>
using Vec4 = Eigen::Matrix<Scalar, 4, 1>;
template <typename Scalar>
using Mat3 = Eigen::Matrix<Scalar, 3, 3>;

template <typename Scalar>
Mat3<Scalar> skew(const Vec3<Scalar>& v) {
    Mat3<Scalar> s;
    s << Scalar(0), -v(2), v(1),
         v(2), Scalar(0), -v(0),
         -v(1), v(0), Scalar(0);
    return s;
}

/// 4x4 kinematic matrix: Omega(w) q == q (x) (0, w).
template <typename Scalar>
Eigen::Matrix<Scalar, 4, 4> omega_matrix(const Vec3<Scalar>& w) {
    Eigen::Matrix<Scalar, 4, 4> o;
    o << Scalar(0), -w(0), -w(1), -w(2),
         w(0), Scalar(0), w(2), -w(1),
         w(1), -w(2), Scalar(0), w(0),
         w(2), w(1), -w(0), Scalar(0);
    return o;
}

template <typename Scalar>
Mat3<Scalar> dcm_inertial_from_body(const Vec4<Scalar>& q) {
    const Scalar q0 = q(0), q1 = q(1), q2 = q(2), q3 = q(3);
    Mat3<Scalar> c;
    // Homogeneous quadratic form; equals the usual 1 - 2(..) diagonal for unit q.
    c << q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3, Scalar(2) * (q1 * q2 - q0 * q3),
         Scalar(2) * (q1 * q3 + q0 * q2),
         Scalar(2) * (q1 * q2 + q0 * q3), q0 * q0 - q1 * q1 + q2 * q2 - q3 * q3,
         Scalar(2) * (q2 * q3 - q0 * q1),
         Scalar(2) * (q1 * q3 - q0 * q2), Scalar(2) * (q2 * q3 + q0 * q1),
         q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3;
    return c;
}

template <typename Scalar>
Mat3<Scalar> dcm_body_from_inertial(const Vec4<Scalar>& q) {
    return dcm_inertial_from_body<Scalar>(q).transpose();
}

/// Hamilton product a (x) b.
inline Eigen::Vector4d multiply(const Eigen::Vector4d& a, const Eigen::Vector4d& b) {
    Eigen::Vector4d r;
    r(0) = a(0) * b(0) - a.tail<3>().dot(b.tail<3>());
    r.tail<3>() = a(0) * b.tail<3>() + b(0) * a.tail<3>() + a.tail<3>().cross(b.tail<3>());
    return r;
}

inline Eigen::Vector4d conjugate(const Eigen::Vector4d& q) {
    return Eigen::Vector4d(q(0), -q(1), -q(2), -q(3));
}

inline Eigen::Vector4d identity() { return Eigen::Vector4d(1.0, 0.0, 0.0, 0.0); }

/// Rotation by `angle` [rad] about the inertial Up axis e1.
inline Eigen::Vector4d about_up(double angle) {
    return Eigen::Vector4d(std::cos(0.5 * angle), std::sin(0.5 * angle), 0.0, 0.0);
}

inline Eigen::Vector4d normalized(const Eigen::Vector4d& q) {
    const double n = q.norm();
    return n > 0.0 ? Eigen::Vector4d(q / n) : identity();
}

/// Shortest-path spherical interpolation between unit quaternions.
inline Eigen::Vector4d slerp(const Eigen::Vector4d& a, const Eigen::Vector4d& b_in, double t) {
    Eigen::Vector4d b = b_in;
    double cos_half = a.dot(b);
    if (cos_half < 0.0) {
        b = -b;
        cos_half = -cos_half;
    }
    if (cos_half > 0.9995) {
        return normalized(a + t * (b - a));
    }
    const double half = std::acos(std::min(1.0, cos_half));
    const double s = std::sin(half);
    return normalized((std::sin((1.0 - t) * half) / s) * a + (std::sin(t * half) / s) * b);
}

}  // namespace tscvx::quat

#endif  // TSCVX_QUATERNION_HPP
