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

#ifndef TSCVX_SYMMETRY_HPP
#define TSCVX_SYMMETRY_HPP

#include <cmath>

#include "tscvx/problem.hpp"
#include "tscvx/quaternion.hpp"

// Rotation about the inertial Up axis e1. The attitude is conjugated,
// q' = q_phi (x) q (x) q_phi*, so body-frame vectors rotate about body e1 as
// well. The vehicle is axisymmetric about e1, so the dynamics, the constraint
// set and the terminal attitude q_id are all invariant.

namespace tscvx {

/// Rotation matrix about e1 by phi [rad].
inline Eigen::Matrix3d up_rotation(double phi) {
    const double c = std::cos(phi), s = std::sin(phi);
    Eigen::Matrix3d R;
    R << 1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c;
    return R;
}

inline Eigen::Vector4d rotate_attitude(const Eigen::Vector4d& q, double phi) {
    const Eigen::Vector4d qp = quat::about_up(phi);
    return quat::multiply(quat::multiply(qp, q), quat::conjugate(qp));
}

inline StateVector rotate_state(const StateVector& x, double phi) {
    const Eigen::Matrix3d R = up_rotation(phi);
    StateVector y = x;
    y.segment<3>(sx::r) = R * x.segment<3>(sx::r);
    y.segment<3>(sx::v) = R * x.segment<3>(sx::v);
    y.segment<4>(sx::q) = rotate_attitude(x.segment<4>(sx::q), phi);
    y.segment<3>(sx::w) = R * x.segment<3>(sx::w);
    return y;
}

inline ControlVector rotate_control(const ControlVector& u, double phi) {
    return up_rotation(phi) * u;
}

inline ProblemInstance rotate_instance(const ProblemInstance& inst, double phi) {
    ProblemInstance out = inst;
    out.x0 = VehicleState::from_vector(rotate_state(inst.x0.to_vector(), phi));
    return out;
}

}  // namespace tscvx

#endif  // TSCVX_SYMMETRY_HPP
