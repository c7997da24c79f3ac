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

#ifndef TSCVX_DYNAMICS_HPP
#define TSCVX_DYNAMICS_HPP

#include <cmath>

#include <Eigen/Dense>

#include "tscvx/problem.hpp"
#include "tscvx/quaternion.hpp"

namespace tscvx {

using StateMatrix = Eigen::Matrix<double, kStateDim, kStateDim>;
using InputMatrix = Eigen::Matrix<double, kStateDim, kControlDim>;

struct DynamicsJacobians {
    StateMatrix A;
    InputMatrix B;
    StateVector f;
};

/// Right-hand side of the 6-DoF equations for any scalar type (double or a
/// forward-mode AD scalar). Does not check the mass sign.
template <typename Scalar>
Eigen::Matrix<Scalar, kStateDim, 1> derivative_generic(const Eigen::Matrix<Scalar, kStateDim, 1>& x,
                                                       const Eigen::Matrix<Scalar, 3, 1>& T,
                                                       const ProblemConstants& c) {
    using std::sqrt;
    using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
    const Scalar m = x(sx::m);
    const Vec3 v = x.template segment<3>(sx::v);
    const Eigen::Matrix<Scalar, 4, 1> q = x.template segment<4>(sx::q);
    const Vec3 w = x.template segment<3>(sx::w);

    const Vec3 g = c.g_I.template cast<Scalar>();
    const Vec3 J = c.J_B_diag.template cast<Scalar>();
    const Vec3 r_T = c.r_T_B.template cast<Scalar>();
    const Vec3 r_cp = c.r_cp_B.template cast<Scalar>();
    const Scalar c_a = Scalar(0.5 * c.rho_SA_CA);

    const Scalar thrust = sqrt(T.dot(T));
    const Scalar speed = sqrt(v.dot(v));
    const auto C_IB = quat::dcm_inertial_from_body<Scalar>(q);
    const Vec3 drag_I = -c_a * speed * v;
    const Vec3 drag_B = C_IB.transpose() * drag_I;
    const Vec3 Jw = J.cwiseProduct(w);

    Eigen::Matrix<Scalar, kStateDim, 1> f;
    f(sx::m) = -Scalar(c.alpha_mdot()) * thrust - Scalar(c.beta_mdot);
    f.template segment<3>(sx::r) = v;
    f.template segment<3>(sx::v) = (C_IB * T + drag_I) / m + g;
    f.template segment<4>(sx::q) = Scalar(0.5) * quat::omega_matrix<Scalar>(w) * q;
    f.template segment<3>(sx::w) =
        (r_T.cross(T) + r_cp.cross(drag_B) - w.cross(Jw)).cwiseQuotient(J);
    return f;
}

/// State derivative; throws NonPositiveMass when m <= 0.
StateVector derivative(const StateVector& x, const ControlVector& u, const ProblemConstants& c);
StateVector derivative(const VehicleState& state, const ControlInput& ctrl,
                       const ProblemConstants& c);

/// Closed-form partials of `derivative`. For |T| < 1e-9 the thrust-norm
/// gradient is taken as zero.
DynamicsJacobians jacobians(const StateVector& x, const ControlVector& u,
                            const ProblemConstants& c);
DynamicsJacobians jacobians(const VehicleState& state, const ControlInput& ctrl,
                            const ProblemConstants& c);

}  // namespace tscvx

#endif  // TSCVX_DYNAMICS_HPP
