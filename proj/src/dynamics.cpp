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

#include "tscvx/dynamics.hpp"

#include <string>

#include "tscvx/errors.hpp"

namespace tscvx {

namespace {

using Mat3 = Eigen::Matrix3d;
using Vec3 = Eigen::Vector3d;
using Mat34 = Eigen::Matrix<double, 3, 4>;

void check_mass(double m) {
    if (!(m > 0.0)) throw NonPositiveMass("mass must be positive, got " + std::to_string(m));
}

// d(C_IB(q) a) / dq for the homogeneous rotation matrix.
Mat34 rotate_grad(const Eigen::Vector4d& q, const Vec3& a) {
    const double q0 = q(0);
    const Vec3 qv = q.tail<3>();
    Mat34 d;
    d.col(0) = 2.0 * q0 * a + 2.0 * qv.cross(a);
    d.rightCols<3>() = -2.0 * a * qv.transpose() + 2.0 * qv.dot(a) * Mat3::Identity() +
                       2.0 * qv * a.transpose() - 2.0 * q0 * quat::skew<double>(a);
    return d;
}

// d(C_BI(q) a) / dq, using C_BI(q) = C_IB(q*).
Mat34 rotate_transpose_grad(const Eigen::Vector4d& q, const Vec3& a) {
    Mat34 d = rotate_grad(quat::conjugate(q), a);
    d.rightCols<3>() *= -1.0;
    return d;
}

}  // namespace

StateVector derivative(const StateVector& x, const ControlVector& u, const ProblemConstants& c) {
    check_mass(x(sx::m));
    return derivative_generic<double>(x, u, c);
}

StateVector derivative(const VehicleState& state, const ControlInput& ctrl,
                       const ProblemConstants& c) {
    return derivative(state.to_vector(), ctrl.T_B, c);
}

DynamicsJacobians jacobians(const StateVector& x, const ControlVector& T,
                            const ProblemConstants& c) {
    check_mass(x(sx::m));
    const double m = x(sx::m);
    const Vec3 v = x.segment<3>(sx::v);
    const Eigen::Vector4d q = x.segment<4>(sx::q);
    const Vec3 w = x.segment<3>(sx::w);
    const Mat3 J = c.J_B_diag.asDiagonal();
    const Vec3 J_inv = c.J_B_diag.cwiseInverse();
    const double c_a = 0.5 * c.rho_SA_CA;

    const double thrust = T.norm();
    const double speed = v.norm();
    const Mat3 C_IB = quat::dcm_inertial_from_body<double>(q);
    const Vec3 drag_I = -c_a * speed * v;

    Mat3 d_drag_dv = -c_a * speed * Mat3::Identity();
    if (speed > 1e-12) d_drag_dv -= c_a * v * v.transpose() / speed;

    DynamicsJacobians jac;
    jac.f = derivative_generic<double>(x, T, c);
    jac.A.setZero();
    jac.B.setZero();

    if (thrust >= 1e-9) jac.B.block<1, 3>(sx::m, 0) = -c.alpha_mdot() * T.transpose() / thrust;

    jac.A.block<3, 3>(sx::r, sx::v) = Mat3::Identity();

    jac.A.block<3, 1>(sx::v, sx::m) = -(C_IB * T + drag_I) / (m * m);
    jac.A.block<3, 3>(sx::v, sx::v) = d_drag_dv / m;
    jac.A.block<3, 4>(sx::v, sx::q) = rotate_grad(q, T) / m;
    jac.B.block<3, 3>(sx::v, 0) = C_IB / m;

    jac.A.block<4, 4>(sx::q, sx::q) = 0.5 * quat::omega_matrix<double>(w);
    Eigen::Matrix<double, 4, 3> dq_dw;
    dq_dw.row(0) = -q.tail<3>().transpose();
    dq_dw.bottomRows<3>() = q(0) * Mat3::Identity() + quat::skew<double>(q.tail<3>());
    jac.A.block<4, 3>(sx::q, sx::w) = 0.5 * dq_dw;

    const Mat3 r_cp_x = quat::skew<double>(c.r_cp_B);
    jac.A.block<3, 3>(sx::w, sx::v) =
        J_inv.asDiagonal() * (r_cp_x * C_IB.transpose() * d_drag_dv);
    jac.A.block<3, 4>(sx::w, sx::q) =
        J_inv.asDiagonal() * (r_cp_x * rotate_transpose_grad(q, drag_I));
    jac.A.block<3, 3>(sx::w, sx::w) =
        -(J_inv.asDiagonal() *
          (quat::skew<double>(w) * J - quat::skew<double>(Vec3(J * w))));
    jac.B.block<3, 3>(sx::w, 0) = J_inv.asDiagonal() * quat::skew<double>(c.r_T_B);
    return jac;
}

DynamicsJacobians jacobians(const VehicleState& state, const ControlInput& ctrl,
                            const ProblemConstants& c) {
    return jacobians(state.to_vector(), ctrl.T_B, c);
}

}  // namespace tscvx
