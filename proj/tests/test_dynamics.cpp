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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "tscvx/dynamics.hpp"
#include "tscvx/errors.hpp"
#include "tscvx/symmetry.hpp"

#include <unsupported/Eigen/AutoDiff>

namespace tscvx {
namespace {

struct Point {
    StateVector x;
    ControlVector u;
};

Point random_point(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    Point p;
    p.x(sx::m) = 2.5 + 0.5 * U(rng);
    for (int k = 0; k < 3; ++k) {
        p.x(sx::r + k) = 5.0 * U(rng);
        p.x(sx::v + k) = 2.0 * U(rng);
        p.x(sx::w + k) = U(rng);
    }
    for (int k = 0; k < 4; ++k) p.x(sx::q + k) = U(rng);
    p.x.segment<4>(sx::q).normalize();
    p.u = ControlVector(U(rng), U(rng), U(rng));
    p.u *= (0.3 + 4.7 * 0.5 * (1.0 + U(rng))) / p.u.norm();
    return p;
}

ProblemConstants offset_cp() {
    // Nonzero centre of pressure exercises the aerodynamic torque path.
    ProblemConstants c;
    c.r_cp_B = Eigen::Vector3d(0.05, -0.02, 0.03);
    return c;
}

bool close(double a, double b) { return std::abs(a - b) <= 1e-5 * std::max(1.0, std::abs(b)); }

TEST(Dynamics, HoverWithThrustAlongBodyAxis) {
    ProblemConstants c;
    VehicleState s;
    s.m = 2.3;
    ControlInput u;
    u.T_B = Eigen::Vector3d(s.m * c.g_I.norm(), 0.0, 0.0);
    const StateVector f = derivative(s, u, c);
    EXPECT_TRUE(f.segment<3>(sx::v).isZero(1e-15));
    EXPECT_TRUE(f.segment<3>(sx::w).isZero(1e-15));
}

TEST(Dynamics, MassRateAtMaxThrust) {
    ProblemConstants c;
    VehicleState s;
    s.m = 2.5;
    ControlInput u;
    u.T_B = Eigen::Vector3d(3.0, 4.0, 0.0);
    EXPECT_NEAR(derivative(s, u, c)(sx::m), -(1.0 / 30.0) * 5.0 - c.beta_mdot, 1e-15);
}

TEST(Dynamics, FreeFallIsGravity) {
    ProblemConstants c;
    VehicleState s;
    s.m = 2.5;
    const StateVector f = derivative(s, ControlInput{}, c);
    EXPECT_TRUE(f.segment<3>(sx::v).isApprox(Eigen::Vector3d(-1.0, 0.0, 0.0)));
}

TEST(Dynamics, NonPositiveMassThrows) {
    VehicleState s;
    s.m = 0.0;
    EXPECT_THROW(derivative(s, ControlInput{}, ProblemConstants{}), NonPositiveMass);
    EXPECT_THROW(jacobians(s, ControlInput{}, ProblemConstants{}), NonPositiveMass);
}

TEST(Dynamics, QuaternionNormConserved) {
    std::mt19937_64 rng(3);
    for (int t = 0; t < 100; ++t) {
        const Point p = random_point(rng);
        const StateVector f = derivative(p.x, p.u, ProblemConstants{});
        EXPECT_NEAR(p.x.segment<4>(sx::q).dot(f.segment<4>(sx::q)), 0.0, 1e-14);
    }
}

TEST(Dynamics, UpRotationEquivariance) {
    std::mt19937_64 rng(4);
    const ProblemConstants c;
    for (int t = 0; t < 50; ++t) {
        const Point p = random_point(rng);
        const StateVector f = derivative(p.x, p.u, c);
        for (int a = 1; a < 8; ++a) {
            const double phi = deg2rad(45.0 * a);
            const StateVector fr = derivative(rotate_state(p.x, phi), rotate_control(p.u, phi), c);
            // Derivative components transform like the state itself (q linearly).
            StateVector expected = f;
            const Eigen::Matrix3d R = up_rotation(phi);
            expected.segment<3>(sx::r) = R * f.segment<3>(sx::r);
            expected.segment<3>(sx::v) = R * f.segment<3>(sx::v);
            expected.segment<4>(sx::q) = rotate_attitude(f.segment<4>(sx::q), phi);
            expected.segment<3>(sx::w) = R * f.segment<3>(sx::w);
            EXPECT_TRUE(fr.isApprox(expected, 1e-12)) << "angle index " << a;
        }
    }
}

TEST(Jacobians, SimpleEntries) {
    ProblemConstants c;
    VehicleState s;
    s.m = 2.5;
    s.v_I = Eigen::Vector3d(0.3, -0.2, 0.1);
    ControlInput u;
    u.T_B = Eigen::Vector3d(0.0, 0.0, 1.0);
    const auto jac = jacobians(s, u, c);
    EXPECT_TRUE((jac.A.block<3, 3>(sx::r, sx::v) - Eigen::Matrix3d::Identity()).isZero(0.0));
    EXPECT_NEAR(jac.B(sx::m, 0), 0.0, 1e-15);
    EXPECT_NEAR(jac.B(sx::m, 1), 0.0, 1e-15);
    EXPECT_NEAR(jac.B(sx::m, 2), -1.0 / 30.0, 1e-15);
    EXPECT_TRUE(jac.f.isApprox(derivative(s, u, c)));
}

TEST(Jacobians, ZeroThrustGuard) {
    VehicleState s;
    s.m = 2.5;
    const auto jac = jacobians(s, ControlInput{}, ProblemConstants{});
    EXPECT_TRUE(jac.B.row(sx::m).isZero(0.0));
    EXPECT_TRUE(jac.A.allFinite() && jac.B.allFinite());
}

TEST(Jacobians, MatchCentralDifferences) {
    std::mt19937_64 rng(11);
    const ProblemConstants c = offset_cp();
    const double h = 1e-6;
    for (int t = 0; t < 100; ++t) {
        const Point p = random_point(rng);
        const auto jac = jacobians(p.x, p.u, c);
        for (int j = 0; j < kStateDim; ++j) {
            StateVector xp = p.x, xm = p.x;
            xp(j) += h;
            xm(j) -= h;
            const StateVector col =
                (derivative_generic<double>(xp, p.u, c) - derivative_generic<double>(xm, p.u, c)) /
                (2.0 * h);
            for (int i = 0; i < kStateDim; ++i) {
                ASSERT_TRUE(close(jac.A(i, j), col(i)))
                    << "A(" << i << "," << j << ") " << jac.A(i, j) << " vs " << col(i);
            }
        }
        for (int j = 0; j < kControlDim; ++j) {
            ControlVector up = p.u, um = p.u;
            up(j) += h;
            um(j) -= h;
            const StateVector col =
                (derivative_generic<double>(p.x, up, c) - derivative_generic<double>(p.x, um, c)) /
                (2.0 * h);
            for (int i = 0; i < kStateDim; ++i) {
                ASSERT_TRUE(close(jac.B(i, j), col(i)))
                    << "B(" << i << "," << j << ") " << jac.B(i, j) << " vs " << col(i);
            }
        }
    }
}

TEST(Jacobians, MatchForwardModeAutodiff) {
    using Deriv = Eigen::Matrix<double, kStateDim + kControlDim, 1>;
    using AD = Eigen::AutoDiffScalar<Deriv>;
    std::mt19937_64 rng(12);
    const ProblemConstants c = offset_cp();
    for (int t = 0; t < 100; ++t) {
        const Point p = random_point(rng);
        Eigen::Matrix<AD, kStateDim, 1> x;
        Eigen::Matrix<AD, 3, 1> u;
        for (int i = 0; i < kStateDim; ++i) x(i) = AD(p.x(i), kStateDim + kControlDim, i);
        for (int i = 0; i < 3; ++i) u(i) = AD(p.u(i), kStateDim + kControlDim, kStateDim + i);
        const auto f = derivative_generic<AD>(x, u, c);
        const auto jac = jacobians(p.x, p.u, c);
        for (int i = 0; i < kStateDim; ++i) {
            EXPECT_NEAR(f(i).value(), jac.f(i), 1e-14);
            for (int j = 0; j < kStateDim; ++j) {
                ASSERT_NEAR(jac.A(i, j), f(i).derivatives()(j), 1e-12 * std::max(1.0, std::abs(jac.A(i, j))));
            }
            for (int j = 0; j < kControlDim; ++j) {
                ASSERT_NEAR(jac.B(i, j), f(i).derivatives()(kStateDim + j),
                            1e-12 * std::max(1.0, std::abs(jac.B(i, j))));
            }
        }
    }
}

}  // namespace
}  // namespace tscvx
