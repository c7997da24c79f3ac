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

#include "tscvx/errors.hpp"
#include "tscvx/problem.hpp"
#include "tscvx/symmetry.hpp"
#include "tscvx/trajectory.hpp"

namespace tscvx {
namespace {

Trajectory with_final_mass(double m) {
    Trajectory t(50);
    t.X.row(sx::m).setConstant(2.5);
    t.X(sx::m, 49) = m;
    return t;
}

int idx(ConstraintKind k) { return static_cast<int>(k); }

TEST(Cost, SignConvention) {
    EXPECT_DOUBLE_EQ(cost(with_final_mass(2.0)), -2.0);
    ProblemConstants c;
    EXPECT_DOUBLE_EQ(cost(with_final_mass(c.m_dry)), -2.0);
    EXPECT_LT(cost(with_final_mass(2.5)), cost(with_final_mass(2.1)));
    EXPECT_THROW(cost(Trajectory(1)), std::invalid_argument);
}

TEST(Constants, PublishedDefaults) {
    ProblemConstants c;
    EXPECT_DOUBLE_EQ(c.rho0, 0.0);
    EXPECT_DOUBLE_EQ(c.rho1, 0.1);
    EXPECT_DOUBLE_EQ(c.rho2, 0.7);
    EXPECT_DOUBLE_EQ(c.T_min, 0.3);
    EXPECT_DOUBLE_EQ(c.T_max, 5.0);
    EXPECT_DOUBLE_EQ(c.lambda, 500.0);
    EXPECT_EQ(c.N, 50);
    EXPECT_EQ(c.iter_max, 20);
    EXPECT_DOUBLE_EQ(c.eta_reduced_init, 0.01);
    EXPECT_DOUBLE_EQ(c.eta_full_init, 2.0);
    EXPECT_NEAR(c.alpha_mdot(), 1.0 / 30.0, 1e-15);
    EXPECT_NO_THROW(c.validate());
    c.T_min = 6.0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Instance, Validation) {
    ProblemInstance inst = ProblemInstance::nominal();
    EXPECT_NO_THROW(inst.validate());
    inst.x0.m = 2.0;
    EXPECT_THROW(inst.validate(), std::invalid_argument);
    inst = ProblemInstance::nominal();
    inst.gamma_gs = 0.0;
    EXPECT_THROW(inst.validate(), std::invalid_argument);
}

TEST(Constraints, ThrustFloorTightAtBoundary) {
    ProblemInstance inst;
    VehicleState s;
    s.m = 2.5;
    ControlInput u;
    u.T_B = Eigen::Vector3d(0.3, 0.0, 0.0);
    const auto g = evaluate_constraints(s, u, inst);
    EXPECT_NEAR(g[idx(ConstraintKind::ThrustLb)], 0.0, 1e-15);
    EXPECT_LE(std::abs(g[idx(ConstraintKind::ThrustLb)]), inst.constants.activation_tol);
}

TEST(Constraints, MassFloorAtDryMass) {
    ProblemInstance inst;
    VehicleState s;
    s.m = inst.constants.m_dry;
    const auto g = evaluate_constraints(s, ControlInput{}, inst);
    EXPECT_DOUBLE_EQ(g[idx(ConstraintKind::MassLb)], 0.0);
}

TEST(Constraints, GlideslopeDirectlyAbovePad) {
    for (double deg : {5.0, 20.0, 60.0, 90.0 - 1e-9}) {
        ProblemInstance inst;
        inst.gamma_gs = deg2rad(deg);
        VehicleState s;
        s.m = 2.5;
        s.r_I = Eigen::Vector3d(1.0, 0.0, 0.0);
        const auto g = evaluate_constraints(s, ControlInput{}, inst);
        EXPECT_DOUBLE_EQ(g[idx(ConstraintKind::Glideslope)], -1.0);
    }
}

TEST(Constraints, HandEvaluatedRows) {
    ProblemInstance inst;
    inst.theta_max = deg2rad(60.0);
    VehicleState s;
    s.m = 2.4;
    s.r_I = Eigen::Vector3d(2.0, 3.0, 4.0);
    const double h = 0.5 * deg2rad(30.0);
    s.q_BI = Eigen::Vector4d(std::cos(h), 0.0, std::sin(h), 0.0);
    s.w_B = Eigen::Vector3d(0.0, 0.0, 2.0);
    ControlInput u;
    u.T_B = Eigen::Vector3d(3.0, 0.0, 4.0);
    const auto g = evaluate_constraints(s, u, inst);
    EXPECT_NEAR(g[idx(ConstraintKind::MassLb)], -0.4, 1e-15);
    EXPECT_NEAR(g[idx(ConstraintKind::Glideslope)], std::tan(deg2rad(20.0)) * 5.0 - 2.0, 1e-14);
    // 2 sin^2(15 deg) = 1 - cos(30 deg)
    EXPECT_NEAR(g[idx(ConstraintKind::Tilt)], std::cos(deg2rad(60.0)) - std::cos(deg2rad(30.0)),
                1e-14);
    EXPECT_NEAR(g[idx(ConstraintKind::OmegaMax)], 2.0 - deg2rad(90.0), 1e-14);
    EXPECT_NEAR(g[idx(ConstraintKind::ThrustLb)], 0.3 - 5.0, 1e-14);
    EXPECT_NEAR(g[idx(ConstraintKind::ThrustUb)], 0.0, 1e-14);
    EXPECT_NEAR(g[idx(ConstraintKind::Gimbal)], std::cos(deg2rad(20.0)) * 5.0 - 3.0, 1e-14);
}

TEST(Constraints, TiltInvariantUnderUpRotation) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    ProblemInstance inst;
    inst.theta_max = deg2rad(45.0);
    for (int trial = 0; trial < 50; ++trial) {
        StateVector x = StateVector::Zero();
        x(sx::m) = 2.5;
        for (int k = 1; k < kStateDim; ++k) x(k) = U(rng);
        x.segment<4>(sx::q).normalize();
        const ControlVector u(2.0 + U(rng), U(rng), U(rng));
        const auto g0 = evaluate_constraints(x, u, inst);
        for (int a = 0; a < 8; ++a) {
            const double phi = deg2rad(45.0 * a);
            const auto g1 = evaluate_constraints(rotate_state(x, phi), rotate_control(u, phi), inst);
            for (int k = 0; k < kRowsPerNode; ++k) EXPECT_NEAR(g0[k], g1[k], 1e-12);
        }
    }
}

TEST(Catalog, WidthOrderingAndRoundTrip) {
    ConstraintCatalog cat(50);
    EXPECT_EQ(cat.width(), 350);
    EXPECT_EQ(cat.row(ConstraintCatalog::index(3, ConstraintKind::Tilt)).node, 3);
    EXPECT_EQ(cat.row(ConstraintCatalog::index(3, ConstraintKind::Tilt)).kind, ConstraintKind::Tilt);
    EXPECT_FALSE(cat.row(ConstraintCatalog::index(0, ConstraintKind::ThrustLb)).convex);
    const std::string text = cat.serialize();
    const ConstraintCatalog back = ConstraintCatalog::deserialize(text);
    EXPECT_EQ(back, cat);
    EXPECT_EQ(back.serialize(), text);
    EXPECT_EQ(back.hash(), cat.hash());
    EXPECT_NE(ConstraintCatalog(49).hash(), cat.hash());
    EXPECT_THROW(ConstraintCatalog::deserialize("bogus"), FormatError);
}

TEST(Boundary, RowCounts) {
    const ProblemInstance inst = ProblemInstance::nominal();
    const auto rows = boundary_conditions(inst);
    int initial = 0, terminal = 0;
    for (const auto& r : rows) {
        if (r.node == 0) {
            ++initial;
            EXPECT_FALSE(r.state_index >= sx::q && r.state_index < sx::w);
        } else {
            EXPECT_EQ(r.node, inst.constants.N - 1);
            ++terminal;
        }
    }
    EXPECT_EQ(initial, 10);
    EXPECT_EQ(terminal, 13);
    bool found = false;
    for (const auto& r : rows) {
        if (r.node == 49 && r.state_index == sx::v) {
            EXPECT_DOUBLE_EQ(r.value, -0.1);
            found = true;
        }
    }
    EXPECT_TRUE(found);
}

TEST(Boundary, TrivialTrajectoryHasZeroResidual) {
    ProblemInstance inst;
    inst.x0.r_I.setZero();
    inst.x0.v_I = inst.xf.v_I;
    inst.x0.m = 2.5;
    Trajectory t(inst.constants.N);
    for (int i = 0; i < t.n_nodes(); ++i) {
        t.X.col(i) = inst.x0.to_vector();
    }
    for (const auto& r : boundary_conditions(inst)) {
        EXPECT_DOUBLE_EQ(t.X(r.state_index, r.node), r.value);
    }
}

TEST(Json, InstanceRoundTrip) {
    const ProblemInstance inst = ProblemInstance::nominal();
    const ProblemInstance back = instance_from_json(to_json(inst));
    EXPECT_NEAR(back.gamma_gs, inst.gamma_gs, 1e-15);
    EXPECT_TRUE(back.x0.r_I.isApprox(inst.x0.r_I));
    EXPECT_NEAR(back.x0.m, inst.x0.m, 1e-15);
    EXPECT_NEAR(back.constants.w_max, inst.constants.w_max, 1e-15);
    EXPECT_EQ(back.constants.N, 50);
}

TEST(Json, TrajectoryRoundTrip) {
    const Trajectory t = initial_guess(ProblemInstance::nominal());
    EXPECT_EQ(trajectory_from_json(to_json(t)), t);
    const std::string csv = to_csv(t);
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 51);
}

TEST(InitialGuess, EndpointsAndHover) {
    const ProblemInstance inst = ProblemInstance::nominal();
    const Trajectory t = initial_guess(inst);
    EXPECT_EQ(t.n_nodes(), 50);
    EXPECT_DOUBLE_EQ(t.X(sx::m, 0), inst.x0.m);
    EXPECT_DOUBLE_EQ(t.X(sx::m, 49), inst.constants.m_dry);
    EXPECT_TRUE((t.X.block<3, 1>(sx::r, 49).isZero()));
    EXPECT_DOUBLE_EQ(t.sigma, 5.0);
    EXPECT_NEAR(t.U(0, 0), inst.x0.m, 1e-12);
}

}  // namespace
}  // namespace tscvx
