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

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "support/socp_oracle.hpp"
#include "tscvx/conic.hpp"
#include "tscvx/errors.hpp"

namespace tscvx {
namespace {

ConeProgram make(const Eigen::VectorXd& c, const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
                 std::vector<Cone> cones) {
    ConeProgram p;
    p.c = c;
    p.G = G.sparseView(0.0, 0.0);
    p.h = h;
    p.cones = std::move(cones);
    return p;
}

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    int i = 0;
    for (double x : v) out(i++) = x;
    return out;
}

Eigen::MatrixXd mat(int r, int c, std::initializer_list<double> v) {
    Eigen::MatrixXd m(r, c);
    int i = 0;
    for (double x : v) {
        m(i / c, i % c) = x;
        ++i;
    }
    return m;
}

TEST(Conic, OneDimensionalLp) {
    // min x  s.t.  x >= 1  written as  -x + s = -1, s >= 0
    const auto p = make(vec({1.0}), mat(1, 1, {-1.0}), vec({-1.0}), {{ConeKind::NonNeg, 1}});
    const auto sol = solve(p);
    ASSERT_EQ(sol.status, ConeStatus::Optimal);
    EXPECT_NEAR(sol.z(0), 1.0, 1e-7);
    EXPECT_NEAR(sol.y(0), 1.0, 1e-7);
    EXPECT_TRUE(dual_activity(sol, p, {{0, 1}})[0]);
}

TEST(Conic, NormEvaluation) {
    // min t  s.t.  ||(3, 4)|| <= t
    const auto p = make(vec({1.0}), mat(3, 1, {-1.0, 0.0, 0.0}), vec({0.0, 3.0, 4.0}), {{ConeKind::SOC, 3}});
    const auto sol = solve(p);
    ASSERT_EQ(sol.status, ConeStatus::Optimal);
    EXPECT_NEAR(sol.z(0), 5.0, 1e-6);
    EXPECT_LT(std::abs(p.c.dot(sol.z) + p.h.dot(sol.y)), 1e-7 * (1.0 + std::abs(p.c.dot(sol.z))));
}

TEST(Conic, RedundantRowIsInactive) {
    const auto p = make(vec({1.0}), mat(2, 1, {-1.0, -1.0}), vec({-1.0, 0.0}), {{ConeKind::NonNeg, 2}});
    const auto sol = solve(p);
    ASSERT_EQ(sol.status, ConeStatus::Optimal);
    const auto act = dual_activity(sol, p, {{0, 1}, {1, 2}});
    EXPECT_TRUE(act[0]);
    EXPECT_FALSE(act[1]);
}

TEST(Conic, EqualityConstrainedLp) {
    // min x1 + 2 x2  s.t.  x1 + x2 = 1,  x >= 0
    const auto p = make(vec({1.0, 2.0}), mat(3, 2, {1.0, 1.0, -1.0, 0.0, 0.0, -1.0}), vec({1.0, 0.0, 0.0}),
                        {{ConeKind::Zero, 1}, {ConeKind::NonNeg, 2}});
    const auto sol = solve(p);
    ASSERT_EQ(sol.status, ConeStatus::Optimal);
    EXPECT_NEAR(sol.z(0), 1.0, 1e-7);
    EXPECT_NEAR(sol.z(1), 0.0, 1e-7);
    EXPECT_NEAR(sol.primal_objective, 1.0, 1e-7);
    // c + G'y = 0
    EXPECT_LT((p.c + Eigen::MatrixXd(p.G).transpose() * sol.y).norm(), 1e-6);
}

TEST(Conic, PrimalInfeasible) {
    // x >= 1 and x <= 0
    const auto p = make(vec({1.0}), mat(2, 1, {-1.0, 1.0}), vec({-1.0, 0.0}), {{ConeKind::NonNeg, 2}});
    const auto sol = solve(p);
    EXPECT_EQ(sol.status, ConeStatus::PrimalInfeasible);
    EXPECT_LT(p.h.dot(sol.y), 0.0);
}

TEST(Conic, DualInfeasible) {
    // min x  s.t.  x <= 1
    const auto p = make(vec({1.0}), mat(1, 1, {1.0}), vec({1.0}), {{ConeKind::NonNeg, 1}});
    const auto sol = solve(p);
    EXPECT_EQ(sol.status, ConeStatus::DualInfeasible);
    EXPECT_LT(p.c.dot(sol.z), 0.0);
}

TEST(Conic, MalformedPrograms) {
    auto p = make(vec({1.0}), mat(1, 1, {-1.0}), vec({-1.0, 2.0}), {{ConeKind::NonNeg, 2}});
    EXPECT_THROW(solve(p), MalformedProgram);
    p = make(vec({1.0}), mat(2, 1, {-1.0, 0.0}), vec({-1.0, 2.0}), {{ConeKind::NonNeg, 2}});
    EXPECT_THROW(solve(p), MalformedProgram);
    p = make(vec({1.0}), mat(1, 1, {-1.0}), vec({-1.0}), {{ConeKind::NonNeg, 2}});
    EXPECT_THROW(solve(p), MalformedProgram);
}

TEST(Conic, DualActivityNeedsOptimal) {
    const auto p = make(vec({1.0}), mat(2, 1, {-1.0, 1.0}), vec({-1.0, 0.0}), {{ConeKind::NonNeg, 2}});
    const auto sol = solve(p);
    EXPECT_THROW(dual_activity(sol, p, {{0, 1}}), NotOptimal);
}

TEST(Conic, RandomSocpsMatchFirstOrderOracle) {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> nvars(5, 30);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = trial < 10 ? 10 : nvars(rng);
        const ConeProgram p = testing::random_socp(rng, n, 3, trial % 3 == 0);
        const ConeSolution sol = solve(p);
        ASSERT_EQ(sol.status, ConeStatus::Optimal) << "trial " << trial;
        EXPECT_LT(sol.gap, 1e-6);
        const auto ref = testing::admm_oracle(p);
        EXPECT_NEAR(sol.primal_objective, ref.objective, 1e-5 * std::max(1.0, std::abs(ref.objective)))
            << "trial " << trial << " oracle iterations " << ref.iterations;
        // strong duality and cone membership of s
        EXPECT_LT(std::abs(p.c.dot(sol.z) + p.h.dot(sol.y)), 1e-6 * (1.0 + std::abs(p.c.dot(sol.z))));
        int o = 0;
        for (const auto& k : p.cones) {
            if (k.kind == ConeKind::SOC) {
                EXPECT_GE(sol.s(o) - sol.s.segment(o + 1, k.dim - 1).norm(), -1e-7);
            } else if (k.kind == ConeKind::NonNeg) {
                EXPECT_GE(sol.s.segment(o, k.dim).minCoeff(), -1e-7);
            }
            o += k.dim;
        }
    }
}

TEST(Conic, Deterministic) {
    std::mt19937_64 rng(5);
    const ConeProgram p = testing::random_socp(rng, 12, 3, true);
    const auto a = solve(p);
    const auto b = solve(p);
    EXPECT_EQ(a.iters, b.iters);
    EXPECT_TRUE(a.z == b.z);
    EXPECT_TRUE(a.y == b.y);
}

TEST(ConicIo, TextAndBinaryRoundTrip) {
    std::mt19937_64 rng(6);
    const ConeProgram p = testing::random_socp(rng, 8, 2, true);
    std::stringstream text;
    write_text(text, p);
    const ConeProgram q = read_text(text);
    EXPECT_EQ(q.cones, p.cones);
    EXPECT_TRUE(q.c == p.c);
    EXPECT_TRUE(q.h == p.h);
    EXPECT_TRUE(Eigen::MatrixXd(q.G) == Eigen::MatrixXd(p.G));

    std::stringstream bin;
    write_binary(bin, p);
    const ConeProgram r = read_binary(bin);
    EXPECT_EQ(r.cones, p.cones);
    EXPECT_TRUE(r.c == p.c);
    EXPECT_TRUE(r.h == p.h);
    EXPECT_TRUE(Eigen::MatrixXd(r.G) == Eigen::MatrixXd(p.G));

    std::stringstream bad("CONEPROGRAM 1\n1 1 1\ncones 1\nX 1\n");
    EXPECT_THROW(read_text(bad), FormatError);
    std::stringstream badbin("NOPE");
    EXPECT_THROW(read_binary(badbin), FormatError);
}

}  // namespace
}  // namespace tscvx
