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

#include <gtest/gtest.h>

#include "tscvx/errors.hpp"
#include "tscvx/warmstart.hpp"

namespace tscvx {
namespace {

Sample labeled(int id, const Eigen::VectorXd& params, double fill) {
    Sample s;
    s.id = id;
    s.base_id = id;
    s.converged = true;
    s.params = params;
    s.solution = Eigen::VectorXd::Constant(solution_width(50), fill);
    TightSet t;
    t.iteration = 1;
    t.bits.assign(ConstraintCatalog(50).width(), 0);
    t.bits[id % 350] = 1;
    s.tight_sets.push_back(t);
    return s;
}

Dataset cloud(int n) {
    Dataset ds;
    std::mt19937_64 rng(4);
    for (int i = 0; i < n; ++i) ds.samples.push_back(labeled(i, sample_params(rng, SampleRanges::desk()), i));
    return ds;
}

class ScvxOnce : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        inst_ = new ProblemInstance(ProblemInstance::nominal());
        cold_ = new ScvxReport(scvx(*inst_));
    }
    static void TearDownTestSuite() {
        delete cold_;
        delete inst_;
    }
    static Sample oracle_sample() {
        Sample s;
        s.params = param_vector(*inst_);
        s.converged = true;
        s.solution = encode_solution(cold_->solution);
        s.tight_sets = cold_->accepted_tight_sets();
        return s;
    }
    static ProblemInstance* inst_;
    static ScvxReport* cold_;
};
ProblemInstance* ScvxOnce::inst_ = nullptr;
ScvxReport* ScvxOnce::cold_ = nullptr;

class Throwing : public Predictor {
public:
    explicit Throwing(bool shape) : shape_(shape) {}
    [[nodiscard]] std::string_view name() const override { return "throwing"; }
    [[nodiscard]] Eigen::VectorXd predict_solution(const Eigen::VectorXd&) const override {
        if (shape_) return Eigen::VectorXd::Zero(12);
        throw PredictorFailure("no prediction");
    }
    [[nodiscard]] TightSet predict_tight(const Eigen::VectorXd&, int) const override { return {}; }

private:
    bool shape_;
};

TEST(NnPredictor, ZeroWeights) {
    const NnPredictor p(TransformerWeights::zeros(17, 350, 8, 2, 1, 16), TransformerWeights::zeros(16, 851, 8, 2, 1, 16),
                        50);
    const Eigen::VectorXd params = param_vector(ProblemInstance::nominal());
    const TightSet t = p.predict_tight(params, 3);
    EXPECT_EQ(t.count(), 0);
    EXPECT_EQ(t.bits.size(), 350u);
    const Eigen::VectorXd z = p.predict_solution(params);
    EXPECT_EQ(z.size(), 851);
    EXPECT_EQ(z.cwiseAbs().maxCoeff(), 0.0);
    const ProblemInstance inst = ProblemInstance::nominal();
    EXPECT_EQ(warm_trajectory(z, inst, false).sigma, inst.constants.sigma_min);
    EXPECT_THROW(p.predict_solution(Eigen::VectorXd::Zero(5)), ShapeMismatch);
}

TEST(NnPredictor, WidthsCheckedAgainstCatalog) {
    EXPECT_THROW(NnPredictor(TransformerWeights::zeros(17, 349, 8, 2, 1, 16),
                             TransformerWeights::zeros(16, 851, 8, 2, 1, 16), 50),
                 ShapeMismatch);
    EXPECT_THROW(NnPredictor(TransformerWeights::zeros(17, 350, 8, 2, 1, 16),
                             TransformerWeights::zeros(17, 851, 8, 2, 1, 16), 50),
                 ShapeMismatch);
}

TEST(KdTreePredictor, SelfRecallAndTies) {
    Dataset ds = cloud(40);
    ds.samples.push_back(labeled(40, ds.samples[7].params, -1.0));
    const KdTreePredictor p(ds);
    for (int i : {0, 13, 39}) {
        EXPECT_EQ(p.predict_solution(ds.samples[i].params)(0), i);
        EXPECT_EQ(p.predict_tight(ds.samples[i].params, 1).bits[i], 1);
    }
    EXPECT_EQ(p.predict_solution(ds.samples[7].params)(0), 7.0);
    EXPECT_THROW(KdTreePredictor(Dataset{}), EmptyDataset);
}

TEST(InterpPredictor, ExactHitAndMidpoint) {
    const Dataset ds = cloud(30);
    const InterpPredictor p(ds);
    EXPECT_EQ(p.predict_solution(ds.samples[5].params)(0), 5.0);
    EXPECT_EQ(p.predict_tight(ds.samples[5].params, 1), ds.samples[5].tight_sets[0]);

    Dataset two;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(kParamDim), b = a;
    a(0) = 1.0;
    b(0) = 3.0;
    b(1) = 2.0;
    two.samples = {labeled(0, a, 10.0), labeled(1, b, 20.0)};
    const InterpPredictor q(two, 10, 11);
    const Eigen::VectorXd mid = q.predict_solution((a + b) / 2.0);
    EXPECT_NEAR(mid(0), 15.0, 1e-12);
    EXPECT_NEAR(mid(850), 15.0, 1e-12);
    EXPECT_EQ(q.predict_tight((a + b) / 2.0, 1).count(), 2);
}

TEST_F(ScvxOnce, PinningKeepsAConvergedSolution) {
    const Trajectory w = warm_trajectory(encode_solution(cold_->solution), *inst_, true);
    EXPECT_LT((w.X - cold_->solution.X).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_EQ(w.sigma, cold_->solution.sigma);
}

TEST_F(ScvxOnce, OracleWarmStartNoSlowerThanCold) {
    ASSERT_EQ(cold_->status, ScvxStatus::Converged);
    const OraclePredictor oracle(oracle_sample());
    const auto warm = warm_scvx(*inst_, oracle);
    EXPECT_FALSE(warm.fell_back);
    ASSERT_EQ(warm.report.status, ScvxStatus::Converged);
    EXPECT_LE(warm.report.iterations(), cold_->iterations());
    const Feasibility f = feasibility(warm.report.solution, *inst_);
    EXPECT_LE(f.max_defect, inst_->constants.feas_tol);
    EXPECT_LE(f.max_violation, inst_->constants.feas_tol);
    EXPECT_EQ(warm.report.iterates.front().radius, inst_->constants.eta_reduced_init);
    EXPECT_LT(warm.report.iterates.front().included_rows, ConstraintCatalog(inst_->constants.N).width());
}

TEST_F(ScvxOnce, PredictorFailureFallsBackToCold) {
    for (bool shape : {false, true}) {
        const auto r = warm_scvx(*inst_, Throwing(shape));
        EXPECT_TRUE(r.fell_back);
        EXPECT_FALSE(r.fallback_reason.empty());
        EXPECT_EQ(r.report.iterations(), cold_->iterations());
        EXPECT_EQ(r.report.status, cold_->status);
    }
}

}  // namespace
}  // namespace tscvx
