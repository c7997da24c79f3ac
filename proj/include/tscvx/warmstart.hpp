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

#ifndef TSCVX_WARMSTART_HPP
#define TSCVX_WARMSTART_HPP

#include <functional>
#include <memory>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "tscvx/dataset.hpp"
#include "tscvx/neighbors.hpp"
#include "tscvx/nn.hpp"
#include "tscvx/scvx.hpp"

namespace tscvx {

/// Maps the raw parameter vector to a solution vector (17 N + 1) and the
/// tight set of succession k.
class Predictor {
public:
    virtual ~Predictor() = default;
    [[nodiscard]] virtual std::string_view name() const = 0;
    [[nodiscard]] virtual Eigen::VectorXd predict_solution(const Eigen::VectorXd& params) const = 0;
    [[nodiscard]] virtual TightSet predict_tight(const Eigen::VectorXd& params, int k) const = 0;
};

/// Nearest converged training sample in standardized parameter space. The
/// training samples are copied.
class KdTreePredictor : public Predictor {
public:
    /// Uses the train split, or every converged sample when none is tagged.
    explicit KdTreePredictor(const Dataset& ds);
    [[nodiscard]] std::string_view name() const override { return "kdtree"; }
    [[nodiscard]] Eigen::VectorXd predict_solution(const Eigen::VectorXd& params) const override;
    [[nodiscard]] TightSet predict_tight(const Eigen::VectorXd& params, int k) const override;

private:
    std::vector<Sample> rows_;
    Standardization stats_;
    std::unique_ptr<KdTree> tree_;
};

/// Inverse-distance interpolation over the k nearest neighbors in the
/// leading principal components of the standardized parameters. Tight bits
/// are the weighted vote thresholded at 1/2.
class InterpPredictor : public Predictor {
public:
    explicit InterpPredictor(const Dataset& ds, int components = 10, int k = 11);
    [[nodiscard]] std::string_view name() const override { return "interp"; }
    [[nodiscard]] Eigen::VectorXd predict_solution(const Eigen::VectorXd& params) const override;
    [[nodiscard]] TightSet predict_tight(const Eigen::VectorXd& params, int k) const override;

private:
    [[nodiscard]] std::vector<std::pair<const Sample*, double>> neighbors(const Eigen::VectorXd& params) const;

    std::vector<Sample> rows_;
    Standardization stats_;
    std::unique_ptr<Pca> pca_;
    std::unique_ptr<KdTree> tree_;
    int k_;
};

/// Two transformer networks: tight bits from (params, k), one logit per
/// catalog row; the solution vector from params.
class NnPredictor : public Predictor {
public:
    /// Throws ShapeMismatch when the widths disagree with the catalog.
    NnPredictor(TransformerWeights tight, TransformerWeights solution, int n_nodes);
    [[nodiscard]] std::string_view name() const override { return "weights"; }
    [[nodiscard]] Eigen::VectorXd predict_solution(const Eigen::VectorXd& params) const override;
    [[nodiscard]] TightSet predict_tight(const Eigen::VectorXd& params, int k) const override;

private:
    TransformerWeights tight_, solution_;
};

/// Replays a stored sample.
class OraclePredictor : public Predictor {
public:
    explicit OraclePredictor(Sample s) : s_(std::move(s)) {}
    [[nodiscard]] std::string_view name() const override { return "oracle"; }
    [[nodiscard]] Eigen::VectorXd predict_solution(const Eigen::VectorXd&) const override { return s_.solution; }
    [[nodiscard]] TightSet predict_tight(const Eigen::VectorXd&, int k) const override { return s_.tight_at(k); }

private:
    Sample s_;
};

struct WarmStartConfig {
    /// Shift the predicted states so the first node matches x0 (attitude
    /// excepted, it is free) and the last the terminal condition, blended
    /// linearly in between.
    bool pin_boundaries = true;
    bool use_tight_sets = true;
    bool modulated_trust_region = true;
    /// Initial trust radius; nonpositive selects eta_reduced_init.
    double initial_radius = 0.0;
    std::function<void(int k, const ConeProgram&)> trace;
};

struct WarmStartReport {
    ScvxReport report;
    bool fell_back = false;
    std::string fallback_reason;
    double predict_seconds = 0.0;
};

/// Initial guess from a predicted solution vector.
Trajectory warm_trajectory(const Eigen::VectorXd& z, const ProblemInstance& inst, bool pin_boundaries);

/// Predictor-seeded SCvx. PredictorFailure or ShapeMismatch from the
/// predictor, or a non-finite prediction, fall back to a cold start.
WarmStartReport warm_scvx(const ProblemInstance& inst, const Predictor& predictor, const WarmStartConfig& cfg = {});

}  // namespace tscvx

#endif  // TSCVX_WARMSTART_HPP
