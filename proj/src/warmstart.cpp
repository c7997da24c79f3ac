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

#include "tscvx/warmstart.hpp"

#include <chrono>
#include <numeric>

#include "tscvx/errors.hpp"
#include "tscvx/quaternion.hpp"

namespace tscvx {

namespace {

std::vector<Sample> training_rows(const Dataset& ds) {
    auto rows = ds.select(Split::Train);
    if (rows.empty()) rows = ds.select(Split::None);
    if (rows.empty()) throw EmptyDataset("no converged training samples");
    std::vector<Sample> out;
    out.reserve(rows.size());
    for (const auto* s : rows) out.push_back(*s);
    return out;
}

Eigen::MatrixXd params_of(const std::vector<Sample>& rows) {
    Eigen::MatrixXd X(rows.size(), kParamDim);
    for (std::size_t i = 0; i < rows.size(); ++i) X.row(i) = rows[i].params.transpose();
    return X;
}

Standardization training_stats(const Dataset& ds, const std::vector<Sample>& rows) {
    return ds.stats.empty() ? Standardization::fit(params_of(rows)) : ds.stats;
}

Eigen::MatrixXd standardized(const Standardization& s, const Eigen::MatrixXd& X) {
    return (X.rowwise() - s.mean.transpose()).array().rowwise() / s.std.transpose().array();
}

std::vector<int> ids_of(const std::vector<Sample>& rows) {
    std::vector<int> ids;
    ids.reserve(rows.size());
    for (const auto& s : rows) ids.push_back(s.id);
    return ids;
}

void check_params(const Eigen::VectorXd& p) {
    if (p.size() != kParamDim) {
        throw ShapeMismatch("parameter vector of width " + std::to_string(p.size()) + ", expected " +
                            std::to_string(kParamDim));
    }
}

}  // namespace

KdTreePredictor::KdTreePredictor(const Dataset& ds) : rows_(training_rows(ds)), stats_(training_stats(ds, rows_)) {
    tree_ = std::make_unique<KdTree>(standardized(stats_, params_of(rows_)), ids_of(rows_));
}

Eigen::VectorXd KdTreePredictor::predict_solution(const Eigen::VectorXd& params) const {
    check_params(params);
    return rows_[tree_->nearest(stats_.apply(params)).index].solution;
}

TightSet KdTreePredictor::predict_tight(const Eigen::VectorXd& params, int k) const {
    check_params(params);
    return rows_[tree_->nearest(stats_.apply(params)).index].tight_at(k);
}

InterpPredictor::InterpPredictor(const Dataset& ds, int components, int k)
    : rows_(training_rows(ds)), stats_(training_stats(ds, rows_)), k_(k) {
    if (k < 1) throw std::invalid_argument("interpolation needs at least one neighbor");
    const Eigen::MatrixXd Z = standardized(stats_, params_of(rows_));
    pca_ = std::make_unique<Pca>(Z, components);
    tree_ = std::make_unique<KdTree>(pca_->transform_rows(Z), ids_of(rows_));
}

std::vector<std::pair<const Sample*, double>> InterpPredictor::neighbors(const Eigen::VectorXd& params) const {
    check_params(params);
    const auto nb = tree_->knn(pca_->transform(stats_.apply(params)), k_);
    const auto w = idw_weights(nb);
    std::vector<std::pair<const Sample*, double>> out;
    for (std::size_t i = 0; i < nb.size(); ++i) out.emplace_back(&rows_[nb[i].index], w[i]);
    return out;
}

Eigen::VectorXd InterpPredictor::predict_solution(const Eigen::VectorXd& params) const {
    const auto nb = neighbors(params);
    Eigen::VectorXd z = Eigen::VectorXd::Zero(nb.front().first->solution.size());
    for (const auto& [s, w] : nb) z += w * s->solution;
    return z;
}

TightSet InterpPredictor::predict_tight(const Eigen::VectorXd& params, int k) const {
    const auto nb = neighbors(params);
    const std::size_t width = nb.front().first->tight_at(k).bits.size();
    std::vector<double> vote(width, 0.0);
    for (const auto& [s, w] : nb) {
        const auto& bits = s->tight_at(k).bits;
        for (std::size_t j = 0; j < width; ++j) vote[j] += w * bits[j];
    }
    TightSet t;
    t.iteration = k;
    t.bits.resize(width);
    for (std::size_t j = 0; j < width; ++j) t.bits[j] = vote[j] >= 0.5 ? 1 : 0;
    return t;
}

NnPredictor::NnPredictor(TransformerWeights tight, TransformerWeights solution, int n_nodes)
    : tight_(std::move(tight)), solution_(std::move(solution)) {
    tight_.validate();
    solution_.validate();
    const int width = ConstraintCatalog(n_nodes).width();
    if (tight_.input_width != kParamDim + 1 || tight_.output_width != width) {
        throw ShapeMismatch("constraint network maps " + std::to_string(tight_.input_width) + " -> " +
                            std::to_string(tight_.output_width) + ", expected " + std::to_string(kParamDim + 1) +
                            " -> " + std::to_string(width));
    }
    if (solution_.input_width != kParamDim || solution_.output_width != solution_width(n_nodes)) {
        throw ShapeMismatch("solution network maps " + std::to_string(solution_.input_width) + " -> " +
                            std::to_string(solution_.output_width) + ", expected " + std::to_string(kParamDim) +
                            " -> " + std::to_string(solution_width(n_nodes)));
    }
}

Eigen::VectorXd NnPredictor::predict_solution(const Eigen::VectorXd& params) const {
    check_params(params);
    return forward(solution_, params);
}

TightSet NnPredictor::predict_tight(const Eigen::VectorXd& params, int k) const {
    check_params(params);
    const Eigen::VectorXd logits = forward(tight_, constraint_input(params, k));
    TightSet t;
    t.iteration = k;
    t.bits.resize(logits.size());
    for (Eigen::Index j = 0; j < logits.size(); ++j) {
        if (!std::isfinite(logits(j))) throw PredictorFailure("non-finite constraint logit");
        t.bits[j] = logits(j) > 0.0 ? 1 : 0;
    }
    return t;
}

Trajectory warm_trajectory(const Eigen::VectorXd& z, const ProblemInstance& inst, bool pin_boundaries) {
    if (!z.allFinite()) throw PredictorFailure("non-finite predicted solution");
    Trajectory t = decode_solution(z, inst);
    if (!pin_boundaries) return t;
    const int n = t.n_nodes();
    StateVector d0 = inst.x0.to_vector() - t.X.col(0);
    d0.segment<4>(sx::q).setZero();
    StateVector df = StateVector::Zero();
    df.segment<3>(sx::r) = inst.xf.r_I - t.X.col(n - 1).segment<3>(sx::r);
    df.segment<3>(sx::v) = inst.xf.v_I - t.X.col(n - 1).segment<3>(sx::v);
    df.segment<4>(sx::q) = inst.xf.q_BI - t.X.col(n - 1).segment<4>(sx::q);
    df.segment<3>(sx::w) = inst.xf.w_B - t.X.col(n - 1).segment<3>(sx::w);
    for (int i = 0; i < n; ++i) {
        const double a = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
        t.X.col(i) += (1.0 - a) * d0 + a * df;
    }
    t.normalize_quaternions();
    const auto& c = inst.constants;
    for (int i = 0; i < n; ++i) t.X(sx::m, i) = std::clamp(t.X(sx::m, i), c.m_dry, inst.x0.m);
    return t;
}

WarmStartReport warm_scvx(const ProblemInstance& inst, const Predictor& predictor, const WarmStartConfig& cfg) {
    const auto& c = inst.constants;
    const Eigen::VectorXd params = param_vector(inst);
    WarmStartReport out;
    const auto t0 = std::chrono::steady_clock::now();
    Trajectory init;
    std::optional<TightSet> first;
    try {
        init = warm_trajectory(predictor.predict_solution(params), inst, cfg.pin_boundaries);
        if (cfg.use_tight_sets) {
            first = predictor.predict_tight(params, 1);
            if (static_cast<int>(first->bits.size()) != ConstraintCatalog(c.N).width()) {
                throw ShapeMismatch("predicted tight set of width " + std::to_string(first->bits.size()));
            }
        }
    } catch (const PredictorFailure& e) {
        out.fell_back = true;
        out.fallback_reason = e.what();
    } catch (const ShapeMismatch& e) {
        out.fell_back = true;
        out.fallback_reason = e.what();
    }
    out.predict_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (out.fell_back) {
        out.report = scvx(inst);
        return out;
    }

    ScvxOptions opts;
    opts.modulated_trust_region = cfg.modulated_trust_region;
    opts.trace = cfg.trace;
    if (cfg.use_tight_sets) {
        opts.tight_provider = [&, first](int k) -> std::optional<TightSet> {
            if (k == 1) return first;
            return predictor.predict_tight(params, k);
        };
    }
    const double radius = cfg.initial_radius > 0.0 ? cfg.initial_radius : c.eta_reduced_init;
    try {
        out.report = scvx(inst, init, PenaltyConfig::uniform(c.lambda), TrustRegion::from_constants(c, radius), opts);
    } catch (const PredictorFailure& e) {
        out.fell_back = true;
        out.fallback_reason = e.what();
        out.report = scvx(inst);
    }
    return out;
}

}  // namespace tscvx
