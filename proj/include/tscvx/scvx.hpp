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

#ifndef TSCVX_SCVX_HPP
#define TSCVX_SCVX_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tscvx/conic.hpp"
#include "tscvx/discretization.hpp"
#include "tscvx/problem.hpp"
#include "tscvx/trajectory.hpp"

namespace tscvx {

/// Binary activity vector over the constraint catalog.
struct TightSet {
    std::vector<std::uint8_t> bits;
    int iteration = 0;

    [[nodiscard]] int count() const;
    bool operator==(const TightSet&) const = default;
};

/// Fraction of bits that differ between two equal-width sets.
double changed_fraction(const TightSet& a, const TightSet& b);

/// Weights of the exact penalty.
struct PenaltyConfig {
    double lambda_defect = 500.0;
    double lambda_nonconvex = 500.0;
    double tau_convex = 500.0;

    static PenaltyConfig uniform(double lambda);
    void validate() const;
};

struct TrustRegion {
    double radius = 2.0;
    double alpha = 2.0;  // contraction
    double beta = 2.0;   // growth
    double r_l = 0.001;
    double r_u = 10.0;
    double rho0 = 0.0;
    double rho1 = 0.1;
    double rho2 = 0.7;

    static TrustRegion from_constants(const ProblemConstants& c, double initial_radius);
};

struct TrustUpdate {
    bool accepted = false;
    double radius = 0.0;
};

/// Three-case ratio test with floor r_l and ceiling r_u.
TrustUpdate update_trust_region(const TrustRegion& tr, double rho);

/// Variant whose contraction and growth exponents are modulated by the
/// fraction tau_r of tight-set bits that changed since the previous
/// iteration: r / alpha^tau_r, r, beta^(1 - tau_r) r. A rejected step
/// contracts by the full alpha.
TrustUpdate update_trust_region(const TrustRegion& tr, double rho, double tau_r);

/// J = cost + sum lambda |defect|_1 + sum weight * max(0, g) over all
/// catalog rows.
double penalty_cost(const Trajectory& traj, const ProblemInstance& inst, const PenaltyConfig& cfg);

/// Per-row hinge violations max(0, g) in catalog order.
std::vector<double> row_violations(const Trajectory& traj, const ProblemInstance& inst);

/// Variable and row bookkeeping of one assembled subproblem.
struct SubproblemLayout {
    int n_nodes = 0;
    int x_offset = 0;
    int u_offset = 0;
    int sigma_index = 0;
    int vplus_offset = 0;
    int vminus_offset = 0;
    int buffer_offset = 0;
    int n_buffers = 0;
    int eta_offset = 0;
    /// Per catalog row: buffer variable or -1 when the row was omitted.
    std::vector<int> buffer_of_row;
    /// Per catalog row: rows of its cone in G, empty when omitted.
    std::vector<RowRange> rows_of;

    [[nodiscard]] int x(int node, int k) const { return x_offset + node * kStateDim + k; }
    [[nodiscard]] int u(int node, int k) const { return u_offset + node * kControlDim + k; }
    [[nodiscard]] bool included(int row) const { return buffer_of_row[row] >= 0; }
};

struct Subproblem {
    ConeProgram program;
    SubproblemLayout layout;
};

/// Builds the convex subproblem around `ref`. With `tight` empty every
/// catalog row is present; otherwise only rows flagged in `tight`, rows that
/// are never reduced, and rows within keep_margin of activity at the
/// reference are kept. Throws InconsistentCatalog on a width mismatch.
Subproblem assemble_subproblem(const Trajectory& ref, const std::vector<LinearizedSegment>& segments,
                               const std::optional<TightSet>& tight, double radius,
                               const ProblemInstance& inst, const PenaltyConfig& cfg);

/// Closed-form row count of a subproblem with `included_rows` catalog rows
/// of the given kinds present.
int subproblem_row_count(int n_nodes, const std::vector<ConstraintKind>& included_kinds);

Trajectory extract_trajectory(const Subproblem& sub, const ConeSolution& sol);

/// Activity of every catalog row at the subproblem optimum; omitted rows are
/// reported inactive.
TightSet tight_snapshot(const Subproblem& sub, const ConeSolution& sol, double activation_tol);

enum class ScvxStatus { Converged, MaxIter, Diverged };
std::string_view to_string(ScvxStatus s);

struct IterationRecord {
    int k = 0;
    double J = 0.0;       // penalty at the reference
    double L = 0.0;       // subproblem objective
    double J_next = 0.0;  // penalty at the candidate
    double dJ = 0.0;
    double dL = 0.0;
    double rho = 0.0;
    double radius = 0.0;  // radius the subproblem was solved with
    double tau_r = 0.0;
    bool accepted = false;
    double max_defect = 0.0;
    int solver_iters = 0;
    int included_rows = 0;
    TightSet tight;
};

struct ScvxReport {
    ScvxStatus status = ScvxStatus::MaxIter;
    Trajectory solution;
    std::vector<IterationRecord> iterates;
    int binding_count = 0;
    double solve_seconds = 0.0;

    [[nodiscard]] int iterations() const { return static_cast<int>(iterates.size()); }
    /// Tight sets of accepted iterations, in order.
    [[nodiscard]] std::vector<TightSet> accepted_tight_sets() const;
};

nlohmann::json to_json(const ScvxReport& report);

struct ScvxOptions {
    /// Returns the predicted tight set for succession k (1-based) or nullopt
    /// for the full problem.
    std::function<std::optional<TightSet>(int k)> tight_provider;
    /// Use the tau_r-modulated trust-region rule.
    bool modulated_trust_region = false;
    /// Called with every assembled program before it is solved.
    std::function<void(int k, const ConeProgram&)> trace;
};

/// Successive convexification from `init`. Throws SubproblemFailure when a
/// subproblem cannot be solved.
ScvxReport scvx(const ProblemInstance& inst, const Trajectory& init, const PenaltyConfig& cfg,
                TrustRegion tr, const ScvxOptions& opts = {});

/// Cold start from the straight-line guess with eta_full_init.
ScvxReport scvx(const ProblemInstance& inst);

struct BindingDiagnostic {
    int count = 0;
    bool superlinear = false;
};

/// Boundary rows plus catalog rows within the activation tolerance at the
/// converged point; the flag compares against n_u (N - 1). Throws
/// NotConverged.
BindingDiagnostic binding_diagnostic(const ScvxReport& report, const ProblemInstance& inst);

/// Largest catalog residual and defect of a trajectory.
struct Feasibility {
    double max_defect = 0.0;
    double max_violation = 0.0;
};
Feasibility feasibility(const Trajectory& traj, const ProblemInstance& inst);

}  // namespace tscvx

#endif  // TSCVX_SCVX_HPP
