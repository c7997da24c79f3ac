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

#ifndef TSCVX_CONIC_HPP
#define TSCVX_CONIC_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace tscvx {

enum class ConeKind { Zero, NonNeg, SOC };

struct Cone {
    ConeKind kind;
    int dim;
    bool operator==(const Cone&) const = default;
};

/// minimize c'z  subject to  G z + s = h,  s in K_1 x ... x K_q.
/// A second-order cone block of dimension d holds s_0 >= ||s_{1:d-1}||.
struct ConeProgram {
    Eigen::VectorXd c;
    Eigen::SparseMatrix<double> G;
    Eigen::VectorXd h;
    std::vector<Cone> cones;
    std::vector<std::string> var_names;
    std::vector<std::string> row_names;

    [[nodiscard]] int n_vars() const { return static_cast<int>(c.size()); }
    [[nodiscard]] int n_rows() const { return static_cast<int>(h.size()); }

    /// Throws MalformedProgram on inconsistent dimensions, non-finite data or
    /// an all-zero row in a zero or nonnegative cone.
    void validate() const;
};

enum class ConeStatus { Optimal, PrimalInfeasible, DualInfeasible, MaxIter };

std::string to_string(ConeStatus status);

/// y is the dual of every row of G, signed so that c + G'y = 0 at optimum.
/// For infeasible statuses z (unbounded ray) or y (Farkas vector) hold the
/// normalized certificate.
struct ConeSolution {
    Eigen::VectorXd z;
    Eigen::VectorXd y;
    Eigen::VectorXd s;
    ConeStatus status = ConeStatus::MaxIter;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double gap = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iters = 0;
};

struct SolverSettings {
    double tol = 1e-7;
    /// Gap relative to the objective magnitude.
    double reltol = 1e-8;
    /// Accepted as optimal when progress stalls or maxit is hit.
    double tol_inaccurate = 1e-5;
    int maxit = 1000;
    double regularization = 1e-8;
    int refinement_steps = 8;
    int equilibration_passes = 10;
    double step_fraction = 0.99;
};

/// Homogeneous self-dual interior-point method with Nesterov-Todd scaling and
/// Mehrotra predictor-corrector steps.
/// Throws MalformedProgram, IllConditioned, NumericalError.
ConeSolution solve(const ConeProgram& prog, const SolverSettings& settings);
ConeSolution solve(const ConeProgram& prog, double tol = 1e-7, int maxit = 1000);

struct RowRange {
    int begin;
    int end;  // exclusive
};

/// A range is active when its dual magnitude reaches `dual_threshold` or its
/// slack (distance of s to the cone boundary) is at most `slack_tol`.
/// Throws NotOptimal unless the solution is Optimal.
std::vector<bool> dual_activity(const ConeSolution& sol, const ConeProgram& prog,
                                const std::vector<RowRange>& ranges, double dual_threshold = 1e-5,
                                double slack_tol = 1e-4);

// Sparse text form:
//   CONEPROGRAM 1
//   <n_vars> <n_rows> <nnz>
//   cones <count>
//   Z|L|Q <dim>            (one per line)
//   c                      (n_vars values)
//   h                      (n_rows values)
//   G                      (nnz lines "row col value", 0-based)
void write_text(std::ostream& os, const ConeProgram& prog);
ConeProgram read_text(std::istream& is);

// Little-endian binary form: "CPRB", u32 version, u32 n_vars, u32 n_rows,
// u32 nnz, u32 n_cones, cones as (u8 kind, u32 dim), f64 c, f64 h, then nnz
// triplets (u32 row, u32 col, f64 value).
void write_binary(std::ostream& os, const ConeProgram& prog);
ConeProgram read_binary(std::istream& is);

}  // namespace tscvx

#endif  // TSCVX_CONIC_HPP
