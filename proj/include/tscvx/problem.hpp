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

#ifndef TSCVX_PROBLEM_HPP
#define TSCVX_PROBLEM_HPP

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace tscvx {

inline constexpr int kStateDim = 14;
inline constexpr int kControlDim = 3;

using StateVector = Eigen::Matrix<double, kStateDim, 1>;
using ControlVector = Eigen::Vector3d;

/// Offsets of the state vector x = [m; r_I; v_I; q_BI; w_B].
namespace sx {
inline constexpr int m = 0;
inline constexpr int r = 1;
inline constexpr int v = 4;
inline constexpr int q = 7;
inline constexpr int w = 11;
}  // namespace sx

inline double deg2rad(double deg) { return deg * 0.017453292519943295; }
inline double rad2deg(double rad) { return rad * 57.29577951308232; }

struct VehicleState {
    Eigen::Vector3d r_I = Eigen::Vector3d::Zero();
    Eigen::Vector3d v_I = Eigen::Vector3d::Zero();
    Eigen::Vector4d q_BI = Eigen::Vector4d(1.0, 0.0, 0.0, 0.0);
    Eigen::Vector3d w_B = Eigen::Vector3d::Zero();  // rad / U_T
    double m = 1.0;

    [[nodiscard]] StateVector to_vector() const;
    static VehicleState from_vector(const StateVector& x);
};

struct ControlInput {
    Eigen::Vector3d T_B = Eigen::Vector3d::Zero();
};

/// Fixed vehicle, environment and algorithm constants. Angles in radians.
/// Defaults reproduce the nondimensional Mars landing setup.
struct ProblemConstants {
    Eigen::Vector3d g_I{-1.0, 0.0, 0.0};
    double rho_atm = 0.020;
    Eigen::Vector3d J_B_diag{0.001, 0.01, 0.01};
    double P_amb = 0.1;
    double A_noz = 0.5;
    Eigen::Vector3d r_cp_B = Eigen::Vector3d::Zero();
    Eigen::Vector3d r_T_B{-0.01, 0.0, 0.0};
    double rho_SA_CA = 0.2;
    double I_sp = 30.0;
    double w_max = deg2rad(90.0);
    double delta_max = deg2rad(20.0);
    double T_min = 0.3;
    double T_max = 5.0;
    double V_alpha = 2.0;  // carried for I/O only; no constraint uses it
    double m_dry = 2.0;

    int N = 50;
    int N_sub = 49;
    int iter_max = 20;
    double lambda = 500.0;
    double rho0 = 0.0;
    double rho1 = 0.1;
    double rho2 = 0.7;
    double beta_sh = 2.0;
    double beta_gr = 2.0;
    double eta_full_init = 2.0;
    double eta_reduced_init = 0.01;
    double eta_lb = 0.001;
    double eta_ub = 10.0;
    double eps_abs = 0.1;
    double eps_rel = 0.001;
    double feas_tol = 0.5;
    int solver_maxit = 1000;

    // Configuration values without a published counterpart.
    double t_f_max = 10.0;
    double sigma_min = 0.1;
    double beta_mdot = 0.0;
    double g0 = 1.0;
    double activation_tol = 1e-4;
    int rk4_substeps = 15;
    double solver_tol = 1e-7;
    double solver_tol_loose = 1e-5;
    int max_consecutive_rejections = 10;
    /// Reduced subproblems also keep rows within this margin of activity at
    /// the reference.
    double keep_margin = 0.05;
    /// Cost per unit of trust-region epigraph, sum over nodes.
    double prox_weight = 1e-3;

    /// Mass depletion per unit thrust, 1 / (I_sp g0).
    [[nodiscard]] double alpha_mdot() const { return 1.0 / (I_sp * g0); }

    /// Throws std::invalid_argument on a violated invariant.
    void validate() const;
};

/// Terminal boundary values.
struct TerminalState {
    Eigen::Vector3d r_I = Eigen::Vector3d::Zero();
    Eigen::Vector3d v_I{-0.1, 0.0, 0.0};
    Eigen::Vector4d q_BI = Eigen::Vector4d(1.0, 0.0, 0.0, 0.0);
    Eigen::Vector3d w_B = Eigen::Vector3d::Zero();
};

struct ProblemInstance {
    double gamma_gs = deg2rad(20.0);
    double theta_max = deg2rad(90.0);
    VehicleState x0;
    TerminalState xf;
    ProblemConstants constants;

    void validate() const;

    /// The reference landing scenario used by examples and acceptance checks.
    static ProblemInstance nominal();
};

enum class ConstraintKind : std::uint8_t {
    MassLb = 0,
    Glideslope = 1,
    Tilt = 2,
    OmegaMax = 3,
    ThrustLb = 4,
    ThrustUb = 5,
    Gimbal = 6,
};

inline constexpr int kRowsPerNode = 7;

std::string_view to_string(ConstraintKind kind);
ConstraintKind constraint_kind_from_string(std::string_view name);

/// Whether the row's feasible set is convex in (x, u).
constexpr bool is_convex(ConstraintKind kind) { return kind != ConstraintKind::ThrustLb; }

/// Whether reduced subproblems may omit the row. Mass and the nonconvex
/// thrust floor are always kept.
constexpr bool is_reducible(ConstraintKind kind) {
    return kind != ConstraintKind::MassLb && kind != ConstraintKind::ThrustLb;
}

struct ConstraintRow {
    ConstraintKind kind;
    int node;  // 0-based node index
    bool convex;
    bool operator==(const ConstraintRow&) const = default;
};

/// Ordered inequality rows over all nodes, node-major: row = node * 7 + kind.
class ConstraintCatalog {
public:
    explicit ConstraintCatalog(int n_nodes);

    [[nodiscard]] int n_nodes() const { return n_nodes_; }
    [[nodiscard]] int width() const { return static_cast<int>(rows_.size()); }
    [[nodiscard]] const std::vector<ConstraintRow>& rows() const { return rows_; }
    [[nodiscard]] const ConstraintRow& row(int index) const { return rows_.at(index); }

    static constexpr int index(int node, ConstraintKind kind) {
        return node * kRowsPerNode + static_cast<int>(kind);
    }

    [[nodiscard]] std::string serialize() const;
    static ConstraintCatalog deserialize(const std::string& text);
    /// FNV-1a 64 of the serialized form, hex encoded.
    [[nodiscard]] std::string hash() const;

    bool operator==(const ConstraintCatalog&) const = default;

private:
    ConstraintCatalog() = default;
    int n_nodes_ = 0;
    std::vector<ConstraintRow> rows_;
};

struct Trajectory;

/// Minimization form of the landing objective: -m(t_f).
double cost(const Trajectory& traj);

using NodeResiduals = std::array<double, kRowsPerNode>;

/// Per-node residuals g <= 0, ordered by ConstraintKind.
NodeResiduals evaluate_constraints(const VehicleState& state, const ControlInput& ctrl,
                                   const ProblemInstance& inst);
NodeResiduals evaluate_constraints(const StateVector& x, const ControlVector& u,
                                   const ProblemInstance& inst);

struct BoundaryRow {
    int node;         // 0 or N-1
    int state_index;  // offset in the state vector
    double value;
};

/// Initial rows fix m, r, v, w (q free); terminal rows fix r, v, q, w.
std::vector<BoundaryRow> boundary_conditions(const ProblemInstance& inst);

// JSON I/O mirroring the published parameter tables; angles in degrees.
nlohmann::json to_json(const ProblemConstants& c);
ProblemConstants constants_from_json(const nlohmann::json& j,
                                     const ProblemConstants& defaults = ProblemConstants{});
nlohmann::json to_json(const ProblemInstance& inst);
ProblemInstance instance_from_json(const nlohmann::json& j,
                                   const ProblemConstants& defaults = ProblemConstants{});

ProblemInstance load_instance(const std::string& path,
                              const ProblemConstants& defaults = ProblemConstants{});
void save_instance(const std::string& path, const ProblemInstance& inst);

}  // namespace tscvx

#endif  // TSCVX_PROBLEM_HPP
