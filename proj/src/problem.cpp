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

#include "tscvx/problem.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tscvx/errors.hpp"
#include "tscvx/quaternion.hpp"
#include "tscvx/trajectory.hpp"

namespace tscvx {

using nlohmann::json;

StateVector VehicleState::to_vector() const {
    StateVector x;
    x(sx::m) = m;
    x.segment<3>(sx::r) = r_I;
    x.segment<3>(sx::v) = v_I;
    x.segment<4>(sx::q) = q_BI;
    x.segment<3>(sx::w) = w_B;
    return x;
}

VehicleState VehicleState::from_vector(const StateVector& x) {
    VehicleState s;
    s.m = x(sx::m);
    s.r_I = x.segment<3>(sx::r);
    s.v_I = x.segment<3>(sx::v);
    s.q_BI = x.segment<4>(sx::q);
    s.w_B = x.segment<3>(sx::w);
    return s;
}

void ProblemConstants::validate() const {
    if (!(rho0 >= 0.0 && rho0 < rho1 && rho1 < rho2 && rho2 < 1.0)) {
        throw std::invalid_argument("trust-region ratios must satisfy 0 <= rho0 < rho1 < rho2 < 1");
    }
    if (!(T_min > 0.0 && T_min < T_max)) {
        throw std::invalid_argument("thrust bounds must satisfy 0 < T_min < T_max");
    }
    if (!(eta_lb < eta_full_init && eta_full_init <= eta_ub && eta_lb < eta_reduced_init &&
          eta_reduced_init <= eta_ub)) {
        throw std::invalid_argument("trust-region radii must satisfy eta_lb < eta_init <= eta_ub");
    }
    if (N < 2) throw std::invalid_argument("N must be at least 2");
    if (!(beta_sh > 1.0 && beta_gr > 1.0)) {
        throw std::invalid_argument("trust-region shrink/growth factors must exceed 1");
    }
    if (!(I_sp > 0.0 && m_dry > 0.0 && sigma_min > 0.0 && sigma_min < t_f_max)) {
        throw std::invalid_argument("I_sp, m_dry and the sigma range must be positive");
    }
    if ((J_B_diag.array() <= 0.0).any()) throw std::invalid_argument("J_B must be positive");
}

void ProblemInstance::validate() const {
    constants.validate();
    if (!(gamma_gs > 0.0 && gamma_gs <= deg2rad(90.0))) {
        throw std::invalid_argument("gamma_gs must lie in (0, 90] deg");
    }
    if (!(theta_max > 0.0 && theta_max < deg2rad(360.0))) {
        throw std::invalid_argument("theta_max must lie in (0, 360) deg");
    }
    if (!(x0.m > constants.m_dry)) throw std::invalid_argument("m_0 must exceed m_dry");
}

ProblemInstance ProblemInstance::nominal() {
    ProblemInstance inst;
    inst.gamma_gs = deg2rad(20.0);
    inst.theta_max = deg2rad(90.0);
    inst.x0.r_I = Eigen::Vector3d(4.0, 2.0, 1.0);
    inst.x0.v_I = Eigen::Vector3d(-1.0, -0.5, 0.2);
    inst.x0.q_BI = quat::identity();
    inst.x0.w_B = Eigen::Vector3d::Zero();
    inst.x0.m = 2.5;
    return inst;
}

std::string_view to_string(ConstraintKind kind) {
    switch (kind) {
        case ConstraintKind::MassLb: return "mass-lb";
        case ConstraintKind::Glideslope: return "glideslope";
        case ConstraintKind::Tilt: return "tilt";
        case ConstraintKind::OmegaMax: return "omega-max";
        case ConstraintKind::ThrustLb: return "thrust-lb";
        case ConstraintKind::ThrustUb: return "thrust-ub";
        case ConstraintKind::Gimbal: return "gimbal";
    }
    return "unknown";
}

ConstraintKind constraint_kind_from_string(std::string_view name) {
    for (int k = 0; k < kRowsPerNode; ++k) {
        const auto kind = static_cast<ConstraintKind>(k);
        if (to_string(kind) == name) return kind;
    }
    throw FormatError("unknown constraint kind '" + std::string(name) + "'");
}

ConstraintCatalog::ConstraintCatalog(int n_nodes) : n_nodes_(n_nodes) {
    if (n_nodes < 1) throw std::invalid_argument("catalog needs at least one node");
    rows_.reserve(static_cast<std::size_t>(n_nodes) * kRowsPerNode);
    for (int i = 0; i < n_nodes; ++i) {
        for (int k = 0; k < kRowsPerNode; ++k) {
            const auto kind = static_cast<ConstraintKind>(k);
            rows_.push_back({kind, i, is_convex(kind)});
        }
    }
}

std::string ConstraintCatalog::serialize() const {
    std::ostringstream os;
    os << "catalog " << n_nodes_ << ' ' << rows_.size() << '\n';
    for (const auto& r : rows_) {
        os << to_string(r.kind) << ' ' << r.node << ' ' << (r.convex ? "convex" : "nonconvex")
           << '\n';
    }
    return os.str();
}

ConstraintCatalog ConstraintCatalog::deserialize(const std::string& text) {
    std::istringstream is(text);
    std::string tag;
    int n_nodes = 0;
    std::size_t n_rows = 0;
    if (!(is >> tag >> n_nodes >> n_rows) || tag != "catalog") {
        throw FormatError("catalog header missing");
    }
    ConstraintCatalog cat;
    cat.n_nodes_ = n_nodes;
    cat.rows_.reserve(n_rows);
    for (std::size_t i = 0; i < n_rows; ++i) {
        std::string kind, convexity;
        int node = 0;
        if (!(is >> kind >> node >> convexity)) throw FormatError("truncated catalog");
        cat.rows_.push_back({constraint_kind_from_string(kind), node, convexity == "convex"});
    }
    return cat;
}

std::string ConstraintCatalog::hash() const {
    std::uint64_t h = 1469598103934665603ULL;
    for (const char ch : serialize()) {
        h ^= static_cast<unsigned char>(ch);
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double cost(const Trajectory& traj) {
    if (traj.n_nodes() < 2) throw std::invalid_argument("trajectory needs at least two nodes");
    return -traj.X(sx::m, traj.n_nodes() - 1);
}

NodeResiduals evaluate_constraints(const StateVector& x, const ControlVector& u,
                                   const ProblemInstance& inst) {
    const auto& c = inst.constants;
    NodeResiduals g{};
    const Eigen::Vector3d r = x.segment<3>(sx::r);
    const Eigen::Vector4d q = x.segment<4>(sx::q);
    const Eigen::Vector3d w = x.segment<3>(sx::w);
    const double thrust = u.norm();

    g[static_cast<int>(ConstraintKind::MassLb)] = c.m_dry - x(sx::m);
    g[static_cast<int>(ConstraintKind::Glideslope)] =
        std::tan(inst.gamma_gs) * r.tail<2>().norm() - r(0);
    g[static_cast<int>(ConstraintKind::Tilt)] =
        std::cos(inst.theta_max) - 1.0 + 2.0 * q.tail<2>().squaredNorm();
    g[static_cast<int>(ConstraintKind::OmegaMax)] = w.norm() - c.w_max;
    g[static_cast<int>(ConstraintKind::ThrustLb)] = c.T_min - thrust;
    g[static_cast<int>(ConstraintKind::ThrustUb)] = thrust - c.T_max;
    g[static_cast<int>(ConstraintKind::Gimbal)] = std::cos(c.delta_max) * thrust - u(0);
    return g;
}

NodeResiduals evaluate_constraints(const VehicleState& state, const ControlInput& ctrl,
                                   const ProblemInstance& inst) {
    return evaluate_constraints(state.to_vector(), ctrl.T_B, inst);
}

std::vector<BoundaryRow> boundary_conditions(const ProblemInstance& inst) {
    const int last = inst.constants.N - 1;
    std::vector<BoundaryRow> rows;
    rows.reserve(23);
    rows.push_back({0, sx::m, inst.x0.m});
    for (int k = 0; k < 3; ++k) rows.push_back({0, sx::r + k, inst.x0.r_I(k)});
    for (int k = 0; k < 3; ++k) rows.push_back({0, sx::v + k, inst.x0.v_I(k)});
    for (int k = 0; k < 3; ++k) rows.push_back({0, sx::w + k, inst.x0.w_B(k)});
    for (int k = 0; k < 3; ++k) rows.push_back({last, sx::r + k, inst.xf.r_I(k)});
    for (int k = 0; k < 3; ++k) rows.push_back({last, sx::v + k, inst.xf.v_I(k)});
    for (int k = 0; k < 4; ++k) rows.push_back({last, sx::q + k, inst.xf.q_BI(k)});
    for (int k = 0; k < 3; ++k) rows.push_back({last, sx::w + k, inst.xf.w_B(k)});
    return rows;
}

namespace {

json vec(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

template <int Rows>
Eigen::Matrix<double, Rows, 1> read_vec(const json& j, const char* key) {
    const auto values = j.at(key).get<std::vector<double>>();
    if (values.size() != Rows) {
        throw FormatError(std::string("field '") + key + "' expects " + std::to_string(Rows) +
                          " components");
    }
    return Eigen::Map<const Eigen::Matrix<double, Rows, 1>>(values.data());
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

template <int Rows>
void read_opt_vec(const json& j, const char* key, Eigen::Matrix<double, Rows, 1>& out) {
    if (j.contains(key)) out = read_vec<Rows>(j, key);
}

void read_opt_deg(const json& j, const char* key, double& out_rad) {
    if (j.contains(key)) out_rad = deg2rad(j.at(key).get<double>());
}

}  // namespace

json to_json(const ProblemConstants& c) {
    return json{
        {"g_I", vec(c.g_I)},
        {"rho", c.rho_atm},
        {"J_B_diag", vec(c.J_B_diag)},
        {"P_amb", c.P_amb},
        {"A_noz", c.A_noz},
        {"r_cp_B", vec(c.r_cp_B)},
        {"r_T_B", vec(c.r_T_B)},
        {"rho_S_A_C_A", c.rho_SA_CA},
        {"I_sp", c.I_sp},
        {"w_max_deg", rad2deg(c.w_max)},
        {"delta_max_deg", rad2deg(c.delta_max)},
        {"T_min", c.T_min},
        {"T_max", c.T_max},
        {"V_alpha", c.V_alpha},
        {"m_dry", c.m_dry},
        {"N", c.N},
        {"N_sub", c.N_sub},
        {"iter_max", c.iter_max},
        {"lambda", c.lambda},
        {"rho0", c.rho0},
        {"rho1", c.rho1},
        {"rho2", c.rho2},
        {"beta_sh", c.beta_sh},
        {"beta_gr", c.beta_gr},
        {"eta_full_init", c.eta_full_init},
        {"eta_reduced_init", c.eta_reduced_init},
        {"eta_lb", c.eta_lb},
        {"eta_ub", c.eta_ub},
        {"eps_abs", c.eps_abs},
        {"eps_rel", c.eps_rel},
        {"feas_tol", c.feas_tol},
        {"solver_maxit", c.solver_maxit},
        {"t_f_max", c.t_f_max},
        {"sigma_min", c.sigma_min},
        {"beta_mdot", c.beta_mdot},
        {"g0", c.g0},
        {"activation_tol", c.activation_tol},
        {"rk4_substeps", c.rk4_substeps},
        {"solver_tol", c.solver_tol},
        {"solver_tol_loose", c.solver_tol_loose},
        {"max_consecutive_rejections", c.max_consecutive_rejections},
        {"keep_margin", c.keep_margin},
        {"prox_weight", c.prox_weight},
    };
}

ProblemConstants constants_from_json(const json& j, const ProblemConstants& defaults) {
    ProblemConstants c = defaults;
    read_opt_vec<3>(j, "g_I", c.g_I);
    read_opt(j, "rho", c.rho_atm);
    read_opt_vec<3>(j, "J_B_diag", c.J_B_diag);
    read_opt(j, "P_amb", c.P_amb);
    read_opt(j, "A_noz", c.A_noz);
    read_opt_vec<3>(j, "r_cp_B", c.r_cp_B);
    read_opt_vec<3>(j, "r_T_B", c.r_T_B);
    read_opt(j, "rho_S_A_C_A", c.rho_SA_CA);
    read_opt(j, "I_sp", c.I_sp);
    read_opt_deg(j, "w_max_deg", c.w_max);
    read_opt_deg(j, "delta_max_deg", c.delta_max);
    read_opt(j, "T_min", c.T_min);
    read_opt(j, "T_max", c.T_max);
    read_opt(j, "V_alpha", c.V_alpha);
    read_opt(j, "m_dry", c.m_dry);
    read_opt(j, "N", c.N);
    read_opt(j, "N_sub", c.N_sub);
    read_opt(j, "iter_max", c.iter_max);
    read_opt(j, "lambda", c.lambda);
    read_opt(j, "rho0", c.rho0);
    read_opt(j, "rho1", c.rho1);
    read_opt(j, "rho2", c.rho2);
    read_opt(j, "beta_sh", c.beta_sh);
    read_opt(j, "beta_gr", c.beta_gr);
    read_opt(j, "eta_full_init", c.eta_full_init);
    read_opt(j, "eta_reduced_init", c.eta_reduced_init);
    read_opt(j, "eta_lb", c.eta_lb);
    read_opt(j, "eta_ub", c.eta_ub);
    read_opt(j, "eps_abs", c.eps_abs);
    read_opt(j, "eps_rel", c.eps_rel);
    read_opt(j, "feas_tol", c.feas_tol);
    read_opt(j, "solver_maxit", c.solver_maxit);
    read_opt(j, "t_f_max", c.t_f_max);
    read_opt(j, "sigma_min", c.sigma_min);
    read_opt(j, "beta_mdot", c.beta_mdot);
    read_opt(j, "g0", c.g0);
    read_opt(j, "activation_tol", c.activation_tol);
    read_opt(j, "rk4_substeps", c.rk4_substeps);
    read_opt(j, "solver_tol", c.solver_tol);
    read_opt(j, "solver_tol_loose", c.solver_tol_loose);
    read_opt(j, "max_consecutive_rejections", c.max_consecutive_rejections);
    read_opt(j, "keep_margin", c.keep_margin);
    read_opt(j, "prox_weight", c.prox_weight);
    return c;
}

json to_json(const ProblemInstance& inst) {
    return json{
        {"gamma_gs_deg", rad2deg(inst.gamma_gs)},
        {"theta_max_deg", rad2deg(inst.theta_max)},
        {"initial",
         {{"r_I", vec(inst.x0.r_I)},
          {"v_I", vec(inst.x0.v_I)},
          {"q_BI", vec(inst.x0.q_BI)},
          {"w_B_deg", vec(inst.x0.w_B * rad2deg(1.0))},
          {"m", inst.x0.m}}},
        {"terminal",
         {{"r_I", vec(inst.xf.r_I)},
          {"v_I", vec(inst.xf.v_I)},
          {"q_BI", vec(inst.xf.q_BI)},
          {"w_B_deg", vec(inst.xf.w_B * rad2deg(1.0))}}},
        {"constants", to_json(inst.constants)},
    };
}

ProblemInstance instance_from_json(const json& j, const ProblemConstants& defaults) {
    ProblemInstance inst;
    inst.constants =
        j.contains("constants") ? constants_from_json(j.at("constants"), defaults) : defaults;
    inst.gamma_gs = deg2rad(j.at("gamma_gs_deg").get<double>());
    inst.theta_max = deg2rad(j.at("theta_max_deg").get<double>());
    const json& init = j.at("initial");
    inst.x0.r_I = read_vec<3>(init, "r_I");
    inst.x0.v_I = read_vec<3>(init, "v_I");
    inst.x0.q_BI = init.contains("q_BI") ? read_vec<4>(init, "q_BI") : Eigen::Vector4d(1, 0, 0, 0);
    inst.x0.q_BI.normalize();
    inst.x0.w_B = init.contains("w_B_deg") ? Eigen::Vector3d(read_vec<3>(init, "w_B_deg") * deg2rad(1.0))
                                           : Eigen::Vector3d::Zero();
    inst.x0.m = init.at("m").get<double>();
    if (j.contains("terminal")) {
        const json& term = j.at("terminal");
        read_opt_vec<3>(term, "r_I", inst.xf.r_I);
        read_opt_vec<3>(term, "v_I", inst.xf.v_I);
        read_opt_vec<4>(term, "q_BI", inst.xf.q_BI);
        if (term.contains("w_B_deg")) inst.xf.w_B = read_vec<3>(term, "w_B_deg") * deg2rad(1.0);
    }
    return inst;
}

ProblemInstance load_instance(const std::string& path, const ProblemConstants& defaults) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open instance file '" + path + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
    try {
        return instance_from_json(j, defaults);
    } catch (const json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
}

void save_instance(const std::string& path, const ProblemInstance& inst) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write instance file '" + path + "'");
    out << to_json(inst).dump(2) << '\n';
}

}  // namespace tscvx
