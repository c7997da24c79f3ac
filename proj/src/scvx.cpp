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

#include "tscvx/scvx.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <utility>

#include "tscvx/errors.hpp"

namespace tscvx {

int TightSet::count() const {
    int n = 0;
    for (auto b : bits) n += b != 0;
    return n;
}

double changed_fraction(const TightSet& a, const TightSet& b) {
    if (a.bits.size() != b.bits.size()) {
        throw InconsistentCatalog("tight sets of width " + std::to_string(a.bits.size()) + " and " +
                                  std::to_string(b.bits.size()) + " cannot be compared");
    }
    if (a.bits.empty()) return 0.0;
    int changed = 0;
    for (std::size_t i = 0; i < a.bits.size(); ++i) changed += (a.bits[i] != 0) != (b.bits[i] != 0);
    return static_cast<double>(changed) / static_cast<double>(a.bits.size());
}

PenaltyConfig PenaltyConfig::uniform(double lambda) { return {lambda, lambda, lambda}; }

void PenaltyConfig::validate() const {
    if (!(lambda_defect > 0.0 && lambda_nonconvex >= 0.0 && tau_convex >= 0.0)) {
        throw std::invalid_argument("penalty weights must be nonnegative and the defect weight positive");
    }
}

TrustRegion TrustRegion::from_constants(const ProblemConstants& c, double initial_radius) {
    TrustRegion tr;
    tr.radius = std::clamp(initial_radius, c.eta_lb, c.eta_ub);
    tr.alpha = c.beta_sh;
    tr.beta = c.beta_gr;
    tr.r_l = c.eta_lb;
    tr.r_u = c.eta_ub;
    tr.rho0 = c.rho0;
    tr.rho1 = c.rho1;
    tr.rho2 = c.rho2;
    return tr;
}

namespace {

TrustUpdate three_case(const TrustRegion& tr, double rho, double shrink, double grow) {
    TrustUpdate out;
    if (rho < tr.rho0) {
        out.accepted = false;
        out.radius = tr.radius / shrink;
    } else if (rho < tr.rho1) {
        out.accepted = true;
        out.radius = tr.radius / shrink;
    } else if (rho < tr.rho2) {
        out.accepted = true;
        out.radius = tr.radius;
    } else {
        out.accepted = true;
        out.radius = tr.radius * grow;
    }
    out.radius = std::clamp(out.radius, tr.r_l, tr.r_u);
    return out;
}

}  // namespace

TrustUpdate update_trust_region(const TrustRegion& tr, double rho) {
    return three_case(tr, rho, tr.alpha, tr.beta);
}

TrustUpdate update_trust_region(const TrustRegion& tr, double rho, double tau_r) {
    if (!(tau_r >= 0.0 && tau_r <= 1.0)) throw std::invalid_argument("tau_r must lie in [0, 1]");
    if (rho < tr.rho0) return three_case(tr, rho, tr.alpha, tr.beta);
    return three_case(tr, rho, std::pow(tr.alpha, tau_r), std::pow(tr.beta, 1.0 - tau_r));
}

std::vector<double> row_violations(const Trajectory& traj, const ProblemInstance& inst) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(traj.n_nodes()) * kRowsPerNode);
    for (int i = 0; i < traj.n_nodes(); ++i) {
        const NodeResiduals g = evaluate_constraints(traj.x(i), traj.u(i), inst);
        for (double v : g) out.push_back(std::max(0.0, v));
    }
    return out;
}

double penalty_cost(const Trajectory& traj, const ProblemInstance& inst, const PenaltyConfig& cfg) {
    double J = cost(traj);
    for (double d : defect(traj, inst.constants)) J += cfg.lambda_defect * d;
    const auto viol = row_violations(traj, inst);
    for (std::size_t j = 0; j < viol.size(); ++j) {
        const auto kind = static_cast<ConstraintKind>(j % kRowsPerNode);
        J += (is_convex(kind) ? cfg.tau_convex : cfg.lambda_nonconvex) * viol[j];
    }
    return J;
}

Feasibility feasibility(const Trajectory& traj, const ProblemInstance& inst) {
    Feasibility f;
    for (double d : defect(traj, inst.constants)) f.max_defect = std::max(f.max_defect, d);
    for (double v : row_violations(traj, inst)) f.max_violation = std::max(f.max_violation, v);
    return f;
}

namespace {

/// a'z + b
struct Expr {
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;

    Expr& add(int var, double coef) {
        if (coef != 0.0) terms.emplace_back(var, coef);
        return *this;
    }
};

class ProgramBuilder {
public:
    void zero(Expr e) { zero_.push_back(std::move(e)); }

    /// Returns the local index inside the nonnegative block.
    int nonneg(Expr e) {
        nonneg_.push_back(std::move(e));
        return static_cast<int>(nonneg_.size()) - 1;
    }

    /// Returns the SOC block index.
    int soc(std::vector<Expr> block) {
        soc_.push_back(std::move(block));
        return static_cast<int>(soc_.size()) - 1;
    }

    [[nodiscard]] int zero_rows() const { return static_cast<int>(zero_.size()); }
    [[nodiscard]] int nonneg_rows() const { return static_cast<int>(nonneg_.size()); }

    /// Global first row of SOC block k once built.
    [[nodiscard]] int soc_begin(int k) const { return soc_offsets_.at(k); }
    [[nodiscard]] int soc_dim(int k) const { return static_cast<int>(soc_[k].size()); }

    ConeProgram build(Eigen::VectorXd c) {
        ConeProgram p;
        p.c = std::move(c);
        int rows = zero_rows() + nonneg_rows();
        soc_offsets_.clear();
        for (const auto& b : soc_) {
            soc_offsets_.push_back(rows);
            rows += static_cast<int>(b.size());
        }
        std::vector<Eigen::Triplet<double>> t;
        p.h.resize(rows);
        int r = 0;
        auto emit = [&](const Expr& e) {
            for (const auto& [var, coef] : e.terms) t.emplace_back(r, var, -coef);
            p.h(r) = e.constant;
            ++r;
        };
        for (const auto& e : zero_) emit(e);
        for (const auto& e : nonneg_) emit(e);
        for (const auto& b : soc_) {
            for (const auto& e : b) emit(e);
        }
        p.G.resize(rows, p.c.size());
        p.G.setFromTriplets(t.begin(), t.end());
        p.G.makeCompressed();
        if (zero_rows() > 0) p.cones.push_back({ConeKind::Zero, zero_rows()});
        if (nonneg_rows() > 0) p.cones.push_back({ConeKind::NonNeg, nonneg_rows()});
        for (const auto& b : soc_) p.cones.push_back({ConeKind::SOC, static_cast<int>(b.size())});
        return p;
    }

private:
    std::vector<Expr> zero_;
    std::vector<Expr> nonneg_;
    std::vector<std::vector<Expr>> soc_;
    std::vector<int> soc_offsets_;
};

int row_dim(ConstraintKind kind) {
    switch (kind) {
        case ConstraintKind::MassLb:
        case ConstraintKind::ThrustLb: return 1;
        case ConstraintKind::Glideslope: return 3;
        case ConstraintKind::Tilt:
        case ConstraintKind::OmegaMax:
        case ConstraintKind::ThrustUb:
        case ConstraintKind::Gimbal: return 4;
    }
    return 0;
}

constexpr int kBoundaryRows = 23;

}  // namespace

int subproblem_row_count(int n_nodes, const std::vector<ConstraintKind>& included_kinds) {
    const int segs = n_nodes - 1;
    int rows = kStateDim * segs + kBoundaryRows  // dynamics, boundary
               + 2 * kStateDim * segs            // virtual control split
               + 4                               // sigma bounds and trust region
               + (kStateDim + kControlDim + 2) * n_nodes;  // radius bound and cone per node
    for (auto k : included_kinds) rows += row_dim(k) + 1;  // cone rows and buffer sign
    return rows;
}

Subproblem assemble_subproblem(const Trajectory& ref, const std::vector<LinearizedSegment>& segments,
                               const std::optional<TightSet>& tight, double radius,
                               const ProblemInstance& inst, const PenaltyConfig& cfg) {
    const auto& c = inst.constants;
    const int n = ref.n_nodes();
    const ConstraintCatalog catalog(n);
    if (static_cast<int>(segments.size()) != n - 1) {
        throw InconsistentCatalog("expected " + std::to_string(n - 1) + " segments, got " +
                                  std::to_string(segments.size()));
    }
    if (tight && static_cast<int>(tight->bits.size()) != catalog.width()) {
        throw InconsistentCatalog("tight set width " + std::to_string(tight->bits.size()) +
                                  " does not match catalog width " + std::to_string(catalog.width()));
    }

    Subproblem sub;
    auto& L = sub.layout;
    L.n_nodes = n;
    L.x_offset = 0;
    L.u_offset = kStateDim * n;
    L.sigma_index = L.u_offset + kControlDim * n;
    L.vplus_offset = L.sigma_index + 1;
    L.vminus_offset = L.vplus_offset + kStateDim * (n - 1);
    L.buffer_offset = L.vminus_offset + kStateDim * (n - 1);
    L.buffer_of_row.assign(catalog.width(), -1);
    L.rows_of.assign(catalog.width(), RowRange{0, 0});

    // Row selection.
    for (int i = 0; i < n; ++i) {
        const NodeResiduals g = evaluate_constraints(ref.x(i), ref.u(i), inst);
        for (int k = 0; k < kRowsPerNode; ++k) {
            const int row = ConstraintCatalog::index(i, static_cast<ConstraintKind>(k));
            const bool keep = !tight || tight->bits[row] != 0 ||
                              !is_reducible(static_cast<ConstraintKind>(k)) || g[k] >= -c.keep_margin;
            if (keep) L.buffer_of_row[row] = L.buffer_offset + L.n_buffers++;
        }
    }
    L.eta_offset = L.buffer_offset + L.n_buffers;
    const int n_vars = L.eta_offset + n;

    Eigen::VectorXd cost_vec = Eigen::VectorXd::Zero(n_vars);
    cost_vec(L.x(n - 1, sx::m)) = -1.0;
    for (int j = L.vplus_offset; j < L.buffer_offset; ++j) cost_vec(j) = cfg.lambda_defect;

    ProgramBuilder pb;

    // Linearized dynamics with virtual control v = v+ - v-.
    for (int i = 0; i + 1 < n; ++i) {
        const auto& s = segments[i];
        for (int r = 0; r < kStateDim; ++r) {
            Expr e;
            e.add(L.x(i + 1, r), 1.0);
            for (int k = 0; k < kStateDim; ++k) e.add(L.x(i, k), -s.A_d(r, k));
            for (int k = 0; k < kControlDim; ++k) {
                e.add(L.u(i, k), -s.B_minus(r, k));
                e.add(L.u(i + 1, k), -s.B_plus(r, k));
            }
            e.add(L.sigma_index, -s.S_d(r));
            e.add(L.vplus_offset + i * kStateDim + r, -1.0);
            e.add(L.vminus_offset + i * kStateDim + r, 1.0);
            e.constant = -s.w_d(r);
            pb.zero(std::move(e));
        }
    }
    for (const auto& b : boundary_conditions(inst)) {
        Expr e;
        e.add(L.x(b.node, b.state_index), 1.0);
        e.constant = -b.value;
        pb.zero(std::move(e));
    }

    for (int j = L.vplus_offset; j < L.buffer_offset; ++j) pb.nonneg(Expr{}.add(j, 1.0));

    // sigma bounds and trust region.
    pb.nonneg(Expr{{{L.sigma_index, 1.0}}, -c.sigma_min});
    pb.nonneg(Expr{{{L.sigma_index, -1.0}}, c.t_f_max});
    pb.nonneg(Expr{{{L.sigma_index, -1.0}}, radius + ref.sigma});
    pb.nonneg(Expr{{{L.sigma_index, 1.0}}, radius - ref.sigma});

    // Catalog rows, each relaxed by a penalized buffer b >= 0.
    std::vector<std::pair<int, int>> soc_of_row;  // (catalog row, soc block)
    const double tan_gs = std::tan(inst.gamma_gs);
    const double cos_th = std::cos(inst.theta_max);
    const double cos_dm = std::cos(c.delta_max);
    for (int i = 0; i < n; ++i) {
        const ControlVector ubar = ref.u(i);
        const double un = ubar.norm();
        const Eigen::Vector3d dir = un > 1e-9 ? Eigen::Vector3d(ubar / un) : Eigen::Vector3d::UnitX();
        for (int k = 0; k < kRowsPerNode; ++k) {
            const auto kind = static_cast<ConstraintKind>(k);
            const int row = ConstraintCatalog::index(i, kind);
            const int b = L.buffer_of_row[row];
            if (b < 0) continue;
            cost_vec(b) = is_convex(kind) ? cfg.tau_convex : cfg.lambda_nonconvex;
            pb.nonneg(Expr{}.add(b, 1.0));
            switch (kind) {
                case ConstraintKind::MassLb: {
                    const int local = pb.nonneg(Expr{{{L.x(i, sx::m), 1.0}, {b, 1.0}}, -c.m_dry});
                    L.rows_of[row] = {local, local + 1};
                    break;
                }
                case ConstraintKind::ThrustLb: {
                    Expr e;
                    for (int a = 0; a < 3; ++a) e.add(L.u(i, a), dir(a));
                    e.add(b, 1.0);
                    e.constant = -c.T_min;
                    const int local = pb.nonneg(std::move(e));
                    L.rows_of[row] = {local, local + 1};
                    break;
                }
                case ConstraintKind::Glideslope: {
                    std::vector<Expr> blk(3);
                    blk[0].add(L.x(i, sx::r), 1.0).add(b, 1.0);
                    blk[1].add(L.x(i, sx::r + 1), tan_gs);
                    blk[2].add(L.x(i, sx::r + 2), tan_gs);
                    soc_of_row.emplace_back(row, pb.soc(std::move(blk)));
                    break;
                }
                case ConstraintKind::Tilt: {
                    // 2 (q2^2 + q3^2) <= 1 - cos(theta_max) + b, as ||y||^2 <= t with
                    // t = (1 - cos + b) / 2, written ||(2y, t - 1)|| <= t + 1.
                    const double t0 = 0.5 * (1.0 - cos_th);
                    std::vector<Expr> blk(4);
                    blk[0].add(b, 0.5).constant = t0 + 1.0;
                    blk[1].add(L.x(i, sx::q + 2), 2.0);
                    blk[2].add(L.x(i, sx::q + 3), 2.0);
                    blk[3].add(b, 0.5).constant = t0 - 1.0;
                    soc_of_row.emplace_back(row, pb.soc(std::move(blk)));
                    break;
                }
                case ConstraintKind::OmegaMax: {
                    std::vector<Expr> blk(4);
                    blk[0].add(b, 1.0).constant = c.w_max;
                    for (int a = 0; a < 3; ++a) blk[a + 1].add(L.x(i, sx::w + a), 1.0);
                    soc_of_row.emplace_back(row, pb.soc(std::move(blk)));
                    break;
                }
                case ConstraintKind::ThrustUb: {
                    std::vector<Expr> blk(4);
                    blk[0].add(b, 1.0).constant = c.T_max;
                    for (int a = 0; a < 3; ++a) blk[a + 1].add(L.u(i, a), 1.0);
                    soc_of_row.emplace_back(row, pb.soc(std::move(blk)));
                    break;
                }
                case ConstraintKind::Gimbal: {
                    std::vector<Expr> blk(4);
                    blk[0].add(L.u(i, 0), 1.0).add(b, 1.0);
                    for (int a = 0; a < 3; ++a) blk[a + 1].add(L.u(i, a), cos_dm);
                    soc_of_row.emplace_back(row, pb.soc(std::move(blk)));
                    break;
                }
            }
        }
    }

    // Per-node trust region ||(x_i - xbar_i, u_i - ubar_i)|| <= r.
    for (int i = 0; i < n; ++i) {
        std::vector<Expr> blk(1 + kStateDim + kControlDim);
        blk[0].add(L.eta_offset + i, 1.0);
        pb.nonneg(Expr{{{L.eta_offset + i, -1.0}}, radius});
        cost_vec(L.eta_offset + i) = c.prox_weight;
        for (int k = 0; k < kStateDim; ++k) {
            blk[1 + k].add(L.x(i, k), 1.0).constant = -ref.X(k, i);
        }
        for (int k = 0; k < kControlDim; ++k) {
            blk[1 + kStateDim + k].add(L.u(i, k), 1.0).constant = -ref.U(k, i);
        }
        pb.soc(std::move(blk));
    }

    sub.program = pb.build(std::move(cost_vec));
    const int nonneg_begin = pb.zero_rows();
    for (int row = 0; row < catalog.width(); ++row) {
        if (L.buffer_of_row[row] < 0) continue;
        const auto kind = catalog.row(row).kind;
        if (kind == ConstraintKind::MassLb || kind == ConstraintKind::ThrustLb) {
            L.rows_of[row].begin += nonneg_begin;
            L.rows_of[row].end += nonneg_begin;
        }
    }
    for (const auto& [row, blk] : soc_of_row) {
        L.rows_of[row] = {pb.soc_begin(blk), pb.soc_begin(blk) + pb.soc_dim(blk)};
    }
    return sub;
}

Trajectory extract_trajectory(const Subproblem& sub, const ConeSolution& sol) {
    const auto& L = sub.layout;
    Trajectory t(L.n_nodes);
    for (int i = 0; i < L.n_nodes; ++i) {
        t.X.col(i) = sol.z.segment<kStateDim>(L.x(i, 0));
        t.U.col(i) = sol.z.segment<kControlDim>(L.u(i, 0));
    }
    t.sigma = sol.z(L.sigma_index);
    return t;
}

TightSet tight_snapshot(const Subproblem& sub, const ConeSolution& sol, double activation_tol) {
    const auto& L = sub.layout;
    std::vector<RowRange> ranges;
    std::vector<int> which;
    for (int row = 0; row < static_cast<int>(L.buffer_of_row.size()); ++row) {
        if (!L.included(row)) continue;
        ranges.push_back(L.rows_of[row]);
        which.push_back(row);
    }
    const auto act = dual_activity(sol, sub.program, ranges, 1e-5, activation_tol);
    TightSet t;
    t.bits.assign(L.buffer_of_row.size(), 0);
    for (std::size_t j = 0; j < which.size(); ++j) t.bits[which[j]] = act[j] ? 1 : 0;
    return t;
}

std::string_view to_string(ScvxStatus s) {
    switch (s) {
        case ScvxStatus::Converged: return "converged";
        case ScvxStatus::MaxIter: return "max-iter";
        case ScvxStatus::Diverged: return "diverged";
    }
    return "unknown";
}

std::vector<TightSet> ScvxReport::accepted_tight_sets() const {
    std::vector<TightSet> out;
    for (const auto& it : iterates) {
        if (it.accepted) out.push_back(it.tight);
    }
    return out;
}

nlohmann::json to_json(const ScvxReport& report) {
    nlohmann::json iters = nlohmann::json::array();
    for (const auto& it : report.iterates) {
        std::vector<int> active;
        for (std::size_t j = 0; j < it.tight.bits.size(); ++j) {
            if (it.tight.bits[j]) active.push_back(static_cast<int>(j));
        }
        iters.push_back({{"k", it.k},
                         {"J", it.J},
                         {"L", it.L},
                         {"J_next", it.J_next},
                         {"dJ", it.dJ},
                         {"dL", it.dL},
                         {"rho", it.rho},
                         {"radius", it.radius},
                         {"tau_r", it.tau_r},
                         {"accepted", it.accepted},
                         {"max_defect", it.max_defect},
                         {"solver_iters", it.solver_iters},
                         {"included_rows", it.included_rows},
                         {"tight_rows", active}});
    }
    return {{"status", std::string(to_string(report.status))},
            {"iterations", iters},
            {"binding_count", report.binding_count},
            {"solve_seconds", report.solve_seconds},
            {"solution", to_json(report.solution)}};
}

ScvxReport scvx(const ProblemInstance& inst, const Trajectory& init, const PenaltyConfig& cfg,
                TrustRegion tr, const ScvxOptions& opts) {
    const auto start = std::chrono::steady_clock::now();
    const auto& c = inst.constants;
    inst.validate();
    cfg.validate();
    if (init.n_nodes() != c.N) {
        throw std::invalid_argument("initial trajectory has " + std::to_string(init.n_nodes()) +
                                    " nodes, expected " + std::to_string(c.N));
    }

    ScvxReport report;
    Trajectory ref = init;
    double J_ref = penalty_cost(ref, inst, cfg);
    std::optional<TightSet> prev_prediction;
    int accepted = 0;
    int rejections = 0;
    report.status = ScvxStatus::MaxIter;

    for (int k = 1; k <= c.iter_max; ++k) {
        std::optional<TightSet> prediction;
        if (opts.tight_provider) prediction = opts.tight_provider(accepted + 1);
        double tau_r = 0.0;
        if (prediction && prev_prediction) tau_r = changed_fraction(*prediction, *prev_prediction);

        Subproblem sub;
        ConeSolution sol;
        try {
            const auto segments = discretize(ref, c);
            sub = assemble_subproblem(ref, segments, prediction, tr.radius, inst, cfg);
            if (opts.trace) opts.trace(k, sub.program);
            SolverSettings settings;
            settings.tol = c.solver_tol;
            settings.reltol = c.solver_tol;
            settings.maxit = c.solver_maxit;
            settings.tol_inaccurate = c.solver_tol_loose;
            sol = solve(sub.program, settings);
        } catch (const SubproblemFailure&) {
            throw;
        } catch (const Error& e) {
            throw SubproblemFailure("iteration " + std::to_string(k) + ": " + e.what());
        }
        if (sol.status != ConeStatus::Optimal) {
            throw SubproblemFailure("iteration " + std::to_string(k) + ": subproblem status " +
                                    to_string(sol.status));
        }

        IterationRecord rec;
        rec.k = k;
        rec.radius = tr.radius;
        rec.tau_r = tau_r;
        rec.solver_iters = sol.iters;
        rec.included_rows = sub.layout.n_buffers;
        rec.tight = tight_snapshot(sub, sol, c.activation_tol);
        rec.tight.iteration = accepted + 1;

        Trajectory cand = extract_trajectory(sub, sol);
        rec.J = J_ref;
        rec.L = sub.program.c.dot(sol.z) -
                sub.program.c.segment(sub.layout.eta_offset, sub.layout.n_nodes).dot(
                    sol.z.segment(sub.layout.eta_offset, sub.layout.n_nodes));
        rec.J_next = penalty_cost(cand, inst, cfg);
        rec.dJ = J_ref - rec.J_next;
        rec.dL = J_ref - rec.L;
        const double eps_tol = c.eps_abs + c.eps_rel * std::abs(J_ref);
        const Feasibility cand_feas = feasibility(cand, inst);
        const bool stationary = std::abs(rec.dJ) <= eps_tol && std::abs(rec.dL) <= eps_tol &&
                                cand_feas.max_defect <= c.feas_tol && cand_feas.max_violation <= c.feas_tol;
        if (stationary) {
            rec.rho = 1.0;
        } else if (rec.dL > 1e-12) {
            rec.rho = rec.dJ / rec.dL;
        } else {
            rec.rho = rec.dJ >= -1e-12 ? 1.0 : -1.0;
        }

        TrustUpdate upd;
        if (opts.modulated_trust_region && prediction) {
            upd = update_trust_region(tr, rec.rho, tau_r);
        } else {
            upd = update_trust_region(tr, rec.rho);
        }
        rec.accepted = upd.accepted;
        tr.radius = upd.radius;

        if (rec.accepted) {
            ref = std::move(cand);
            J_ref = rec.J_next;
            ++accepted;
            rejections = 0;
            if (opts.tight_provider) prev_prediction = prediction;
        } else {
            ++rejections;
        }
        const Feasibility feas = feasibility(ref, inst);
        rec.max_defect = feas.max_defect;
        report.iterates.push_back(std::move(rec));
        const auto& last = report.iterates.back();

        if (last.accepted && std::abs(last.dJ) <= eps_tol && feas.max_defect <= c.feas_tol &&
            feas.max_violation <= c.feas_tol) {
            report.status = ScvxStatus::Converged;
            break;
        }
        if (rejections >= c.max_consecutive_rejections) {
            report.status = ScvxStatus::Diverged;
            break;
        }
    }

    ref.normalize_quaternions();
    report.solution = std::move(ref);
    if (report.status == ScvxStatus::Converged) {
        report.binding_count = binding_diagnostic(report, inst).count;
    }
    report.solve_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

ScvxReport scvx(const ProblemInstance& inst) {
    return scvx(inst, initial_guess(inst), PenaltyConfig::uniform(inst.constants.lambda),
                TrustRegion::from_constants(inst.constants, inst.constants.eta_full_init));
}

BindingDiagnostic binding_diagnostic(const ScvxReport& report, const ProblemInstance& inst) {
    if (report.status != ScvxStatus::Converged) {
        throw NotConverged(std::string("binding diagnostic needs a converged report, status is ") +
                           std::string(to_string(report.status)));
    }
    const auto& traj = report.solution;
    BindingDiagnostic d;
    d.count = static_cast<int>(boundary_conditions(inst).size());
    for (int i = 0; i < traj.n_nodes(); ++i) {
        for (double g : evaluate_constraints(traj.x(i), traj.u(i), inst)) {
            if (g >= -inst.constants.activation_tol) ++d.count;
        }
    }
    d.superlinear = d.count >= kControlDim * (traj.n_nodes() - 1);
    return d;
}

}  // namespace tscvx
