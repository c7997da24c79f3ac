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

#include "tscvx/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCholesky>

#include "tscvx/errors.hpp"

namespace tscvx {

using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

std::string to_string(ConeStatus status) {
    switch (status) {
        case ConeStatus::Optimal: return "optimal";
        case ConeStatus::PrimalInfeasible: return "primal-infeasible";
        case ConeStatus::DualInfeasible: return "dual-infeasible";
        case ConeStatus::MaxIter: return "max-iter";
    }
    return "unknown";
}

void ConeProgram::validate() const {
    const Eigen::Index m = h.size();
    if (G.rows() != m || G.cols() != c.size()) {
        throw MalformedProgram("G is " + std::to_string(G.rows()) + "x" + std::to_string(G.cols()) +
                               " but expected " + std::to_string(m) + "x" +
                               std::to_string(c.size()));
    }
    long total = 0;
    for (const auto& k : cones) {
        if (k.dim < 1) throw MalformedProgram("cone dimension must be positive");
        total += k.dim;
    }
    if (total != m) {
        throw MalformedProgram("cone dimensions sum to " + std::to_string(total) + " but G has " +
                               std::to_string(m) + " rows");
    }
    if (!c.allFinite() || !h.allFinite()) throw MalformedProgram("non-finite c or h");
    std::vector<char> nonzero(m, 0);
    for (int k = 0; k < G.outerSize(); ++k) {
        for (SpMat::InnerIterator it(G, k); it; ++it) {
            if (!std::isfinite(it.value())) throw MalformedProgram("non-finite entry in G");
            if (it.value() != 0.0) nonzero[it.row()] = 1;
        }
    }
    int row = 0;
    for (const auto& k : cones) {
        if (k.kind != ConeKind::SOC) {
            for (int i = row; i < row + k.dim; ++i) {
                if (!nonzero[i]) {
                    throw MalformedProgram("row " + std::to_string(i) + " of G is all zero");
                }
            }
        }
        row += k.dim;
    }
}

namespace {

double soc_residual(const VectorXd& u, int off, int dim) {
    const double head = u(off);
    const double tail = dim > 1 ? u.segment(off + 1, dim - 1).squaredNorm() : 0.0;
    return head * head - tail;
}

struct Block {
    ConeKind kind;
    int off;
    int dim;
    VectorXd d;     // nonnegative: W = diag(d)
    double eta = 1.0;
    VectorXd wbar;  // second-order: normalized scaling point, J(wbar) = 1
};

class ConeSet {
public:
    std::vector<Block> blocks;
    int m = 0;
    int degree = 0;

    void add(ConeKind kind, int dim) {
        if (kind == ConeKind::NonNeg) {
            for (int i = 0; i < dim; ++i) {
                blocks.push_back({kind, m + i, 1, VectorXd::Ones(1), 1.0, {}});
            }
            degree += dim;
        } else {
            Block b{kind, m, dim, {}, 1.0, VectorXd::Zero(dim)};
            b.wbar(0) = 1.0;
            blocks.push_back(b);
            degree += 1;
        }
        m += dim;
    }

    VectorXd identity() const {
        VectorXd e = VectorXd::Zero(m);
        for (const auto& b : blocks) e(b.off) = 1.0;
        return e;
    }

    void set_identity_scaling() {
        for (auto& b : blocks) {
            if (b.kind == ConeKind::NonNeg) {
                b.d.setOnes();
            } else {
                b.eta = 1.0;
                b.wbar.setZero();
                b.wbar(0) = 1.0;
            }
        }
    }

    // Nesterov-Todd scaling at (s, z); returns lambda = W z.
    bool update(const VectorXd& s, const VectorXd& z, VectorXd& lambda) {
        for (auto& b : blocks) {
            if (b.kind == ConeKind::NonNeg) {
                const double si = s(b.off), zi = z(b.off);
                if (!(si > 0.0 && zi > 0.0)) return false;
                b.d(0) = std::sqrt(si / zi);
            } else {
                const double js = soc_residual(s, b.off, b.dim);
                const double jz = soc_residual(z, b.off, b.dim);
                if (!(js > 0.0 && jz > 0.0 && s(b.off) > 0.0 && z(b.off) > 0.0)) return false;
                const VectorXd sb = s.segment(b.off, b.dim) / std::sqrt(js);
                const VectorXd zb = z.segment(b.off, b.dim) / std::sqrt(jz);
                const double gamma = std::sqrt(0.5 * (1.0 + sb.dot(zb)));
                VectorXd w = sb;
                w(0) += zb(0);
                w.tail(b.dim - 1) -= zb.tail(b.dim - 1);
                w /= 2.0 * gamma;
                b.wbar = w;
                b.eta = std::pow(js / jz, 0.25);
            }
        }
        lambda = apply_w(z);
        return true;
    }

    VectorXd apply_w(const VectorXd& v) const { return apply(v, false); }
    VectorXd apply_winv(const VectorXd& v) const { return apply(v, true); }

    // Entries of W^2 in block order; second-order blocks column-major.
    void w2_entries(std::vector<double>& out) const {
        out.clear();
        for (const auto& b : blocks) {
            if (b.kind == ConeKind::NonNeg) {
                out.push_back(b.d(0) * b.d(0));
            } else {
                const Eigen::MatrixXd W = dense_w(b);
                const Eigen::MatrixXd W2 = W * W;
                for (int j = 0; j < b.dim; ++j) {
                    for (int i = 0; i < b.dim; ++i) out.push_back(W2(i, j));
                }
            }
        }
    }

    VectorXd product(const VectorXd& u, const VectorXd& v) const {
        VectorXd w(m);
        for (const auto& b : blocks) {
            if (b.kind == ConeKind::NonNeg) {
                w(b.off) = u(b.off) * v(b.off);
            } else {
                const int o = b.off, n = b.dim;
                w(o) = u.segment(o, n).dot(v.segment(o, n));
                if (n > 1) w.segment(o + 1, n - 1) = u(o) * v.segment(o + 1, n - 1) + v(o) * u.segment(o + 1, n - 1);
            }
        }
        return w;
    }

    // Solves lambda o w = v for w.
    VectorXd division(const VectorXd& lambda, const VectorXd& v) const {
        VectorXd w(m);
        for (const auto& b : blocks) {
            if (b.kind == ConeKind::NonNeg) {
                w(b.off) = v(b.off) / lambda(b.off);
            } else {
                const int o = b.off, n = b.dim;
                const double l0 = lambda(o);
                const double rho = soc_residual(lambda, o, n);
                const double nu = n > 1 ? lambda.segment(o + 1, n - 1).dot(v.segment(o + 1, n - 1)) : 0.0;
                const double w0 = (l0 * v(o) - nu) / rho;
                w(o) = w0;
                if (n > 1) w.segment(o + 1, n - 1) = (v.segment(o + 1, n - 1) - w0 * lambda.segment(o + 1, n - 1)) / l0;
            }
        }
        return w;
    }

    // Largest alpha with lambda + alpha d in the cone (infinity if unbounded).
    double max_step(const VectorXd& lambda, const VectorXd& d) const {
        double alpha = std::numeric_limits<double>::infinity();
        for (const auto& b : blocks) {
            if (b.kind == ConeKind::NonNeg) {
                if (d(b.off) < 0.0) alpha = std::min(alpha, -lambda(b.off) / d(b.off));
            } else {
                const int o = b.off, n = b.dim;
                const double a = soc_residual(d, o, n);
                const double bb = 2.0 * (lambda(o) * d(o) -
                                         (n > 1 ? lambda.segment(o + 1, n - 1).dot(d.segment(o + 1, n - 1)) : 0.0));
                const double c = soc_residual(lambda, o, n);
                alpha = std::min(alpha, smallest_positive_root(a, bb, c));
                if (d(o) < 0.0) alpha = std::min(alpha, -lambda(o) / d(o));
            }
        }
        return alpha;
    }

    void bring_to_cone(VectorXd& r) const {
        double alpha = -std::numeric_limits<double>::infinity();
        for (const auto& b : blocks) {
            if (b.kind == ConeKind::NonNeg) {
                alpha = std::max(alpha, -r(b.off));
            } else {
                const double tail = b.dim > 1 ? r.segment(b.off + 1, b.dim - 1).norm() : 0.0;
                alpha = std::max(alpha, tail - r(b.off));
            }
        }
        if (alpha >= 0.0) {
            for (const auto& b : blocks) r(b.off) += 1.0 + alpha;
        }
    }

private:
    static double smallest_positive_root(double a, double b, double c) {
        const double inf = std::numeric_limits<double>::infinity();
        if (std::abs(a) < 1e-300) return b < 0.0 ? -c / b : inf;
        const double disc = b * b - 4.0 * a * c;
        if (disc < 0.0) return inf;
        const double sq = std::sqrt(disc);
        const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
        double best = inf;
        for (double r : {q / a, q != 0.0 ? c / q : inf}) {
            if (r > 0.0) best = std::min(best, r);
        }
        return best;
    }

    static Eigen::MatrixXd dense_w(const Block& b) {
        const int n = b.dim;
        const double w0 = b.wbar(0);
        Eigen::MatrixXd W(n, n);
        W(0, 0) = w0;
        if (n > 1) {
            const VectorXd w1 = b.wbar.tail(n - 1);
            W.block(0, 1, 1, n - 1) = w1.transpose();
            W.block(1, 0, n - 1, 1) = w1;
            W.block(1, 1, n - 1, n - 1) = Eigen::MatrixXd::Identity(n - 1, n - 1) + w1 * w1.transpose() / (1.0 + w0);
        }
        return b.eta * W;
    }

    VectorXd apply(const VectorXd& v, bool inverse) const {
        VectorXd out(m);
        for (const auto& b : blocks) {
            if (b.kind == ConeKind::NonNeg) {
                out(b.off) = inverse ? v(b.off) / b.d(0) : v(b.off) * b.d(0);
            } else {
                const int o = b.off, n = b.dim;
                const double w0 = b.wbar(0);
                const double v0 = v(o);
                if (n == 1) {
                    out(o) = (inverse ? v0 / b.eta : v0 * b.eta);
                    continue;
                }
                const auto w1 = b.wbar.tail(n - 1);
                const auto v1 = v.segment(o + 1, n - 1);
                const double wv = w1.dot(v1);
                const double sgn = inverse ? -1.0 : 1.0;
                const double scale = inverse ? 1.0 / b.eta : b.eta;
                out(o) = scale * (w0 * v0 + sgn * wv);
                out.segment(o + 1, n - 1) = scale * (v1 + (sgn * v0 + wv / (1.0 + w0)) * w1);
            }
        }
        return out;
    }
};

// Ruiz equilibration of [A; G] with cone-consistent row factors.
struct Scaling {
    VectorXd D;  // columns
    VectorXd Ea; // equality rows
    VectorXd Eg; // cone rows
};

Scaling equilibrate(SpMat& A, SpMat& G, const ConeSet& cones, int passes) {
    const int n = static_cast<int>(A.cols());
    Scaling sc{VectorXd::Ones(n), VectorXd::Ones(A.rows()), VectorXd::Ones(G.rows())};
    auto clampit = [](double v) {
        if (v < 1e-4) return 1.0;
        return std::min(v, 1e4);
    };
    for (int pass = 0; pass < passes; ++pass) {
        VectorXd col = VectorXd::Zero(n), ra = VectorXd::Zero(A.rows()), rg = VectorXd::Zero(G.rows());
        for (int k = 0; k < A.outerSize(); ++k) {
            for (SpMat::InnerIterator it(A, k); it; ++it) {
                const double v = std::abs(it.value());
                col(it.col()) = std::max(col(it.col()), v);
                ra(it.row()) = std::max(ra(it.row()), v);
            }
        }
        for (int k = 0; k < G.outerSize(); ++k) {
            for (SpMat::InnerIterator it(G, k); it; ++it) {
                const double v = std::abs(it.value());
                col(it.col()) = std::max(col(it.col()), v);
                rg(it.row()) = std::max(rg(it.row()), v);
            }
        }
        for (const auto& b : cones.blocks) {
            if (b.kind == ConeKind::SOC) {
                const double mx = rg.segment(b.off, b.dim).maxCoeff();
                rg.segment(b.off, b.dim).setConstant(mx);
            }
        }
        VectorXd dc(n), da(ra.size()), dg(rg.size());
        for (int j = 0; j < n; ++j) dc(j) = 1.0 / std::sqrt(clampit(col(j)));
        for (int i = 0; i < ra.size(); ++i) da(i) = 1.0 / std::sqrt(clampit(ra(i)));
        for (int i = 0; i < rg.size(); ++i) dg(i) = 1.0 / std::sqrt(clampit(rg(i)));
        A = da.asDiagonal() * A * dc.asDiagonal();
        G = dg.asDiagonal() * G * dc.asDiagonal();
        sc.D = sc.D.cwiseProduct(dc);
        sc.Ea = sc.Ea.cwiseProduct(da);
        sc.Eg = sc.Eg.cwiseProduct(dg);
    }
    return sc;
}

class Kkt {
public:
    Kkt(const SpMat& A, const SpMat& G, const ConeSet& cones, double delta)
        : n_(static_cast<int>(A.cols())), p_(static_cast<int>(A.rows())),
          m_(static_cast<int>(G.rows())), delta_(delta) {
        const int N = n_ + p_ + m_;
        std::vector<Triplet> t;
        t.reserve(2 * (A.nonZeros() + G.nonZeros()) + N + 64);
        for (int j = 0; j < n_; ++j) t.emplace_back(j, j, delta_);
        for (int k = 0; k < A.outerSize(); ++k) {
            for (SpMat::InnerIterator it(A, k); it; ++it) {
                t.emplace_back(n_ + it.row(), it.col(), it.value());
                t.emplace_back(it.col(), n_ + it.row(), it.value());
            }
        }
        for (int i = 0; i < p_; ++i) t.emplace_back(n_ + i, n_ + i, -delta_);
        for (int k = 0; k < G.outerSize(); ++k) {
            for (SpMat::InnerIterator it(G, k); it; ++it) {
                t.emplace_back(n_ + p_ + it.row(), it.col(), it.value());
                t.emplace_back(it.col(), n_ + p_ + it.row(), it.value());
            }
        }
        const int z0 = n_ + p_;
        for (const auto& b : cones.blocks) {
            for (int j = 0; j < b.dim; ++j) {
                for (int i = 0; i < b.dim; ++i) t.emplace_back(z0 + b.off + i, z0 + b.off + j, -1.0);
            }
        }
        K_.resize(N, N);
        K_.setFromTriplets(t.begin(), t.end());
        K_.makeCompressed();
        for (const auto& b : cones.blocks) {
            for (int j = 0; j < b.dim; ++j) {
                for (int i = 0; i < b.dim; ++i) {
                    wpos_.push_back(position(z0 + b.off + i, z0 + b.off + j));
                    wdiag_.push_back(i == j);
                }
            }
        }
        ldlt_.analyzePattern(K_);
    }

    void factor(const std::vector<double>& w2) {
        double* v = K_.valuePtr();
        for (std::size_t k = 0; k < wpos_.size(); ++k) v[wpos_[k]] = -w2[k] - (wdiag_[k] ? delta_ : 0.0);
        ldlt_.factorize(K_);
        if (ldlt_.info() != Eigen::Success) throw IllConditioned("KKT factorization failed");
    }

    VectorXd solve(const VectorXd& rhs, int refinement) const {
        VectorXd d = ldlt_.solve(rhs);
        const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
        for (int k = 0; k < refinement; ++k) {
            const VectorXd e = rhs - apply_true(d);
            if (e.lpNorm<Eigen::Infinity>() <= 1e-14 * scale) break;
            d += ldlt_.solve(e);
        }
        if (!d.allFinite()) throw NumericalError("non-finite KKT solution");
        return d;
    }

private:
    int position(int row, int col) const {
        const int* inner = K_.innerIndexPtr();
        const int begin = K_.outerIndexPtr()[col], end = K_.outerIndexPtr()[col + 1];
        const int* it = std::lower_bound(inner + begin, inner + end, row);
        return static_cast<int>(it - inner);
    }

    VectorXd apply_true(const VectorXd& d) const {
        VectorXd r = K_ * d;
        r.head(n_) -= delta_ * d.head(n_);
        r.tail(p_ + m_) += delta_ * d.tail(p_ + m_);
        return r;
    }

    int n_, p_, m_;
    double delta_;
    SpMat K_;
    std::vector<int> wpos_;
    std::vector<char> wdiag_;
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

struct Direction {
    VectorXd x, y, z, s;
    double tau = 0.0, kappa = 0.0;
};

}  // namespace

ConeSolution solve(const ConeProgram& prog, double tol, int maxit) {
    SolverSettings s;
    s.tol = tol;
    s.maxit = maxit;
    return solve(prog, s);
}

ConeSolution solve(const ConeProgram& prog, const SolverSettings& st) {
    prog.validate();
    const int n = prog.n_vars();
    const int m_total = prog.n_rows();

    // Split rows into equalities (zero cones) and cone rows.
    std::vector<int> row_eq(m_total, -1), row_cone(m_total, -1);
    ConeSet cones;
    int p = 0;
    {
        int r = 0;
        for (const auto& k : prog.cones) {
            for (int i = 0; i < k.dim; ++i) {
                if (k.kind == ConeKind::Zero) {
                    row_eq[r + i] = p++;
                } else {
                    row_cone[r + i] = cones.m + i;
                }
            }
            if (k.kind != ConeKind::Zero) cones.add(k.kind, k.dim);
            r += k.dim;
        }
    }
    const int m = cones.m;

    std::vector<Triplet> ta, tg;
    for (int k = 0; k < prog.G.outerSize(); ++k) {
        for (SpMat::InnerIterator it(prog.G, k); it; ++it) {
            if (row_eq[it.row()] >= 0) {
                ta.emplace_back(row_eq[it.row()], it.col(), it.value());
            } else {
                tg.emplace_back(row_cone[it.row()], it.col(), it.value());
            }
        }
    }
    SpMat A0(p, n), G0(m, n);
    A0.setFromTriplets(ta.begin(), ta.end());
    G0.setFromTriplets(tg.begin(), tg.end());
    VectorXd b0(p), h0(m);
    for (int r = 0; r < m_total; ++r) {
        if (row_eq[r] >= 0) b0(row_eq[r]) = prog.h(r);
        else h0(row_cone[r]) = prog.h(r);
    }
    const VectorXd& c0 = prog.c;

    SpMat A = A0, G = G0;
    const Scaling sc = equilibrate(A, G, cones, st.equilibration_passes);
    const VectorXd c = sc.D.cwiseProduct(c0);
    const VectorXd b = sc.Ea.cwiseProduct(b0);
    const VectorXd h = sc.Eg.cwiseProduct(h0);
    const SpMat At = A.transpose(), Gt = G.transpose();

    Kkt kkt(A, G, cones, st.regularization);
    std::vector<double> w2;

    auto stack = [&](const VectorXd& a, const VectorXd& bb, const VectorXd& cc) {
        VectorXd r(n + p + m);
        r << a, bb, cc;
        return r;
    };

    // Initial point from two least-squares solves with W = I.
    cones.set_identity_scaling();
    cones.w2_entries(w2);
    kkt.factor(w2);
    VectorXd x, y, z, s;
    {
        const VectorXd sol = kkt.solve(stack(VectorXd::Zero(n), b, h), st.refinement_steps);
        x = sol.head(n);
        s = -sol.tail(m);
        cones.bring_to_cone(s);
        const VectorXd dual = kkt.solve(stack(-c, VectorXd::Zero(p), VectorXd::Zero(m)), st.refinement_steps);
        y = dual.segment(n, p);
        z = dual.tail(m);
        cones.bring_to_cone(z);
    }
    double tau = 1.0, kappa = 1.0;

    const double nb = std::max({1.0, b0.norm(), h0.norm()});
    const double nc = std::max(1.0, c0.norm());
    const VectorXd e = cones.identity();

    ConeSolution out, best;
    double best_merit = std::numeric_limits<double>::infinity();
    VectorXd lambda;
    int it = 0;
    for (;; ++it) {
        // Unscaled iterate and residuals.
        const VectorXd xu = sc.D.cwiseProduct(x);
        const VectorXd yu = sc.Ea.cwiseProduct(y);
        const VectorXd zu = sc.Eg.cwiseProduct(z);
        const VectorXd su = s.cwiseQuotient(sc.Eg);
        if (!xu.allFinite() || !yu.allFinite() || !zu.allFinite() || !su.allFinite() ||
            !std::isfinite(tau) || !std::isfinite(kappa)) {
            throw NumericalError("non-finite interior-point iterate");
        }
        const double cx = c0.dot(xu), by = b0.dot(yu), hz = h0.dot(zu);
        const VectorXd dual_ray = A0.transpose() * yu + G0.transpose() * zu;
        const double pres = std::max((A0 * xu - b0 * tau).norm(), (G0 * xu + su - h0 * tau).norm()) / tau / nb;
        const double dres = (dual_ray + c0 * tau).norm() / tau / nc;
        const double pcost = cx / tau;
        const double dcost = -(by + hz) / tau;
        const double gap = su.dot(zu) / (tau * tau);
        double relgap = std::numeric_limits<double>::infinity();
        if (pcost < 0.0) relgap = gap / -pcost;
        else if (dcost > 0.0) relgap = gap / dcost;

        out.iters = it;
        out.primal_residual = pres;
        out.dual_residual = dres;
        out.gap = gap;
        out.primal_objective = pcost;
        out.dual_objective = dcost;

        auto emit_primal_dual = [&](double scale_x, double scale_y) {
            out.z = xu * scale_x;
            out.s = VectorXd::Zero(m_total);
            out.y = VectorXd::Zero(m_total);
            for (int r = 0; r < m_total; ++r) {
                if (row_eq[r] >= 0) {
                    out.y(r) = yu(row_eq[r]) * scale_y;
                } else {
                    out.y(r) = zu(row_cone[r]) * scale_y;
                    out.s(r) = su(row_cone[r]) * scale_x;
                }
            }
        };

        if (pres < st.tol && dres < st.tol && (gap < st.tol || relgap < st.reltol)) {
            out.status = ConeStatus::Optimal;
            emit_primal_dual(1.0 / tau, 1.0 / tau);
            return out;
        }
        if (by + hz < 0.0 && dual_ray.norm() / nc / -(by + hz) < st.tol) {
            out.status = ConeStatus::PrimalInfeasible;
            emit_primal_dual(0.0, 1.0 / -(by + hz));
            return out;
        }
        if (cx < 0.0 && std::max((A0 * xu).norm(), (G0 * xu + su).norm()) / nb / -cx < st.tol) {
            out.status = ConeStatus::DualInfeasible;
            emit_primal_dual(1.0 / -cx, 0.0);
            out.y.setZero();
            return out;
        }
        const double merit = std::max({pres, dres, std::min(gap, relgap)});
        if (merit < best_merit) {
            best_merit = merit;
            emit_primal_dual(1.0 / tau, 1.0 / tau);
            best = out;
        }
        auto stalled = [&]() {
            if (best_merit < st.tol_inaccurate) {
                best.status = ConeStatus::Optimal;
                best.iters = it;
                return best;
            }
            out.status = ConeStatus::MaxIter;
            emit_primal_dual(1.0 / tau, 1.0 / tau);
            return out;
        };
        if (it >= st.maxit) return stalled();

        // Scaled-space residuals.
        const VectorXd rx = -(At * y) - Gt * z - c * tau;
        const VectorXd ry = A * x - b * tau;
        const VectorXd rz = s + G * x - h * tau;
        const double rt = kappa + c.dot(x) + b.dot(y) + h.dot(z);

        if (!cones.update(s, z, lambda)) throw NumericalError("iterate left the cone interior");
        cones.w2_entries(w2);
        kkt.factor(w2);

        const VectorXd d1 = kkt.solve(stack(-c, b, h), st.refinement_steps);
        const double denom = kappa / tau - (c.dot(d1.head(n)) + b.dot(d1.segment(n, p)) + h.dot(d1.tail(m)));
        const double mu = (s.dot(z) + tau * kappa) / (cones.degree + 1);

        auto direction = [&](double fr, const VectorXd& rs, double bkap) {
            const VectorXd wdiv = cones.apply_w(cones.division(lambda, rs));
            const VectorXd d2 = kkt.solve(stack(fr * rx, -fr * ry, -fr * rz + wdiv), st.refinement_steps);
            Direction d;
            d.tau = (fr * rt - bkap / tau + c.dot(d2.head(n)) + b.dot(d2.segment(n, p)) + h.dot(d2.tail(m))) / denom;
            d.x = d2.head(n) + d.tau * d1.head(n);
            d.y = d2.segment(n, p) + d.tau * d1.segment(n, p);
            d.z = d2.tail(m) + d.tau * d1.tail(m);
            d.s = -wdiv - cones.apply_w(cones.apply_w(d.z));
            d.kappa = -(bkap + kappa * d.tau) / tau;
            return d;
        };
        auto step_to_boundary = [&](const Direction& d) {
            double a = std::min(cones.max_step(lambda, cones.apply_winv(d.s)),
                                cones.max_step(lambda, cones.apply_w(d.z)));
            if (d.tau < 0.0) a = std::min(a, -tau / d.tau);
            if (d.kappa < 0.0) a = std::min(a, -kappa / d.kappa);
            return a;
        };

        const Direction aff = direction(1.0, cones.product(lambda, lambda), tau * kappa);
        const double a_aff = std::min(1.0, step_to_boundary(aff));
        const double sigma = std::clamp(std::pow(1.0 - a_aff, 3), 1e-4, 1.0);

        const VectorXd rs = cones.product(lambda, lambda) +
                            cones.product(cones.apply_winv(aff.s), cones.apply_w(aff.z)) - sigma * mu * e;
        const double bkap = tau * kappa + aff.kappa * aff.tau - sigma * mu;
        const Direction d = direction(1.0 - sigma, rs, bkap);
        const double alpha = std::min(1.0, st.step_fraction * step_to_boundary(d));
        if (!(alpha > 1e-12)) return stalled();

        x += alpha * d.x;
        y += alpha * d.y;
        z += alpha * d.z;
        s += alpha * d.s;
        tau += alpha * d.tau;
        kappa += alpha * d.kappa;
    }
}

std::vector<bool> dual_activity(const ConeSolution& sol, const ConeProgram& prog,
                                const std::vector<RowRange>& ranges, double dual_threshold,
                                double slack_tol) {
    if (sol.status != ConeStatus::Optimal) {
        throw NotOptimal("dual activity requires an optimal solution, status is " + to_string(sol.status));
    }
    // Cone membership of each row.
    std::vector<int> cone_of(prog.n_rows());
    std::vector<int> cone_start;
    {
        int r = 0;
        for (std::size_t k = 0; k < prog.cones.size(); ++k) {
            cone_start.push_back(r);
            for (int i = 0; i < prog.cones[k].dim; ++i) cone_of[r + i] = static_cast<int>(k);
            r += prog.cones[k].dim;
        }
    }
    std::vector<bool> active(ranges.size(), false);
    for (std::size_t q = 0; q < ranges.size(); ++q) {
        const auto& rg = ranges[q];
        if (rg.begin < 0 || rg.end > prog.n_rows() || rg.begin >= rg.end) {
            throw std::out_of_range("row range outside the program");
        }
        const Cone& k = prog.cones[cone_of[rg.begin]];
        double dual = 0.0, slack = 0.0;
        if (k.kind == ConeKind::SOC) {
            const int o = cone_start[cone_of[rg.begin]];
            dual = sol.y(o);
            slack = sol.s(o) - (k.dim > 1 ? sol.s.segment(o + 1, k.dim - 1).norm() : 0.0);
        } else if (k.kind == ConeKind::Zero) {
            dual = sol.y.segment(rg.begin, rg.end - rg.begin).cwiseAbs().maxCoeff();
            slack = 0.0;
        } else {
            dual = sol.y.segment(rg.begin, rg.end - rg.begin).maxCoeff();
            slack = sol.s.segment(rg.begin, rg.end - rg.begin).minCoeff();
        }
        active[q] = dual >= dual_threshold || slack <= slack_tol;
    }
    return active;
}

}  // namespace tscvx
