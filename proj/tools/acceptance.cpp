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

// Acceptance gates. One PASS/FAIL line per criterion; the exit code is the
// number of failures.
//
//   tscvx_acceptance [--data DIR] [--dataset FILE] [--draws N] [--seed S]
//
// --dataset reuses (or, when missing, writes) the generated warm-start
// dataset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "../tests/support/socp_oracle.hpp"
#include "tscvx/dataset.hpp"
#include "tscvx/dynamics.hpp"
#include "tscvx/neighbors.hpp"
#include "tscvx/nn.hpp"
#include "tscvx/scvx.hpp"
#include "tscvx/symmetry.hpp"
#include "tscvx/warmstart.hpp"

namespace {

using namespace tscvx;
using Clock = std::chrono::steady_clock;

struct Args {
    std::string data = TSCVX_TEST_DATA;
    std::string dataset;
    int draws = 40;
    std::uint64_t seed = 7;
};

int failures = 0;

void report(const std::string& name, bool pass, const std::string& detail) {
    if (!pass) ++failures;
    fmt::print("{} {:<22} {}\n", pass ? "PASS" : "FAIL", name, detail);
    std::fflush(stdout);
}

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

void jacobians_gate() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    ProblemConstants c;
    c.r_cp_B = Eigen::Vector3d(0.05, -0.02, 0.03);
    const double h = 1e-6;
    double worst = 0.0;
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    for (int t = 0; t < 100; ++t) {
        StateVector x;
        x(sx::m) = 2.5 + 0.5 * U(rng);
        for (int k = 0; k < 3; ++k) {
            x(sx::r + k) = 5.0 * U(rng);
            x(sx::v + k) = 2.0 * U(rng);
            x(sx::w + k) = U(rng);
        }
        for (int k = 0; k < 4; ++k) x(sx::q + k) = U(rng);
        x.segment<4>(sx::q).normalize();
        ControlVector u(U(rng), U(rng), U(rng));
        u *= (0.3 + 4.7 * 0.5 * (1.0 + U(rng))) / u.norm();
        const auto jac = jacobians(x, u, c);
        for (int j = 0; j < kStateDim; ++j) {
            StateVector xp = x, xm = x;
            xp(j) += h;
            xm(j) -= h;
            const StateVector col = (derivative(xp, u, c) - derivative(xm, u, c)) / (2.0 * h);
            for (int i = 0; i < kStateDim; ++i) worst = std::max(worst, rel(jac.A(i, j), col(i)));
        }
        for (int j = 0; j < kControlDim; ++j) {
            ControlVector up = u, um = u;
            up(j) += h;
            um(j) -= h;
            const StateVector col = (derivative(x, up, c) - derivative(x, um, c)) / (2.0 * h);
            for (int i = 0; i < kStateDim; ++i) worst = std::max(worst, rel(jac.B(i, j), col(i)));
        }
    }
    const double s = seconds_since(t0);
    report("jacobians", worst < 1e-5 && s < 5.0,
           fmt::format("100 points, max rel err {:.2e} (< 1e-5), {:.2f} s (< 5 s)", worst, s));
}

void conic_gate() {
    const auto t0 = Clock::now();
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> nvars(5, 30);
    double worst_gap = 0.0, worst_obj = 0.0;
    int not_optimal = 0;
    for (int trial = 0; trial < 50; ++trial) {
        const ConeProgram p = testing::random_socp(rng, nvars(rng), 3, trial % 3 == 0);
        const ConeSolution sol = solve(p);
        if (sol.status != ConeStatus::Optimal) {
            ++not_optimal;
            continue;
        }
        const auto ref = testing::admm_oracle(p);
        worst_gap = std::max(worst_gap, sol.gap);
        worst_obj = std::max(worst_obj, std::abs(sol.primal_objective - ref.objective) /
                                            std::max(1.0, std::abs(ref.objective)));
    }
    const double s = seconds_since(t0);
    report("conic-solver", not_optimal == 0 && worst_gap < 1e-6 && worst_obj < 1e-5 && s < 30.0,
           fmt::format("50 SOCPs, {} not optimal, max gap {:.1e}, max obj diff {:.1e}, {:.1f} s", not_optimal,
                       worst_gap, worst_obj, s));
}

void scvx_gate() {
    const auto t0 = Clock::now();
    const auto inst = ProblemInstance::nominal();
    const ScvxReport rep = scvx(inst);
    const double s = seconds_since(t0);
    const auto f = feasibility(rep.solution, inst);
    bool monotone = true;
    double J = rep.iterates.empty() ? 0.0 : rep.iterates.front().J;
    for (const auto& it : rep.iterates) {
        if (!it.accepted) continue;
        if (it.J_next > J) monotone = false;
        J = it.J_next;
    }
    const bool ok = rep.status == ScvxStatus::Converged && rep.iterations() <= 20 && f.max_defect <= 1e-3 &&
                    f.max_violation <= 1e-3 && monotone && s < 60.0;
    report("scvx-convergence", ok,
           fmt::format("{} after {} it, defect {:.1e}, violation {:.1e}, monotone {}, {:.1f} s",
                       to_string(rep.status), rep.iterations(), f.max_defect, f.max_violation, monotone, s));
}

void trust_region_gate() {
    const TrustRegion tr = TrustRegion::from_constants(ProblemConstants{}, 1.0);
    const double s2 = std::sqrt(2.0);
    struct Case {
        double rho, tau_r, radius;
        bool accepted;
    };
    const Case cases[] = {
        {-0.2, 0.0, 0.5, false}, {-0.2, 0.5, 0.5, false},    {-0.2, 1.0, 0.5, false},
        {0.05, 0.0, 1.0, true},  {0.05, 0.5, 1.0 / s2, true}, {0.05, 1.0, 0.5, true},
        {0.4, 0.0, 1.0, true},   {0.4, 0.5, 1.0, true},       {0.4, 1.0, 1.0, true},
        {0.8, 0.0, 2.0, true},   {0.8, 0.5, s2, true},        {0.8, 1.0, 1.0, true},
    };
    int bad = 0;
    for (const auto& c : cases) {
        const auto u = update_trust_region(tr, c.rho, c.tau_r);
        if (u.accepted != c.accepted || u.radius != c.radius) ++bad;
    }
    report("trust-region", bad == 0 && tr.alpha == 2.0 && tr.beta == 2.0,
           fmt::format("12 (rho, tau_r) cases, {} mismatches", bad));
}

// The first 5 base draws that converge are used. Rows are compared where
// the reference residual is farther than 1e-3 from zero.
void rotation_gate(std::uint64_t seed) {
    const auto t0 = Clock::now();
    const ConstraintCatalog catalog(50);
    int bases = 0, draws = 0, compared = 0, solved = 0, failed = 0;
    int disagree[2] = {0, 0};
    double worst_cost[2] = {0.0, 0.0};  // multiples of 90 deg, others
    for (; bases < 5 && draws < 20; ++draws) {
        const ProblemInstance base = instance_from_params(sample_params(seed * 1000 + draws));
        const ScvxReport ref = scvx(base);
        if (ref.status != ScvxStatus::Converged) continue;
        ++bases;
        const TightSet ref_tight = ref.accepted_tight_sets().back();
        std::vector<double> g(catalog.width());
        for (int n = 0; n < 50; ++n) {
            const auto res = evaluate_constraints(ref.solution.x(n), ref.solution.u(n), base);
            for (int k = 0; k < kRowsPerNode; ++k) g[n * kRowsPerNode + k] = res[k];
        }
        for (double deg : kRotationAnglesDeg) {
            const int cls = std::fmod(deg, 90.0) == 0.0 ? 0 : 1;
            const ScvxReport rep = scvx(rotate_instance(base, deg * std::numbers::pi / 180.0));
            if (rep.status != ScvxStatus::Converged) {
                ++failed;
                continue;
            }
            ++solved;
            const TightSet t = rep.accepted_tight_sets().back();
            for (int i = 0; i < catalog.width(); ++i) {
                if (std::abs(g[i]) <= 1e-3) continue;
                ++compared;
                if (t.bits[i] != ref_tight.bits[i]) ++disagree[cls];
            }
            worst_cost[cls] = std::max(worst_cost[cls], std::abs(cost(rep.solution) - cost(ref.solution)) /
                                                            std::max(1e-12, std::abs(cost(ref.solution))));
        }
    }
    const double s = seconds_since(t0);
    const bool ok = bases == 5 && failed == 0 && disagree[0] + disagree[1] == 0 &&
                    std::max(worst_cost[0], worst_cost[1]) <= 1e-3 && s < 600.0;
    report("rotation-invariance", ok,
           fmt::format("{} bases, {} solves ({} not converged), {} margin rows; 90k deg: {} differ, cost rel "
                       "{:.1e}; 45+90k deg: {} differ, cost rel {:.1e}; {:.0f} s",
                       bases, solved, failed, compared, disagree[0], worst_cost[0], disagree[1], worst_cost[1], s));
}

Dataset warm_dataset(const Args& a) {
    if (!a.dataset.empty() && std::filesystem::exists(a.dataset)) return load_dataset(a.dataset);
    GenerateOptions g;
    g.count = a.draws;
    g.seed = a.seed;
    Dataset ds = generate(g);
    split_and_standardize(ds, 0.8, a.seed);
    if (!a.dataset.empty()) save_dataset(a.dataset, ds);
    return ds;
}

void warm_start_gate(const Dataset& ds) {
    const auto train = ds.select(Split::Train);
    const auto test = ds.select(Split::Test);
    const KdTreePredictor kd(ds);
    const std::size_t n = std::min<std::size_t>(test.size(), 24);
    double cold_it = 0, cold_s = 0, warm_it = 0, warm_s = 0;
    int warm_fail = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const ProblemInstance inst = instance_from_params(test[i]->params);
        const ScvxReport cold = scvx(inst);
        cold_it += cold.iterations();
        cold_s += cold.solve_seconds;
        const auto t0 = Clock::now();
        const WarmStartReport warm = warm_scvx(inst, kd);
        warm_s += seconds_since(t0);
        warm_it += warm.report.iterations();
        if (warm.report.status != ScvxStatus::Converged) ++warm_fail;
    }
    const double d = std::max<double>(1.0, static_cast<double>(n));
    const bool ok = ds.samples.size() >= 200 && n >= 20 && warm_it / d <= cold_it / d && warm_s < cold_s;
    report("warm-start", ok,
           fmt::format("{} samples ({} train), {} test: cold {:.2f} it {:.2f} s, kd {:.2f} it {:.2f} s, "
                       "{} kd not converged",
                       ds.samples.size(), train.size(), n, cold_it / d, cold_s / d, warm_it / d, warm_s / d,
                       warm_fail));
}

void kdtree_gate() {
    std::mt19937_64 rng(21);
    std::normal_distribution<double> N01;
    Eigen::MatrixXd P(300, 16);
    for (int i = 0; i < P.size(); ++i) P.data()[i] = N01(rng);
    std::vector<int> ids(300);
    for (int i = 0; i < 300; ++i) ids[i] = 1000 + i;
    std::shuffle(ids.begin(), ids.end(), rng);
    const KdTree tree(P, ids);
    int mismatch = 0;
    for (int t = 0; t < 500; ++t) {
        Eigen::VectorXd q(16);
        for (int i = 0; i < 16; ++i) q(i) = N01(rng);
        for (int k : {1, 11}) {
            const auto a = tree.knn(q, k);
            const auto b = KdTree::linear_scan(P, ids, q, k);
            if (a.size() != b.size()) {
                ++mismatch;
                continue;
            }
            for (std::size_t i = 0; i < a.size(); ++i) {
                if (a[i].id != b[i].id || a[i].dist2 != b[i].dist2) ++mismatch;
            }
        }
    }
    double self_mse = 0.0;
    for (int i = 0; i < 300; ++i) {
        const auto nn = tree.nearest(P.row(i).transpose());
        const int row = static_cast<int>(std::find(ids.begin(), ids.end(), nn.id) - ids.begin());
        self_mse += (P.row(row) - P.row(i)).squaredNorm() / 16.0;
    }
    self_mse /= 300.0;
    report("kdtree", mismatch == 0 && self_mse == 0.0,
           fmt::format("500 queries x k in {{1, 11}}: {} mismatches, self-recall MSE {}", mismatch, self_mse));
}

void attention_gate(const std::string& data) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N(0.0, 2.0);
    double worst_row = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        MatrixXd S(6, 6);
        for (int i = 0; i < S.size(); ++i) S.data()[i] = 10.0 * N(rng);
        const MatrixXd P = softmax_rows(S);
        for (int i = 0; i < P.rows(); ++i) worst_row = std::max(worst_row, std::abs(P.row(i).sum() - 1.0));
    }
    const auto fx = load_parity_fixture(data + "/parity_fixture.json");
    const auto w = load_weights(fx.weights);
    double worst_logit = 0.0;
    for (const auto& c : fx.cases) {
        const VectorXd y = forward_standardized(w, c.input);
        worst_logit = y.size() == c.logits.size() ? std::max(worst_logit, (y - c.logits).cwiseAbs().maxCoeff())
                                                  : INFINITY;
    }
    report("attention-parity", worst_row <= 1e-9 && !fx.cases.empty() && worst_logit <= 1e-4,
           fmt::format("row sum err {:.1e} (<= 1e-9), {} fixture cases, max logit err {:.1e} (<= 1e-4)", worst_row,
                       fx.cases.size(), worst_logit));
}

void mahalanobis_gate() {
    std::mt19937_64 rng(25);
    std::normal_distribution<double> N01;
    auto gaussian = [&](int n, int p) {
        Eigen::MatrixXd X(n, p);
        for (int i = 0; i < X.size(); ++i) X.data()[i] = N01(rng);
        return X;
    };
    const Eigen::MatrixXd set = gaussian(200, 6);
    const auto self = mahalanobis_split(set, set);
    const int flagged = static_cast<int>(self.ood.size());

    const Eigen::MatrixXd train = gaussian(400, 6);
    const Eigen::MatrixXd test = gaussian(200, 6);
    const auto split = mahalanobis_split(train, test);
    const Eigen::RowVectorXd mu = train.colwise().mean();
    const Eigen::MatrixXd C = train.rowwise() - mu;
    const Eigen::MatrixXd Sinv = (C.transpose() * C / 399.0).inverse();
    auto dm = [&](const Eigen::RowVectorXd& x) {
        const Eigen::RowVectorXd d = x - mu;
        return std::sqrt((d * Sinv * d.transpose())(0, 0));
    };
    std::vector<double> d;
    for (int i = 0; i < 400; ++i) d.push_back(dm(train.row(i)));
    std::sort(d.begin(), d.end());
    const double pos = 0.95 * 399.0;
    const int lo = static_cast<int>(pos);
    const double thr = d[lo] + (pos - lo) * (d[lo + 1] - d[lo]);
    std::vector<int> ood;
    for (int i = 0; i < 200; ++i) {
        if (dm(test.row(i)) > thr) ood.push_back(i);
    }
    const bool oracle = std::abs(split.threshold - thr) <= 1e-10 && split.ood == ood;
    report("mahalanobis", std::abs(flagged - 10) <= 1 && oracle,
           fmt::format("{} of 200 flagged (10 +- 1), sort oracle {}", flagged, oracle ? "exact" : "differs"));
}

void baseline_gate(const Dataset& ds) {
    const auto test = ds.select(Split::Test);
    const double zeros = zeros_baseline_accuracy(test);
    const KdTreePredictor kd(ds);
    long hit = 0, total = 0;
    for (const Sample* s : test) {
        for (std::size_t k = 1; k <= s->tight_sets.size(); ++k) {
            const TightSet p = kd.predict_tight(s->params, static_cast<int>(k));
            const auto& t = s->tight_sets[k - 1].bits;
            for (std::size_t i = 0; i < t.size(); ++i) hit += p.bits[i] == t[i];
            total += static_cast<long>(t.size());
        }
    }
    const double acc = total > 0 ? static_cast<double>(hit) / static_cast<double>(total) : 0.0;
    report("zeros-baseline", zeros >= 0.90 && zeros <= 0.99 && acc > zeros,
           fmt::format("test zeros accuracy {:.4f} in [0.90, 0.99], kd accuracy {:.4f}", zeros, acc));
}

}  // namespace

int main(int argc, char** argv) {
    Args a;
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string k = argv[i], v = argv[i + 1];
        if (k == "--data") a.data = v;
        else if (k == "--dataset") a.dataset = v;
        else if (k == "--draws") a.draws = std::stoi(v);
        else if (k == "--seed") a.seed = std::stoull(v);
        else {
            fmt::print(stderr, "unknown option {}\n", k);
            return 64;
        }
    }
    try {
        jacobians_gate();
        conic_gate();
        scvx_gate();
        trust_region_gate();
        kdtree_gate();
        attention_gate(a.data);
        mahalanobis_gate();
        rotation_gate(a.seed);
        const Dataset ds = warm_dataset(a);
        warm_start_gate(ds);
        baseline_gate(ds);
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return 64;
    }
    fmt::print("{} failing\n", failures);
    return failures;
}
