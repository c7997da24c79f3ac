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

#include "tscvx/discretization.hpp"

#include <string>

#include "tscvx/errors.hpp"

namespace tscvx {

namespace {

// Augmented variational state integrated across one segment.
struct Augmented {
    StateVector x;
    StateMatrix Phi;
    InputMatrix Bm;
    InputMatrix Bp;
    StateVector S;

    Augmented& axpy(double a, const Augmented& o) {
        x += a * o.x;
        Phi += a * o.Phi;
        Bm += a * o.Bm;
        Bp += a * o.Bp;
        S += a * o.S;
        return *this;
    }
};

StateVector guarded_derivative(const StateVector& x, const ControlVector& u,
                               const ProblemConstants& c) {
    if (!(x(sx::m) > 0.0)) throw IntegrationFailure("mass left the positive range during integration");
    return derivative_generic<double>(x, u, c);
}

Augmented augmented_rhs(const ContinuousModel& model, const Augmented& s, double tau, double dtau,
                        const ControlVector& u0, const ControlVector& u1, double sigma) {
    const double lm = (dtau - tau) / dtau;
    const double lp = tau / dtau;
    const ControlVector u = lm * u0 + lp * u1;
    const DynamicsJacobians jac = model(s.x, u);
    const StateMatrix A = sigma * jac.A;
    const InputMatrix B = sigma * jac.B;
    Augmented d;
    d.x = sigma * jac.f;
    d.Phi.noalias() = A * s.Phi;
    d.Bm.noalias() = A * s.Bm;
    d.Bm += lm * B;
    d.Bp.noalias() = A * s.Bp;
    d.Bp += lp * B;
    d.S.noalias() = A * s.S;
    d.S += jac.f;
    return d;
}

void check_finite(const StateVector& x, int segment) {
    if (!x.allFinite()) {
        throw IntegrationFailure("non-finite state while integrating segment " +
                                 std::to_string(segment));
    }
}

ContinuousModel landing_model(const ProblemConstants& c) {
    return [&c](const StateVector& x, const ControlVector& u) {
        if (!(x(sx::m) > 0.0)) {
            throw IntegrationFailure("mass left the positive range during integration");
        }
        return jacobians(x, u, c);
    };
}

}  // namespace

LinearizedSegment linearize_segment(const ContinuousModel& model, const StateVector& x0,
                                    const ControlVector& u0, const ControlVector& u1, double sigma,
                                    double dtau, int substeps) {
    const double h = dtau / substeps;
    Augmented s{x0, StateMatrix::Identity(), InputMatrix::Zero(), InputMatrix::Zero(),
                StateVector::Zero()};
    for (int k = 0; k < substeps; ++k) {
        const double t = k * h;
        const Augmented k1 = augmented_rhs(model, s, t, dtau, u0, u1, sigma);
        Augmented tmp = s;
        const Augmented k2 = augmented_rhs(model, tmp.axpy(0.5 * h, k1), t + 0.5 * h, dtau, u0, u1, sigma);
        tmp = s;
        const Augmented k3 = augmented_rhs(model, tmp.axpy(0.5 * h, k2), t + 0.5 * h, dtau, u0, u1, sigma);
        tmp = s;
        const Augmented k4 = augmented_rhs(model, tmp.axpy(h, k3), t + h, dtau, u0, u1, sigma);
        s.axpy(h / 6.0, k1).axpy(h / 3.0, k2).axpy(h / 3.0, k3).axpy(h / 6.0, k4);
        check_finite(s.x, -1);
    }
    if (!s.Phi.allFinite() || !s.Bm.allFinite() || !s.Bp.allFinite() || !s.S.allFinite()) {
        throw IntegrationFailure("non-finite sensitivities in segment integration");
    }

    LinearizedSegment seg;
    seg.A_d = s.Phi;
    seg.B_minus = s.Bm;
    seg.B_plus = s.Bp;
    seg.S_d = s.S;
    seg.x_end = s.x;
    seg.w_d = s.x - s.Phi * x0 - s.Bm * u0 - s.Bp * u1 - s.S * sigma;
    return seg;
}

StateVector propagate_segment(const StateVector& x0, const ControlVector& u0,
                              const ControlVector& u1, double sigma, int n_nodes,
                              const ProblemConstants& c) {
    const double dtau = 1.0 / (n_nodes - 1);
    const int steps = c.rk4_substeps;
    const double h = dtau / steps;
    auto rhs = [&](const StateVector& x, double t) {
        const ControlVector u = ((dtau - t) / dtau) * u0 + (t / dtau) * u1;
        return StateVector(sigma * guarded_derivative(x, u, c));
    };
    StateVector x = x0;
    for (int k = 0; k < steps; ++k) {
        const double t = k * h;
        const StateVector k1 = rhs(x, t);
        const StateVector k2 = rhs(x + 0.5 * h * k1, t + 0.5 * h);
        const StateVector k3 = rhs(x + 0.5 * h * k2, t + 0.5 * h);
        const StateVector k4 = rhs(x + h * k3, t + h);
        x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        check_finite(x, -1);
    }
    return x;
}

std::vector<LinearizedSegment> discretize(const Trajectory& ref, const ProblemConstants& c) {
    const int n = ref.n_nodes();
    if (n < 2) throw std::invalid_argument("discretize needs at least two nodes");
    if (!(ref.sigma > 0.0)) throw std::invalid_argument("sigma must be positive");
    const ContinuousModel model = landing_model(c);
    std::vector<LinearizedSegment> segs(n - 1);
    for (int i = 0; i + 1 < n; ++i) {
        try {
            segs[i] = linearize_segment(model, ref.X.col(i), ref.U.col(i), ref.U.col(i + 1),
                                        ref.sigma, 1.0 / (n - 1), c.rk4_substeps);
        } catch (const IntegrationFailure& e) {
            throw IntegrationFailure("segment " + std::to_string(i) + ": " + e.what());
        }
    }
    return segs;
}

std::vector<double> defect(const Trajectory& traj, const ProblemConstants& c) {
    const int n = traj.n_nodes();
    std::vector<double> out(n > 1 ? n - 1 : 0);
    for (int i = 0; i + 1 < n; ++i) {
        const StateVector phi =
            propagate_segment(traj.X.col(i), traj.U.col(i), traj.U.col(i + 1), traj.sigma, n, c);
        out[i] = (traj.X.col(i + 1) - phi).lpNorm<1>();
    }
    return out;
}

Trajectory propagate(const Trajectory& traj, const ProblemConstants& c) {
    Trajectory out = traj;
    const int n = traj.n_nodes();
    for (int i = 0; i + 1 < n; ++i) {
        out.X.col(i + 1) =
            propagate_segment(out.X.col(i), traj.U.col(i), traj.U.col(i + 1), traj.sigma, n, c);
    }
    return out;
}

}  // namespace tscvx
