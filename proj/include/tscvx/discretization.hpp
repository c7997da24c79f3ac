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

#ifndef TSCVX_DISCRETIZATION_HPP
#define TSCVX_DISCRETIZATION_HPP

#include <functional>
#include <vector>

#include "tscvx/dynamics.hpp"
#include "tscvx/trajectory.hpp"

namespace tscvx {

/// Affine model of one FOH segment about the reference:
///   x_{i+1} = A_d x_i + B_minus u_i + B_plus u_{i+1} + S_d sigma + w_d + E v_i.
struct LinearizedSegment {
    StateMatrix A_d = StateMatrix::Identity();
    InputMatrix B_minus = InputMatrix::Zero();
    InputMatrix B_plus = InputMatrix::Zero();
    StateVector S_d = StateVector::Zero();
    StateVector w_d = StateVector::Zero();
    StateMatrix E = StateMatrix::Identity();
    /// Nonlinear end state of the segment from the reference node.
    StateVector x_end = StateVector::Zero();
};

/// Continuous model returning f, A = df/dx and B = df/du at (x, u).
using ContinuousModel = std::function<DynamicsJacobians(const StateVector&, const ControlVector&)>;

/// Integrates the variational equations of x' = sigma f(x, u) over one segment
/// of normalized length dtau with the control interpolated linearly from u0 to
/// u1.
LinearizedSegment linearize_segment(const ContinuousModel& model, const StateVector& x0,
                                    const ControlVector& u0, const ControlVector& u1, double sigma,
                                    double dtau, int substeps);

/// Linearizes each of the N-1 segments of `ref`. Integration uses fixed-step
/// RK4 with `c.rk4_substeps` steps per segment. Throws IntegrationFailure.
std::vector<LinearizedSegment> discretize(const Trajectory& ref, const ProblemConstants& c);

/// Nonlinear FOH propagation of a single segment of normalized length
/// 1/(N-1) starting from x.
StateVector propagate_segment(const StateVector& x, const ControlVector& u0,
                              const ControlVector& u1, double sigma, int n_nodes,
                              const ProblemConstants& c);

/// l1 norm of x_{i+1} - Phi(x_i, u_i, u_{i+1}, sigma) for each segment.
std::vector<double> defect(const Trajectory& traj, const ProblemConstants& c);

/// Single-shooting rollout: node 0 state is kept and every later node is the
/// propagated image of its predecessor under the trajectory's controls.
Trajectory propagate(const Trajectory& traj, const ProblemConstants& c);

}  // namespace tscvx

#endif  // TSCVX_DISCRETIZATION_HPP
