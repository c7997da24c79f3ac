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

#ifndef TSCVX_TRAJECTORY_HPP
#define TSCVX_TRAJECTORY_HPP

#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "tscvx/problem.hpp"

namespace tscvx {

/// N nodes of state and control on the normalized horizon tau in [0, 1];
/// physical time is t = sigma * tau, so t_f = sigma.
struct Trajectory {
    Eigen::Matrix<double, kStateDim, Eigen::Dynamic> X;
    Eigen::Matrix<double, kControlDim, Eigen::Dynamic> U;
    double sigma = 1.0;

    Trajectory() = default;
    explicit Trajectory(int n_nodes);

    [[nodiscard]] int n_nodes() const { return static_cast<int>(X.cols()); }
    [[nodiscard]] StateVector x(int i) const { return X.col(i); }
    [[nodiscard]] ControlVector u(int i) const { return U.col(i); }
    [[nodiscard]] VehicleState state(int i) const { return VehicleState::from_vector(X.col(i)); }

    /// Renormalizes every node quaternion.
    void normalize_quaternions();

    bool operator==(const Trajectory& other) const;
};

nlohmann::json to_json(const Trajectory& traj);
Trajectory trajectory_from_json(const nlohmann::json& j);

/// One row per node: t, m, r(3), v(3), q(4), w(3) [deg/U_T], T(3).
std::string to_csv(const Trajectory& traj);

/// Straight-line cold-start guess: linear r, v, w and mass from m0 toward
/// m_dry, SLERP attitude, hover thrust -m g_I in the body frame, and
/// sigma = t_f,max / 2.
Trajectory initial_guess(const ProblemInstance& inst);

}  // namespace tscvx

#endif  // TSCVX_TRAJECTORY_HPP
