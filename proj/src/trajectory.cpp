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

#include "tscvx/trajectory.hpp"

#include <cstdio>
#include <sstream>

#include "tscvx/errors.hpp"
#include "tscvx/quaternion.hpp"

namespace tscvx {

using nlohmann::json;

Trajectory::Trajectory(int n_nodes)
    : X(Eigen::Matrix<double, kStateDim, Eigen::Dynamic>::Zero(kStateDim, n_nodes)),
      U(Eigen::Matrix<double, kControlDim, Eigen::Dynamic>::Zero(kControlDim, n_nodes)) {}

void Trajectory::normalize_quaternions() {
    for (int i = 0; i < n_nodes(); ++i) {
        X.block<4, 1>(sx::q, i) = quat::normalized(X.block<4, 1>(sx::q, i));
    }
}

bool Trajectory::operator==(const Trajectory& other) const {
    return sigma == other.sigma && X.cols() == other.X.cols() && X == other.X && U == other.U;
}

json to_json(const Trajectory& traj) {
    json states = json::array();
    json controls = json::array();
    for (int i = 0; i < traj.n_nodes(); ++i) {
        states.push_back(std::vector<double>(traj.X.col(i).data(), traj.X.col(i).data() + kStateDim));
        controls.push_back(
            std::vector<double>(traj.U.col(i).data(), traj.U.col(i).data() + kControlDim));
    }
    return json{{"sigma", traj.sigma}, {"states", states}, {"controls", controls}};
}

Trajectory trajectory_from_json(const json& j) {
    const auto& states = j.at("states");
    const auto& controls = j.at("controls");
    if (states.size() != controls.size()) {
        throw FormatError("trajectory states and controls differ in length");
    }
    Trajectory traj(static_cast<int>(states.size()));
    traj.sigma = j.at("sigma").get<double>();
    for (int i = 0; i < traj.n_nodes(); ++i) {
        const auto x = states[i].get<std::vector<double>>();
        const auto u = controls[i].get<std::vector<double>>();
        if (x.size() != kStateDim || u.size() != kControlDim) {
            throw FormatError("trajectory node " + std::to_string(i) + " has the wrong width");
        }
        traj.X.col(i) = Eigen::Map<const StateVector>(x.data());
        traj.U.col(i) = Eigen::Map<const ControlVector>(u.data());
    }
    return traj;
}

std::string to_csv(const Trajectory& traj) {
    std::ostringstream os;
    os << "t,m,rx,ry,rz,vx,vy,vz,q0,q1,q2,q3,wx_deg,wy_deg,wz_deg,Tx,Ty,Tz\n";
    const int n = traj.n_nodes();
    char buf[64];
    for (int i = 0; i < n; ++i) {
        const double t = n > 1 ? traj.sigma * i / (n - 1) : 0.0;
        std::snprintf(buf, sizeof buf, "%.10g", t);
        os << buf;
        for (int k = 0; k < kStateDim; ++k) {
            double v = traj.X(k, i);
            if (k >= sx::w) v = rad2deg(v);
            std::snprintf(buf, sizeof buf, ",%.10g", v);
            os << buf;
        }
        for (int k = 0; k < kControlDim; ++k) {
            std::snprintf(buf, sizeof buf, ",%.10g", traj.U(k, i));
            os << buf;
        }
        os << '\n';
    }
    return os.str();
}

Trajectory initial_guess(const ProblemInstance& inst) {
    const auto& c = inst.constants;
    const int n = c.N;
    Trajectory traj(n);
    for (int i = 0; i < n; ++i) {
        const double a = n > 1 ? static_cast<double>(i) / (n - 1) : 0.0;
        StateVector x;
        x(sx::m) = (1.0 - a) * inst.x0.m + a * c.m_dry;
        x.segment<3>(sx::r) = (1.0 - a) * inst.x0.r_I + a * inst.xf.r_I;
        x.segment<3>(sx::v) = (1.0 - a) * inst.x0.v_I + a * inst.xf.v_I;
        x.segment<4>(sx::q) = quat::slerp(quat::normalized(inst.x0.q_BI), inst.xf.q_BI, a);
        x.segment<3>(sx::w) = (1.0 - a) * inst.x0.w_B + a * inst.xf.w_B;
        traj.X.col(i) = x;
        const Eigen::Matrix3d c_bi = quat::dcm_body_from_inertial<double>(x.segment<4>(sx::q));
        traj.U.col(i) = c_bi * (-x(sx::m) * c.g_I);
    }
    traj.sigma = 0.5 * c.t_f_max;
    return traj;
}

}  // namespace tscvx
