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

#ifndef TSCVX_DATASET_HPP
#define TSCVX_DATASET_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "tscvx/problem.hpp"
#include "tscvx/scvx.hpp"
#include "tscvx/trajectory.hpp"

namespace tscvx {

/// r0(3), v0(3), q0(4), w0(3) [rad/U_T], m0, theta_max [rad], gamma_gs [rad].
inline constexpr int kParamDim = 16;
extern const std::array<std::string_view, kParamDim> kParamNames;

Eigen::VectorXd param_vector(const ProblemInstance& inst);
/// Quaternion renormalized; constants and terminal state from `base`.
ProblemInstance instance_from_params(const Eigen::VectorXd& params,
                                     const ProblemInstance& base = ProblemInstance::nominal());
/// Params followed by the succession index k.
Eigen::VectorXd constraint_input(const Eigen::VectorXd& params, int k);

/// Node-major (state 14, control 3) then t_f = sigma; width 17 N + 1.
inline int solution_width(int n_nodes) { return (kStateDim + kControlDim) * n_nodes + 1; }
Eigen::VectorXd encode_solution(const Trajectory& traj);
/// sigma clamped to [sigma_min, t_f_max], mass to [m_dry, m0], quaternions
/// renormalized (identity when degenerate).
Trajectory decode_solution(const Eigen::VectorXd& z, const ProblemInstance& inst);

/// Uniform box for every parameter component; quaternion components are
/// drawn independently and renormalized.
struct SampleRanges {
    double gamma_lo = 0.0, gamma_hi = 0.0;
    double theta_lo = 0.0, theta_hi = 0.0;
    Eigen::Vector3d r_lo, r_hi, v_lo, v_hi, w_lo, w_hi;
    Eigen::Vector4d q_lo, q_hi;
    double m_lo = 0.0, m_hi = 0.0;

    /// Published dataset spread (lateral position nonnegative).
    static SampleRanges wide();
    /// Narrower box around the nominal landing in which most draws are
    /// feasible; roll rate fixed at zero.
    static SampleRanges desk();
};

Eigen::VectorXd sample_params(std::mt19937_64& rng, const SampleRanges& ranges);
Eigen::VectorXd sample_params(std::uint64_t seed, const SampleRanges& ranges = SampleRanges::desk());

enum class Split : std::uint8_t { None, Train, Test };
std::string_view to_string(Split s);

struct Sample {
    int id = 0;
    int base_id = 0;
    double rotation_deg = 0.0;
    Split split = Split::None;
    bool converged = false;
    int iterations = 0;
    Eigen::VectorXd params;            // kParamDim
    std::vector<TightSet> tight_sets;  // accepted iterations k = 1..
    Eigen::VectorXd solution;          // 17 N + 1

    /// Stored set for succession k (1-based); the last one beyond the record.
    [[nodiscard]] const TightSet& tight_at(int k) const;
};

struct Standardization {
    Eigen::VectorXd mean;
    Eigen::VectorXd std;  // components with zero spread stored as 1

    [[nodiscard]] bool empty() const { return mean.size() == 0; }
    [[nodiscard]] Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    static Standardization fit(const Eigen::MatrixXd& rows);
};

struct Dataset {
    int n_nodes = 50;
    std::vector<Sample> samples;
    Standardization stats;

    [[nodiscard]] std::vector<const Sample*> select(Split s, bool converged_only = true) const;
    [[nodiscard]] Eigen::MatrixXd params_matrix(const std::vector<const Sample*>& rows) const;
};

/// Up-axis rotation by phi [rad]: params, solution states and controls
/// rotated, tight sets copied.
Sample rotate_sample(const Sample& s, double phi);

inline constexpr std::array<double, 8> kRotationAnglesDeg{0, 45, 90, 135, 180, 225, 270, 315};

struct GenerateOptions {
    int count = 25;
    std::uint64_t seed = 1;
    SampleRanges ranges = SampleRanges::desk();
    bool augment = true;
    int threads = 1;
    std::function<void(const std::string&)> log;
};

struct GenerateStats {
    int attempted = 0;
    int converged = 0;
    int not_converged = 0;
    int dropped = 0;
};

/// Solves every base draw with SCvx, keeps converged and non-converged
/// runs (flagged), drops failures, and appends the rotated copies of
/// converged runs. Sample id = 8 base + rotation index.
Dataset generate(const GenerateOptions& opts, const ProblemInstance& base = ProblemInstance::nominal(),
                 GenerateStats* stats = nullptr);

/// Adds the 7 non-identity rotations of every converged base sample.
void augment(Dataset& ds);

/// Group-aware split: every rotation of a base sample goes to the same side.
/// With per_sample the split is per sample. Standardization from train.
void split_and_standardize(Dataset& ds, double ratio, std::uint64_t seed, bool per_sample = false);

/// JSON lines: a header, then one sample per line.
void write_dataset(std::ostream& os, const Dataset& ds);
Dataset read_dataset(std::istream& is);
void save_dataset(const std::string& path, const Dataset& ds);
Dataset load_dataset(const std::string& path);

/// Writes <prefix>_constraint.csv (one row per sample and succession k) and
/// <prefix>_solution.csv (one row per sample) for converged samples.
/// Columns: id, base_id, split, [k,] p0..p15, then t0..t{7N-1} or y0..y{17N}.
/// Parameters are raw; <prefix>_stats.json holds the train standardization.
void export_training(const Dataset& ds, const std::string& prefix);

/// Fraction of zero bits over every stored tight set of the selection.
double zeros_baseline_accuracy(const std::vector<const Sample*>& samples);

}  // namespace tscvx

#endif  // TSCVX_DATASET_HPP
