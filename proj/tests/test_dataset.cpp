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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "tscvx/dataset.hpp"
#include "tscvx/errors.hpp"
#include "tscvx/quaternion.hpp"

namespace tscvx {
namespace {

Sample synthetic(int base, std::uint64_t seed, int n_nodes = 50) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Sample s;
    s.id = 8 * base;
    s.base_id = base;
    s.converged = true;
    s.iterations = 7;
    s.params = sample_params(rng, SampleRanges::desk());
    s.solution.resize(solution_width(n_nodes));
    for (int i = 0; i < s.solution.size(); ++i) s.solution(i) = u(rng);
    const int width = ConstraintCatalog(n_nodes).width();
    for (int k = 1; k <= 3; ++k) {
        TightSet t;
        t.iteration = 2 * k;
        t.bits.assign(width, 0);
        for (int j = 0; j < width; j += 5 + k) t.bits[j] = 1;
        s.tight_sets.push_back(t);
    }
    return s;
}

Dataset synthetic_dataset(int groups) {
    Dataset ds;
    for (int g = 0; g < groups; ++g) ds.samples.push_back(synthetic(g, 100 + g));
    augment(ds);
    return ds;
}

TEST(Params, RoundTripThroughInstance) {
    const Eigen::VectorXd p = sample_params(std::uint64_t{5});
    ASSERT_EQ(p.size(), kParamDim);
    EXPECT_NEAR(p.segment<4>(6).norm(), 1.0, 1e-15);
    EXPECT_EQ(p(10), 0.0);
    EXPECT_EQ(param_vector(instance_from_params(p)), p);
    const Eigen::VectorXd x = constraint_input(p, 4);
    EXPECT_EQ(x.size(), 17);
    EXPECT_EQ(x(16), 4.0);
    EXPECT_THROW(instance_from_params(Eigen::VectorXd::Zero(3)), std::invalid_argument);
}

TEST(Params, WideRangesStayInBox) {
    std::mt19937_64 rng(3);
    const auto R = SampleRanges::wide();
    for (int i = 0; i < 200; ++i) {
        const Eigen::VectorXd p = sample_params(rng, R);
        EXPECT_GE(p(0), R.r_lo(0));
        EXPECT_LE(p(2), R.r_hi(2));
        EXPECT_LE(p(13), R.m_hi);
        EXPECT_LE(p(15), deg2rad(90.0));
        EXPECT_NEAR(p.segment<4>(6).norm(), 1.0, 1e-12);
    }
}

TEST(Solution, WidthAndClamps) {
    EXPECT_EQ(solution_width(50), 851);
    const ProblemInstance inst = ProblemInstance::nominal();
    const Trajectory t = initial_guess(inst);
    const Eigen::VectorXd z = encode_solution(t);
    EXPECT_EQ(z.size(), 851);
    const Trajectory back = decode_solution(z, inst);
    EXPECT_LT((back.X - t.X).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(back.sigma, t.sigma);

    const Trajectory zero = decode_solution(Eigen::VectorXd::Zero(851), inst);
    EXPECT_EQ(zero.sigma, inst.constants.sigma_min);
    EXPECT_EQ(zero.X(sx::m, 3), inst.constants.m_dry);
    EXPECT_EQ((zero.X.block<4, 1>(sx::q, 3)), quat::identity());
    EXPECT_THROW(decode_solution(Eigen::VectorXd::Zero(850), inst), ShapeMismatch);
}

TEST(Rotation, ZeroAngleIsBitIdentical) {
    const Sample s = synthetic(0, 1);
    const Sample r = rotate_sample(s, 0.0);
    EXPECT_EQ(r.params, s.params);
    EXPECT_EQ(r.solution, s.solution);
}

TEST(Rotation, HalfTurnTwiceRestores) {
    const Sample s = synthetic(0, 2);
    const Sample r = rotate_sample(rotate_sample(s, deg2rad(180.0)), deg2rad(180.0));
    EXPECT_LT((r.params - s.params).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((r.solution - s.solution).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_EQ(r.tight_sets, s.tight_sets);
    const Sample q = rotate_sample(s, deg2rad(90.0));
    EXPECT_NEAR(q.params(1), -s.params(2), 1e-12);
    EXPECT_NEAR(q.params(2), s.params(1), 1e-12);
    EXPECT_EQ(q.params(0), s.params(0));
}

TEST(Augment, EightRotationsPerConvergedSample) {
    Dataset ds;
    ds.samples.push_back(synthetic(0, 1));
    ds.samples.push_back(synthetic(1, 2));
    ds.samples[1].converged = false;
    augment(ds);
    ASSERT_EQ(ds.samples.size(), 9u);
    for (int j = 0; j < 8; ++j) {
        EXPECT_EQ(ds.samples[j].id, j);
        EXPECT_EQ(ds.samples[j].rotation_deg, kRotationAnglesDeg[j]);
    }
    EXPECT_EQ(ds.samples[8].id, 8);
}

TEST(Split, GroupAwareWithoutLeakage) {
    Dataset ds = synthetic_dataset(10);
    split_and_standardize(ds, 0.8, 42);
    std::set<int> train, test;
    for (const auto& s : ds.samples) (s.split == Split::Train ? train : test).insert(s.base_id);
    EXPECT_EQ(train.size(), 8u);
    EXPECT_EQ(test.size(), 2u);
    for (int g : test) EXPECT_EQ(train.count(g), 0u);

    const auto rows = ds.select(Split::Train);
    EXPECT_EQ(rows.size(), 64u);
    Eigen::MatrixXd Z(rows.size(), kParamDim);
    for (std::size_t i = 0; i < rows.size(); ++i) Z.row(i) = ds.stats.apply(rows[i]->params).transpose();
    EXPECT_LT(Z.colwise().mean().cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(ds.stats.std(10), 1.0);

    Dataset per = synthetic_dataset(10);
    split_and_standardize(per, 0.8, 42, true);
    EXPECT_EQ(per.select(Split::Train).size(), 64u);
    EXPECT_THROW(split_and_standardize(per, 1.5, 1), std::invalid_argument);
    Dataset empty;
    EXPECT_THROW(split_and_standardize(empty, 0.8, 1), EmptyDataset);
}

TEST(Io, JsonLinesRoundTrip) {
    Dataset ds = synthetic_dataset(3);
    split_and_standardize(ds, 0.8, 9);
    std::stringstream buf;
    write_dataset(buf, ds);
    const std::string first = buf.str();
    const Dataset back = read_dataset(buf);
    ASSERT_EQ(back.samples.size(), ds.samples.size());
    for (std::size_t i = 0; i < ds.samples.size(); ++i) {
        EXPECT_EQ(back.samples[i].params, ds.samples[i].params);
        EXPECT_EQ(back.samples[i].solution, ds.samples[i].solution);
        EXPECT_EQ(back.samples[i].tight_sets, ds.samples[i].tight_sets);
        EXPECT_EQ(back.samples[i].split, ds.samples[i].split);
        EXPECT_EQ(back.samples[i].rotation_deg, ds.samples[i].rotation_deg);
    }
    EXPECT_EQ(back.stats.mean, ds.stats.mean);
    std::stringstream again;
    write_dataset(again, back);
    EXPECT_EQ(again.str(), first);

    std::stringstream bad("{\"format\": \"other\"}\n");
    EXPECT_THROW(read_dataset(bad), FormatError);
    std::stringstream truncated(first.substr(0, first.size() / 2));
    EXPECT_THROW(read_dataset(truncated), FormatError);
}

TEST(Export, TrainingCsvWidths) {
    Dataset ds = synthetic_dataset(2);
    split_and_standardize(ds, 0.5, 1);
    const auto dir = std::filesystem::temp_directory_path() / "tscvx_export_test";
    std::filesystem::create_directories(dir);
    const std::string prefix = (dir / "train").string();
    export_training(ds, prefix);
    auto count_cols = [](const std::string& line) { return std::count(line.begin(), line.end(), ',') + 1; };
    std::ifstream tc(prefix + "_constraint.csv"), sc(prefix + "_solution.csv");
    std::string line;
    int rows = 0;
    std::getline(tc, line);
    EXPECT_EQ(count_cols(line), 4 + 16 + 350);
    while (std::getline(tc, line)) {
        EXPECT_EQ(count_cols(line), 370);
        ++rows;
    }
    EXPECT_EQ(rows, 16 * 3);
    std::getline(sc, line);
    EXPECT_EQ(count_cols(line), 3 + 16 + 851);
    EXPECT_TRUE(std::filesystem::exists(prefix + "_stats.json"));
    std::filesystem::remove_all(dir);
}

TEST(Baseline, ZerosAccuracy) {
    Sample s = synthetic(0, 1);
    s.tight_sets.resize(1);
    std::fill(s.tight_sets[0].bits.begin(), s.tight_sets[0].bits.end(), 0);
    for (int j = 0; j < 35; ++j) s.tight_sets[0].bits[j] = 1;
    EXPECT_DOUBLE_EQ(zeros_baseline_accuracy({&s}), 0.9);
    EXPECT_THROW(zeros_baseline_accuracy({}), EmptyDataset);
}

TEST(Generate, DeterministicAcrossThreadCounts) {
    GenerateOptions o;
    o.count = 3;
    o.seed = 77;
    o.threads = 1;
    GenerateStats st;
    const Dataset a = generate(o, ProblemInstance::nominal(), &st);
    o.threads = 3;
    const Dataset b = generate(o);
    std::stringstream sa, sb;
    write_dataset(sa, a);
    write_dataset(sb, b);
    EXPECT_EQ(sa.str(), sb.str());
    EXPECT_EQ(st.attempted, 3);
    EXPECT_EQ(st.converged + st.not_converged + st.dropped, 3);
    EXPECT_EQ(static_cast<int>(a.samples.size()), 8 * st.converged + st.not_converged);
    for (const auto& s : a.samples) {
        if (!s.converged) continue;
        EXPECT_FALSE(s.tight_sets.empty());
        EXPECT_EQ(s.solution.size(), 851);
    }
}

}  // namespace
}  // namespace tscvx
