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

#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "tscvx/bench.hpp"
#include "tscvx/errors.hpp"
#include "tscvx/memtrack.hpp"

namespace tscvx {
namespace {

Sample labeled(int base, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Sample s;
    s.id = 8 * base;
    s.base_id = base;
    s.converged = true;
    s.params = sample_params(rng, SampleRanges::desk());
    s.solution.resize(solution_width(50));
    for (int i = 0; i < s.solution.size(); ++i) s.solution(i) = u(rng);
    for (int k = 1; k <= 2; ++k) {
        TightSet t;
        t.iteration = k;
        t.bits.assign(350, 0);
        for (int j = base % 7; j < 350; j += 9 + k) t.bits[j] = 1;
        s.tight_sets.push_back(t);
    }
    return s;
}

Dataset self_contained(int n) {
    std::mt19937_64 rng(8);
    Dataset ds;
    for (int i = 0; i < n; ++i) ds.samples.push_back(labeled(i, rng));
    for (auto& s : ds.samples) s.split = Split::Train;
    for (int i = 0; i < n / 2; ++i) {
        Sample copy = ds.samples[i];
        copy.base_id += n;
        copy.id = 8 * copy.base_id;
        copy.split = Split::Test;
        ds.samples.push_back(copy);
    }
    ds.stats = Standardization::fit(ds.params_matrix(ds.select(Split::Train)));
    return ds;
}

TEST(BoxStats, PinnedQuartileRule) {
    const auto b = box_stats("x", {1, 2, 3, 4, 5});
    EXPECT_EQ(b.q1, 2.0);
    EXPECT_EQ(b.median, 3.0);
    EXPECT_EQ(b.q3, 4.0);
    EXPECT_EQ(b.whisker_lo, 1.0);
    EXPECT_EQ(b.whisker_hi, 5.0);
    const auto one = box_stats("y", {2.5});
    EXPECT_EQ(one.min, 2.5);
    EXPECT_EQ(one.q1, 2.5);
    EXPECT_EQ(one.median, 2.5);
    EXPECT_EQ(one.q3, 2.5);
    EXPECT_EQ(one.max, 2.5);
    const auto out = box_stats("z", {1, 2, 3, 4, 100});
    EXPECT_EQ(out.whisker_hi, 4.0);
    EXPECT_EQ(out.max, 100.0);
    EXPECT_THROW(box_stats("e", {}), EmptyDataset);
}

TEST(Memtrack, SeesEigenAllocations) {
    memtrack::PeakScope scope;
    {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(200, 200);
        EXPECT_EQ(m.sum(), 0.0);
    }
    EXPECT_GE(scope.peak_bytes(), 200 * 200 * 8);
}

TEST(Bench, SelfRecallAndReportRoundTrip) {
    const Dataset ds = self_contained(40);
    BenchOptions o;
    o.methods = {"kdtree", "interp", "weights"};
    o.tight_weights = "/nonexistent/tight.tscx";
    std::vector<std::string> logs;
    o.log = [&](const std::string& m) { logs.push_back(m); };
    const BenchReport r = run_bench(ds, o);
    ASSERT_EQ(r.methods.size(), 3u);
    EXPECT_EQ(r.n_train, 40);
    EXPECT_EQ(r.n_test, 20);

    const auto& kd = r.methods[0];
    for (double e : kd.at("solution_mse")) EXPECT_EQ(e, 0.0);
    for (double e : kd.at("tight_mse")) EXPECT_EQ(e, 0.0);
    EXPECT_EQ(kd.at("tight_ms").size(), 18u);
    for (double e : r.methods[1].at("solution_mse")) EXPECT_EQ(e, 0.0);
    EXPECT_TRUE(r.methods[2].skipped);
    EXPECT_FALSE(logs.empty());
    EXPECT_GT(r.zeros_accuracy, 0.8);

    const nlohmann::json j = to_json(r);
    const auto& v = kd.at("tight_ms");
    EXPECT_EQ(j["methods"][0]["series"]["tight_ms"]["mean"].get<double>(), summarize(v).mean);
    double plain = 0.0;
    for (double x : v) plain += x;
    EXPECT_NEAR(j["methods"][0]["series"]["tight_ms"]["mean"].get<double>(), plain / v.size(), 1e-12);

    const BenchReport back = bench_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(back.methods[0].series, r.methods[0].series);
    EXPECT_EQ(back.ood, r.ood);

    std::stringstream csv;
    write_bench_csv(csv, r);
    const auto from_csv = boxplot_csv(csv);
    const auto direct = boxplot(r);
    ASSERT_EQ(from_csv.size(), direct.size());
    for (std::size_t i = 0; i < direct.size(); ++i) {
        EXPECT_EQ(from_csv[i].series, direct[i].series);
        EXPECT_EQ(from_csv[i].q1, direct[i].q1);
        EXPECT_EQ(from_csv[i].median, direct[i].median);
        EXPECT_EQ(from_csv[i].q3, direct[i].q3);
    }
    std::stringstream bad("a,b\n");
    EXPECT_THROW(boxplot_csv(bad), FormatError);
}

TEST(Bench, NeedsBothSplits) {
    Dataset ds = self_contained(10);
    for (auto& s : ds.samples) s.split = Split::Train;
    EXPECT_THROW(run_bench(ds, {}), EmptyDataset);
}

}  // namespace
}  // namespace tscvx
