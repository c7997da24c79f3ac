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

#ifndef TSCVX_BENCH_HPP
#define TSCVX_BENCH_HPP

#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tscvx/dataset.hpp"
#include "tscvx/neighbors.hpp"

namespace tscvx {

/// Box-plot row. Quartiles by linear interpolation between closest ranks;
/// whiskers are the most extreme samples inside Q1 - 1.5 IQR, Q3 + 1.5 IQR.
struct BoxStats {
    std::string series;
    int n = 0;
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
    double whisker_lo = 0.0, whisker_hi = 0.0;
    double mean = 0.0, std = 0.0;
};
BoxStats box_stats(const std::string& series, const std::vector<double>& values);

/// Raw per-trial arrays of one predictor. Times in ms, solve times in s,
/// errors are per test sample mean squared errors, memory in bytes.
struct MethodBench {
    std::string method;
    bool skipped = false;
    std::string note;
    std::map<std::string, std::vector<double>> series;

    [[nodiscard]] const std::vector<double>& at(const std::string& key) const;
};

struct BenchReport {
    std::uint64_t seed = 0;
    int n_train = 0;
    int n_test = 0;
    double ood_threshold = 0.0;
    std::vector<int> ood;  // indices into the converged test samples
    double zeros_accuracy = 0.0;
    std::map<std::string, std::vector<double>> cold;  // cold SCvx solve_s / iterations
    std::vector<MethodBench> methods;
};

struct BenchOptions {
    std::vector<std::string> methods{"kdtree", "interp"};
    std::string tight_weights;
    std::string solution_weights;
    bool ood = true;
    /// Test instances also solved cold and with T-SCvx per method.
    int solve_instances = 0;
    int warmup = 2;
    std::uint64_t seed = 1;
    std::function<void(const std::string&)> log;
};

/// Fits each method on the train split and evaluates it on the converged
/// test samples. A weights method with missing files is skipped.
BenchReport run_bench(const Dataset& ds, const BenchOptions& opts);

/// Summaries (mean, median, std) are written next to every raw array.
nlohmann::json to_json(const BenchReport& r);
BenchReport bench_from_json(const nlohmann::json& j);

/// Long format: method,metric,index,value.
void write_bench_csv(std::ostream& os, const BenchReport& r);

/// One row per method and metric, series named "method/metric".
std::vector<BoxStats> boxplot(const BenchReport& r);
/// Same rows from a long-format CSV.
std::vector<BoxStats> boxplot_csv(std::istream& is);
void write_box_csv(std::ostream& os, const std::vector<BoxStats>& rows);

}  // namespace tscvx

#endif  // TSCVX_BENCH_HPP
