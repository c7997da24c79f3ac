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

#include "tscvx/bench.hpp"

#include <chrono>
#include <filesystem>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <sstream>

#include "tscvx/errors.hpp"
#include "tscvx/memtrack.hpp"
#include "tscvx/warmstart.hpp"

namespace tscvx {

using json = nlohmann::json;

BoxStats box_stats(const std::string& series, const std::vector<double>& v) {
    const Summary s = summarize(v);
    BoxStats b;
    b.series = series;
    b.n = s.n;
    b.min = s.min;
    b.q1 = s.q1;
    b.median = s.median;
    b.q3 = s.q3;
    b.max = s.max;
    b.mean = s.mean;
    b.std = s.std;
    const double iqr = s.q3 - s.q1;
    const double lo = s.q1 - 1.5 * iqr, hi = s.q3 + 1.5 * iqr;
    b.whisker_lo = s.max;
    b.whisker_hi = s.min;
    for (double x : v) {
        if (x >= lo) b.whisker_lo = std::min(b.whisker_lo, x);
        if (x <= hi) b.whisker_hi = std::max(b.whisker_hi, x);
    }
    return b;
}

const std::vector<double>& MethodBench::at(const std::string& key) const {
    const auto it = series.find(key);
    if (it == series.end()) throw std::out_of_range("no series " + key + " for method " + method);
    return it->second;
}

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::unique_ptr<Predictor> make_predictor(const std::string& method, const Dataset& ds, const BenchOptions& o,
                                          std::string& skip) {
    if (method == "kdtree") return std::make_unique<KdTreePredictor>(ds);
    if (method == "interp") return std::make_unique<InterpPredictor>(ds);
    if (method == "weights") {
        for (const auto& p : {o.tight_weights, o.solution_weights}) {
            if (p.empty() || !std::filesystem::exists(p)) {
                skip = "weights file missing: " + (p.empty() ? std::string("(not given)") : p);
                return nullptr;
            }
        }
        return std::make_unique<NnPredictor>(load_weights(o.tight_weights), load_weights(o.solution_weights),
                                             ds.n_nodes);
    }
    throw std::invalid_argument("unknown bench method " + method);
}

double tight_error(const TightSet& pred, const TightSet& label) {
    if (pred.bits.size() != label.bits.size()) throw ShapeMismatch("predicted tight set width differs from label");
    std::size_t wrong = 0;
    for (std::size_t j = 0; j < pred.bits.size(); ++j) wrong += pred.bits[j] != label.bits[j];
    return static_cast<double>(wrong) / static_cast<double>(pred.bits.size());
}

json series_json(const std::vector<double>& v) {
    json j{{"values", v}, {"n", v.size()}};
    if (v.empty()) {
        j["mean"] = j["median"] = j["std"] = nullptr;
    } else {
        const Summary s = summarize(v);
        j["mean"] = s.mean;
        j["median"] = s.median;
        j["std"] = s.std;
    }
    return j;
}

json map_json(const std::map<std::string, std::vector<double>>& m) {
    json j = json::object();
    for (const auto& [k, v] : m) j[k] = series_json(v);
    return j;
}

std::map<std::string, std::vector<double>> map_from_json(const json& j) {
    std::map<std::string, std::vector<double>> m;
    for (const auto& [k, v] : j.items()) m[k] = v.at("values").get<std::vector<double>>();
    return m;
}

}  // namespace

BenchReport run_bench(const Dataset& ds, const BenchOptions& o) {
    const auto train = ds.select(Split::Train);
    const auto test = ds.select(Split::Test);
    if (train.empty() || test.empty()) throw EmptyDataset("benchmark needs converged train and test samples");
    auto log = [&](const std::string& m) {
        if (o.log) o.log(m);
    };

    BenchReport r;
    r.seed = o.seed;
    r.n_train = static_cast<int>(train.size());
    r.n_test = static_cast<int>(test.size());
    r.zeros_accuracy = zeros_baseline_accuracy(test);
    if (o.ood) {
        const auto split = mahalanobis_split(ds.params_matrix(train), ds.params_matrix(test));
        r.ood_threshold = split.threshold;
        r.ood = split.ood;
    }

    std::vector<const Sample*> solve_set;
    if (o.solve_instances > 0) {
        const int n = std::min<int>(o.solve_instances, static_cast<int>(test.size()));
        for (int i = 0; i < n; ++i) solve_set.push_back(test[static_cast<std::size_t>(i) * test.size() / n]);
        for (const auto* s : solve_set) {
            const ScvxReport rep = scvx(instance_from_params(s->params));
            r.cold["solve_s"].push_back(rep.solve_seconds);
            r.cold["iterations"].push_back(rep.iterations());
            r.cold["converged"].push_back(rep.status == ScvxStatus::Converged ? 1.0 : 0.0);
        }
    }

    for (const auto& method : o.methods) {
        MethodBench mb;
        mb.method = method;
        std::unique_ptr<Predictor> p;
        try {
            p = make_predictor(method, ds, o, mb.note);
        } catch (const Error& e) {
            mb.note = e.what();
        }
        if (!p) {
            mb.skipped = true;
            log("skipping " + method + ": " + mb.note);
            r.methods.push_back(std::move(mb));
            continue;
        }
        auto& S = mb.series;
        for (const char* key : {"tight_ms", "solution_ms", "tight_peak_bytes", "solution_peak_bytes", "tight_mse",
                                "tight_accuracy", "solution_mse", "tight_ood_mse", "solution_ood_mse"}) {
            S[key];
        }
        std::vector<bool> is_ood(test.size(), false);
        for (int i : r.ood) is_ood[i] = true;
        for (std::size_t i = 0; i < test.size(); ++i) {
            const Sample& s = *test[i];
            auto t0 = Clock::now();
            memtrack::PeakScope mem_t;
            const TightSet t1 = p->predict_tight(s.params, 1);
            const double tight_ms = ms_since(t0);
            const auto tight_peak = static_cast<double>(mem_t.peak_bytes());

            t0 = Clock::now();
            memtrack::PeakScope mem_s;
            const Eigen::VectorXd z = p->predict_solution(s.params);
            const double sol_ms = ms_since(t0);
            const auto sol_peak = static_cast<double>(mem_s.peak_bytes());
            if (static_cast<int>(i) >= o.warmup) {
                S["tight_ms"].push_back(tight_ms);
                S["solution_ms"].push_back(sol_ms);
                S["tight_peak_bytes"].push_back(tight_peak);
                S["solution_peak_bytes"].push_back(sol_peak);
            }

            double te = s.tight_sets.empty() ? 0.0 : tight_error(t1, s.tight_sets.front());
            for (std::size_t k = 1; k < s.tight_sets.size(); ++k) {
                te += tight_error(p->predict_tight(s.params, static_cast<int>(k) + 1), s.tight_sets[k]);
            }
            if (!s.tight_sets.empty()) te /= static_cast<double>(s.tight_sets.size());
            if (z.size() != s.solution.size()) throw ShapeMismatch("predicted solution width differs from label");
            const double se = (z - s.solution).squaredNorm() / static_cast<double>(z.size());
            S["tight_mse"].push_back(te);
            S["tight_accuracy"].push_back(1.0 - te);
            S["solution_mse"].push_back(se);
            if (is_ood[i]) {
                S["tight_ood_mse"].push_back(te);
                S["solution_ood_mse"].push_back(se);
            }
        }
        for (const auto* s : solve_set) {
            const WarmStartReport w = warm_scvx(instance_from_params(s->params), *p);
            S["solve_s"].push_back(w.report.solve_seconds + w.predict_seconds);
            S["iterations"].push_back(w.report.iterations());
            S["converged"].push_back(w.report.status == ScvxStatus::Converged ? 1.0 : 0.0);
        }
        log(method + ": done");
        r.methods.push_back(std::move(mb));
    }
    return r;
}

json to_json(const BenchReport& r) {
    json methods = json::array();
    for (const auto& m : r.methods) {
        methods.push_back({{"method", m.method}, {"skipped", m.skipped}, {"note", m.note}, {"series", map_json(m.series)}});
    }
    return {{"format", "tscvx-bench"},
            {"version", 1},
            {"seed", r.seed},
            {"n_train", r.n_train},
            {"n_test", r.n_test},
            {"ood_threshold", r.ood_threshold},
            {"ood", r.ood},
            {"zeros_accuracy", r.zeros_accuracy},
            {"cold", map_json(r.cold)},
            {"methods", methods}};
}

BenchReport bench_from_json(const json& j) {
    if (j.value("format", "") != "tscvx-bench") throw FormatError("not a tscvx bench report");
    BenchReport r;
    r.seed = j.at("seed").get<std::uint64_t>();
    r.n_train = j.at("n_train").get<int>();
    r.n_test = j.at("n_test").get<int>();
    r.ood_threshold = j.at("ood_threshold").get<double>();
    r.ood = j.at("ood").get<std::vector<int>>();
    r.zeros_accuracy = j.at("zeros_accuracy").get<double>();
    r.cold = map_from_json(j.at("cold"));
    for (const auto& m : j.at("methods")) {
        MethodBench mb;
        mb.method = m.at("method").get<std::string>();
        mb.skipped = m.at("skipped").get<bool>();
        mb.note = m.at("note").get<std::string>();
        mb.series = map_from_json(m.at("series"));
        r.methods.push_back(std::move(mb));
    }
    return r;
}

void write_bench_csv(std::ostream& os, const BenchReport& r) {
    os << "method,metric,index,value\n";
    os.precision(17);
    auto rows = [&](const std::string& method, const std::map<std::string, std::vector<double>>& m) {
        for (const auto& [k, v] : m) {
            for (std::size_t i = 0; i < v.size(); ++i) os << method << ',' << k << ',' << i << ',' << v[i] << '\n';
        }
    };
    rows("cold", r.cold);
    for (const auto& m : r.methods) rows(m.method, m.series);
}

std::vector<BoxStats> boxplot(const BenchReport& r) {
    std::vector<BoxStats> out;
    auto add = [&](const std::string& method, const std::map<std::string, std::vector<double>>& m) {
        for (const auto& [k, v] : m) {
            if (!v.empty()) out.push_back(box_stats(method + "/" + k, v));
        }
    };
    add("cold", r.cold);
    for (const auto& m : r.methods) add(m.method, m.series);
    return out;
}

std::vector<BoxStats> boxplot_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "method,metric,index,value") throw FormatError("not a bench CSV");
    std::vector<std::string> order;
    std::map<std::string, std::vector<double>> series;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string method, metric, index, value;
        if (!std::getline(ss, method, ',') || !std::getline(ss, metric, ',') || !std::getline(ss, index, ',') ||
            !std::getline(ss, value)) {
            throw FormatError("bench CSV line " + std::to_string(lineno) + " has fewer than 4 fields");
        }
        const std::string key = method + "/" + metric;
        if (!series.count(key)) order.push_back(key);
        try {
            series[key].push_back(std::stod(value));
        } catch (const std::exception&) {
            throw FormatError("bench CSV line " + std::to_string(lineno) + ": bad value " + value);
        }
    }
    std::vector<BoxStats> out;
    for (const auto& key : order) out.push_back(box_stats(key, series[key]));
    return out;
}

void write_box_csv(std::ostream& os, const std::vector<BoxStats>& rows) {
    os << "series,n,min,q1,median,q3,max,whisker_lo,whisker_hi,mean,std\n";
    os.precision(17);
    for (const auto& b : rows) {
        os << b.series << ',' << b.n << ',' << b.min << ',' << b.q1 << ',' << b.median << ',' << b.q3 << ','
           << b.max << ',' << b.whisker_lo << ',' << b.whisker_hi << ',' << b.mean << ',' << b.std << '\n';
    }
}

}  // namespace tscvx
