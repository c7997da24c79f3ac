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

// tscvx command line: solve, gen, augment, bench, boxplot, export-training,
// verify-weights. Exit codes: 0 ok, 1 error, 2 not converged or failed
// check, 64 usage.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <fmt/core.h>
#include <nlohmann/json.hpp>

#include "tscvx/bench.hpp"
#include "tscvx/conic.hpp"
#include "tscvx/dataset.hpp"
#include "tscvx/errors.hpp"
#include "tscvx/warmstart.hpp"

namespace {

using json = nlohmann::json;
using namespace tscvx;

constexpr int kExitOk = 0;
constexpr int kExitIo = 1;
constexpr int kExitNotConverged = 2;
constexpr int kExitUsage = 64;

struct Globals {
    std::uint64_t seed = 1;
    int threads = 1;
    std::string config_path;
    json config = json::object();
    CLI::Option* seed_opt = nullptr;
    CLI::Option* threads_opt = nullptr;

    [[nodiscard]] json section(const std::string& name) const {
        return config.contains(name) && config[name].is_object() ? config[name] : json::object();
    }
};

// Value from the config section unless the flag was given on the command line.
template <typename T>
void from_config(const json& section, const char* key, const CLI::Option* opt, T& value) {
    if (opt && opt->count() > 0) return;
    if (!section.contains(key)) return;
    try {
        value = section.at(key).get<T>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("config key '") + key + "': " + e.what());
    }
}

void load_config(Globals& g) {
    if (g.config_path.empty()) return;
    std::ifstream in(g.config_path);
    if (!in) throw FormatError("cannot open config file '" + g.config_path + "'");
    try {
        g.config = json::parse(in);
    } catch (const json::parse_error& e) {
        throw FormatError(g.config_path + ": " + e.what());
    }
    from_config(g.config, "seed", g.seed_opt, g.seed);
    from_config(g.config, "threads", g.threads_opt, g.threads);
}

ProblemConstants config_constants(const Globals& g) {
    return constants_from_json(g.section("constants"));
}

void log_line(const std::string& m) { fmt::print(stderr, "{}\n", m); }

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << text;
}

struct PredictorFiles {
    std::string dataset;
    std::string tight_weights;
    std::string solution_weights;
};

std::unique_ptr<Predictor> load_predictor(const std::string& warm, const PredictorFiles& f, int n_nodes) {
    if (warm == "kdtree" || warm == "interp") {
        if (f.dataset.empty()) throw std::invalid_argument("--warm " + warm + " needs --dataset");
        const Dataset ds = load_dataset(f.dataset);
        if (warm == "kdtree") return std::make_unique<KdTreePredictor>(ds);
        return std::make_unique<InterpPredictor>(ds);
    }
    if (warm == "weights") {
        if (f.tight_weights.empty() || f.solution_weights.empty()) {
            throw std::invalid_argument("--warm weights needs --tight-weights and --solution-weights");
        }
        return std::make_unique<NnPredictor>(load_weights(f.tight_weights), load_weights(f.solution_weights),
                                             n_nodes);
    }
    return nullptr;
}

struct SolveArgs {
    std::string instance;
    std::string warm = "none";
    PredictorFiles files;
    std::string trace_dir;
    std::string out = "solve";
    CLI::Option *warm_opt = nullptr, *dataset_opt = nullptr, *tw_opt = nullptr, *sw_opt = nullptr,
                *out_opt = nullptr;
};

int cmd_solve(SolveArgs& a, const Globals& g) {
    const json sec = g.section("solve");
    from_config(sec, "warm", a.warm_opt, a.warm);
    from_config(sec, "dataset", a.dataset_opt, a.files.dataset);
    from_config(sec, "tight_weights", a.tw_opt, a.files.tight_weights);
    from_config(sec, "solution_weights", a.sw_opt, a.files.solution_weights);
    from_config(sec, "out", a.out_opt, a.out);

    const ProblemInstance inst = load_instance(a.instance, config_constants(g));
    if (!a.trace_dir.empty()) std::filesystem::create_directories(a.trace_dir);

    auto dump = [&](int k, const ConeProgram& p) {
        std::ofstream os(fmt::format("{}/subproblem_{:02d}.txt", a.trace_dir, k));
        write_text(os, p);
    };
    ScvxReport report;
    json extra = json::object();
    const auto predictor = load_predictor(a.warm, a.files, inst.constants.N);
    if (predictor) {
        WarmStartConfig cfg;
        if (!a.trace_dir.empty()) cfg.trace = dump;
        WarmStartReport w = warm_scvx(inst, *predictor, cfg);
        report = std::move(w.report);
        extra = {{"warm", a.warm}, {"fell_back", w.fell_back}, {"fallback_reason", w.fallback_reason},
                 {"predict_seconds", w.predict_seconds}};
    } else if (a.warm != "none") {
        throw std::invalid_argument("unknown --warm value " + a.warm);
    } else {
        ScvxOptions opts;
        if (!a.trace_dir.empty()) opts.trace = dump;
        report = scvx(inst, initial_guess(inst), PenaltyConfig::uniform(inst.constants.lambda),
                      TrustRegion::from_constants(inst.constants, inst.constants.eta_full_init), opts);
        extra = {{"warm", "none"}};
    }

    json j = to_json(report);
    j["warm_start"] = extra;
    write_file(a.out + "_report.json", j.dump(2) + "\n");
    write_file(a.out + "_trajectory.csv", to_csv(report.solution));
    fmt::print("{} after {} iterations ({:.3f} s), t_f = {:.4f}\n", to_string(report.status),
               report.iterations(), report.solve_seconds, report.solution.sigma);
    return report.status == ScvxStatus::Converged ? kExitOk : kExitNotConverged;
}

struct GenArgs {
    int count = 25;
    std::string ranges = "desk";
    bool no_augment = false;
    double split = 0.8;
    bool per_sample = false;
    std::string out = "dataset.jsonl";
    CLI::Option *count_opt = nullptr, *ranges_opt = nullptr, *split_opt = nullptr, *out_opt = nullptr;
};

int cmd_gen(GenArgs& a, const Globals& g) {
    const json sec = g.section("gen");
    from_config(sec, "count", a.count_opt, a.count);
    from_config(sec, "ranges", a.ranges_opt, a.ranges);
    from_config(sec, "split", a.split_opt, a.split);
    from_config(sec, "out", a.out_opt, a.out);
    if (!a.per_sample && sec.contains("per_sample")) a.per_sample = sec["per_sample"].get<bool>();
    if (!a.no_augment && sec.contains("augment")) a.no_augment = !sec["augment"].get<bool>();

    GenerateOptions o;
    o.count = a.count;
    o.seed = g.seed;
    o.threads = g.threads;
    o.augment = !a.no_augment;
    if (a.ranges == "wide") {
        o.ranges = SampleRanges::wide();
    } else if (a.ranges != "desk") {
        throw std::invalid_argument("--ranges must be desk or wide");
    }
    o.log = log_line;
    ProblemInstance base = ProblemInstance::nominal();
    base.constants = config_constants(g);
    GenerateStats st;
    Dataset ds = generate(o, base, &st);
    if (!ds.samples.empty()) split_and_standardize(ds, a.split, g.seed, a.per_sample);
    save_dataset(a.out, ds);
    fmt::print("{} draws: {} converged, {} not converged, {} dropped; {} samples written to {}\n", st.attempted,
               st.converged, st.not_converged, st.dropped, ds.samples.size(), a.out);
    return kExitOk;
}

int cmd_augment(const std::string& in, const std::string& out) {
    Dataset ds = load_dataset(in);
    const std::size_t before = ds.samples.size();
    augment(ds);
    save_dataset(out, ds);
    fmt::print("{} -> {} samples\n", before, ds.samples.size());
    return kExitOk;
}

struct BenchArgs {
    std::string dataset;
    std::vector<std::string> methods{"kdtree", "interp", "weights"};
    std::string tight_weights, solution_weights;
    bool no_ood = false;
    int solve = 0;
    int warmup = 2;
    std::string out = "bench";
    CLI::Option *methods_opt = nullptr, *tw_opt = nullptr, *sw_opt = nullptr, *solve_opt = nullptr,
                *out_opt = nullptr;
};

int cmd_bench(BenchArgs& a, const Globals& g) {
    const json sec = g.section("bench");
    from_config(sec, "methods", a.methods_opt, a.methods);
    from_config(sec, "tight_weights", a.tw_opt, a.tight_weights);
    from_config(sec, "solution_weights", a.sw_opt, a.solution_weights);
    from_config(sec, "solve", a.solve_opt, a.solve);
    from_config(sec, "out", a.out_opt, a.out);

    const Dataset ds = load_dataset(a.dataset);
    BenchOptions o;
    o.methods = a.methods;
    o.tight_weights = a.tight_weights;
    o.solution_weights = a.solution_weights;
    o.ood = !a.no_ood;
    o.solve_instances = a.solve;
    o.warmup = a.warmup;
    o.seed = g.seed;
    o.log = log_line;
    const BenchReport r = run_bench(ds, o);
    write_file(a.out + ".json", to_json(r).dump(1) + "\n");
    std::ofstream csv(a.out + ".csv");
    if (!csv) throw FormatError("cannot write '" + a.out + ".csv'");
    write_bench_csv(csv, r);
    fmt::print("zeros baseline accuracy {:.4f} on {} test samples\n", r.zeros_accuracy, r.n_test);
    for (const auto& m : r.methods) {
        if (m.skipped) {
            fmt::print("{:8s} skipped ({})\n", m.method, m.note);
            continue;
        }
        fmt::print("{:8s} tight acc {:.4f}  solution mse {:.4g}  tight {:.3f} ms  solution {:.3f} ms\n", m.method,
                   summarize(m.at("tight_accuracy")).mean, summarize(m.at("solution_mse")).mean,
                   summarize(m.at("tight_ms")).mean, summarize(m.at("solution_ms")).mean);
    }
    return kExitOk;
}

int cmd_boxplot(const std::vector<std::string>& reports, const std::string& out) {
    std::vector<BoxStats> rows;
    for (const auto& path : reports) {
        std::ifstream in(path);
        if (!in) throw FormatError("cannot open '" + path + "'");
        std::vector<BoxStats> part;
        if (std::filesystem::path(path).extension() == ".csv") {
            part = boxplot_csv(in);
        } else {
            try {
                part = boxplot(bench_from_json(json::parse(in)));
            } catch (const json::exception& e) {
                throw FormatError(path + ": " + e.what());
            }
        }
        const std::string tag = std::filesystem::path(path).stem().string();
        for (auto& b : part) b.series = tag + ":" + b.series;
        rows.insert(rows.end(), part.begin(), part.end());
    }
    if (out.empty() || out == "-") {
        write_box_csv(std::cout, rows);
    } else {
        std::ofstream os(out);
        if (!os) throw FormatError("cannot write '" + out + "'");
        write_box_csv(os, rows);
    }
    return kExitOk;
}

int cmd_export(const std::string& in, const std::string& prefix) {
    const Dataset ds = load_dataset(in);
    export_training(ds, prefix);
    fmt::print("wrote {0}_constraint.csv, {0}_solution.csv, {0}_stats.json\n", prefix);
    return kExitOk;
}

int cmd_verify(const std::string& path) {
    const WeightsCheck c = verify_weights(path);
    fmt::print("{}: {} tensors\n", path, c.tensors);
    for (const auto& name : c.checksum_failures) fmt::print("checksum mismatch: {}\n", name);
    if (!c.shape_error.empty()) fmt::print("shape error: {}\n", c.shape_error);
    fmt::print("{}\n", c.ok() ? "ok" : "FAILED");
    return c.ok() ? kExitOk : kExitNotConverged;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Successive convexification for 6-DoF powered descent guidance"};
    app.require_subcommand(1);
    Globals g;
    g.seed_opt = app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
    g.threads_opt = app.add_option("--threads", g.threads, "Worker threads")->capture_default_str();
    app.add_option("--config", g.config_path, "JSON config; command-line flags take precedence");

    SolveArgs sa;
    auto* solve = app.add_subcommand("solve", "Solve one instance");
    solve->add_option("instance", sa.instance, "Instance JSON")->required();
    sa.warm_opt = solve->add_option("--warm", sa.warm, "none, kdtree, interp or weights")
                      ->check(CLI::IsMember({"none", "kdtree", "interp", "weights"}));
    sa.dataset_opt = solve->add_option("--dataset", sa.files.dataset, "Dataset for kdtree/interp");
    sa.tw_opt = solve->add_option("--tight-weights", sa.files.tight_weights, "Constraint network weights");
    sa.sw_opt = solve->add_option("--solution-weights", sa.files.solution_weights, "Solution network weights");
    solve->add_option("--trace", sa.trace_dir, "Directory for per-iteration subproblem dumps");
    sa.out_opt = solve->add_option("--out", sa.out, "Output prefix")->capture_default_str();

    GenArgs ga;
    auto* gen = app.add_subcommand("gen", "Generate a labeled dataset");
    ga.count_opt = gen->add_option("--count", ga.count, "Base draws")->capture_default_str();
    ga.ranges_opt = gen->add_option("--ranges", ga.ranges, "desk or wide")->capture_default_str();
    gen->add_flag("--no-augment", ga.no_augment, "Skip the rotated copies");
    ga.split_opt = gen->add_option("--split", ga.split, "Train fraction")->capture_default_str();
    gen->add_flag("--per-sample-split", ga.per_sample, "Split per sample instead of per rotation group");
    ga.out_opt = gen->add_option("--out", ga.out, "Dataset file")->capture_default_str();

    std::string aug_in, aug_out;
    auto* aug = app.add_subcommand("augment", "Add rotated copies to a dataset");
    aug->add_option("dataset", aug_in)->required();
    aug->add_option("--out", aug_out)->required();

    BenchArgs ba;
    auto* bench = app.add_subcommand("bench", "Benchmark predictors on a dataset");
    bench->add_option("dataset", ba.dataset)->required();
    ba.methods_opt = bench->add_option("--methods", ba.methods, "kdtree, interp, weights")->delimiter(',');
    ba.tw_opt = bench->add_option("--tight-weights", ba.tight_weights);
    ba.sw_opt = bench->add_option("--solution-weights", ba.solution_weights);
    bench->add_flag("--no-ood", ba.no_ood, "Skip the Mahalanobis split");
    ba.solve_opt = bench->add_option("--solve", ba.solve, "Test instances solved cold and warm")->capture_default_str();
    bench->add_option("--warmup", ba.warmup, "Discarded timing trials")->capture_default_str();
    ba.out_opt = bench->add_option("--out", ba.out, "Output prefix (.json, .csv)")->capture_default_str();

    std::vector<std::string> box_in;
    std::string box_out;
    auto* box = app.add_subcommand("boxplot", "Quartiles and whiskers from bench reports");
    box->add_option("reports", box_in, "Bench .json or .csv files")->required();
    box->add_option("--out", box_out, "CSV file (stdout by default)");

    std::string exp_in, exp_out = "train";
    auto* exp = app.add_subcommand("export-training", "Write trainer CSV files");
    exp->add_option("dataset", exp_in)->required();
    exp->add_option("--out", exp_out, "Output prefix")->capture_default_str();

    std::string weights_path;
    auto* verify = app.add_subcommand("verify-weights", "Check a TSCX weights file");
    verify->add_option("weights", weights_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kExitUsage;
    }

    try {
        load_config(g);
        if (*solve) return cmd_solve(sa, g);
        if (*gen) return cmd_gen(ga, g);
        if (*aug) return cmd_augment(aug_in, aug_out);
        if (*bench) return cmd_bench(ba, g);
        if (*box) return cmd_boxplot(box_in, box_out);
        if (*exp) return cmd_export(exp_in, exp_out);
        if (*verify) return cmd_verify(weights_path);
    } catch (const std::exception& e) {
        fmt::print(stderr, "error: {}\n", e.what());
        return kExitIo;
    }
    return kExitIo;
}
