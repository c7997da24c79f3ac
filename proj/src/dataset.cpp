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

#include "tscvx/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "tscvx/errors.hpp"
#include "tscvx/quaternion.hpp"
#include "tscvx/symmetry.hpp"

namespace tscvx {

using json = nlohmann::json;

const std::array<std::string_view, kParamDim> kParamNames{
    "r0_up", "r0_east", "r0_north", "v0_up", "v0_east", "v0_north", "q0_w", "q0_x",
    "q0_y",  "q0_z",    "w0_x",     "w0_y",  "w0_z",    "m0",       "theta_max", "gamma_gs"};

Eigen::VectorXd param_vector(const ProblemInstance& inst) {
    Eigen::VectorXd p(kParamDim);
    p << inst.x0.r_I, inst.x0.v_I, inst.x0.q_BI, inst.x0.w_B, inst.x0.m, inst.theta_max, inst.gamma_gs;
    return p;
}

ProblemInstance instance_from_params(const Eigen::VectorXd& p, const ProblemInstance& base) {
    if (p.size() != kParamDim) {
        throw std::invalid_argument("parameter vector needs " + std::to_string(kParamDim) + " entries");
    }
    ProblemInstance inst = base;
    inst.x0.r_I = p.segment<3>(0);
    inst.x0.v_I = p.segment<3>(3);
    inst.x0.q_BI = quat::normalized(p.segment<4>(6));
    inst.x0.w_B = p.segment<3>(10);
    inst.x0.m = p(13);
    inst.theta_max = p(14);
    inst.gamma_gs = p(15);
    return inst;
}

Eigen::VectorXd constraint_input(const Eigen::VectorXd& params, int k) {
    Eigen::VectorXd x(params.size() + 1);
    x << params, static_cast<double>(k);
    return x;
}

Eigen::VectorXd encode_solution(const Trajectory& t) {
    const int n = t.n_nodes();
    Eigen::VectorXd z(solution_width(n));
    for (int i = 0; i < n; ++i) {
        z.segment<kStateDim>(i * (kStateDim + kControlDim)) = t.X.col(i);
        z.segment<kControlDim>(i * (kStateDim + kControlDim) + kStateDim) = t.U.col(i);
    }
    z(z.size() - 1) = t.sigma;
    return z;
}

Trajectory decode_solution(const Eigen::VectorXd& z, const ProblemInstance& inst) {
    const auto& c = inst.constants;
    if (z.size() != solution_width(c.N)) {
        throw ShapeMismatch("solution vector of width " + std::to_string(z.size()) + ", expected " +
                            std::to_string(solution_width(c.N)));
    }
    Trajectory t(c.N);
    for (int i = 0; i < c.N; ++i) {
        t.X.col(i) = z.segment<kStateDim>(i * (kStateDim + kControlDim));
        t.U.col(i) = z.segment<kControlDim>(i * (kStateDim + kControlDim) + kStateDim);
        t.X(sx::m, i) = std::clamp(t.X(sx::m, i), c.m_dry, std::max(c.m_dry, inst.x0.m));
    }
    t.normalize_quaternions();
    t.sigma = std::clamp(z(z.size() - 1), c.sigma_min, c.t_f_max);
    return t;
}

SampleRanges SampleRanges::wide() {
    SampleRanges r;
    r.gamma_lo = 0.0;
    r.gamma_hi = deg2rad(90.0);
    r.theta_lo = 0.0;
    r.theta_hi = deg2rad(359.4);
    r.r_lo = {0.003, 0.0, 0.0};
    r.r_hi = {9.997, 13.83, 13.83};
    r.v_lo = {-1.998, -2.779, -2.779};
    r.v_hi = {-0.001, 2.779, 2.779};
    r.q_lo = {-0.996, -1.0, -1.0, -1.0};
    r.q_hi = {1.0, 1.0, 1.0, 0.999};
    r.w_lo = Eigen::Vector3d(-89.98, -123.49, -123.49) * deg2rad(1.0);
    r.w_hi = Eigen::Vector3d(89.70, 123.49, 123.49) * deg2rad(1.0);
    r.m_lo = 0.003;
    r.m_hi = 3.0;
    return r;
}

SampleRanges SampleRanges::desk() {
    SampleRanges r;
    r.gamma_lo = deg2rad(5.0);
    r.gamma_hi = deg2rad(30.0);
    r.theta_lo = deg2rad(45.0);
    r.theta_hi = deg2rad(120.0);
    r.r_lo = {3.0, 0.0, 0.0};
    r.r_hi = {6.0, 3.0, 3.0};
    r.v_lo = {-1.5, -0.8, -0.8};
    r.v_hi = {-0.5, 0.8, 0.8};
    r.q_lo = {1.0, -0.2, -0.2, -0.2};
    r.q_hi = {1.0, 0.2, 0.2, 0.2};
    r.w_lo = Eigen::Vector3d(0.0, -10.0, -10.0) * deg2rad(1.0);
    r.w_hi = Eigen::Vector3d(0.0, 10.0, 10.0) * deg2rad(1.0);
    r.m_lo = 2.2;
    r.m_hi = 3.0;
    return r;
}

Eigen::VectorXd sample_params(std::mt19937_64& rng, const SampleRanges& R) {
    auto U = [&](double lo, double hi) {
        return lo == hi ? lo : std::uniform_real_distribution<double>(lo, hi)(rng);
    };
    ProblemInstance inst;
    for (int a = 0; a < 3; ++a) inst.x0.r_I(a) = U(R.r_lo(a), R.r_hi(a));
    for (int a = 0; a < 3; ++a) inst.x0.v_I(a) = U(R.v_lo(a), R.v_hi(a));
    Eigen::Vector4d q;
    for (int a = 0; a < 4; ++a) q(a) = U(R.q_lo(a), R.q_hi(a));
    inst.x0.q_BI = quat::normalized(q);
    for (int a = 0; a < 3; ++a) inst.x0.w_B(a) = U(R.w_lo(a), R.w_hi(a));
    inst.x0.m = U(R.m_lo, R.m_hi);
    inst.theta_max = U(R.theta_lo, R.theta_hi);
    inst.gamma_gs = U(R.gamma_lo, R.gamma_hi);
    return param_vector(inst);
}

Eigen::VectorXd sample_params(std::uint64_t seed, const SampleRanges& ranges) {
    std::mt19937_64 rng(seed);
    return sample_params(rng, ranges);
}

std::string_view to_string(Split s) {
    switch (s) {
        case Split::None: return "none";
        case Split::Train: return "train";
        case Split::Test: return "test";
    }
    return "none";
}

namespace {

Split split_from_string(const std::string& s) {
    if (s == "train") return Split::Train;
    if (s == "test") return Split::Test;
    if (s == "none") return Split::None;
    throw FormatError("unknown split tag " + s);
}

}  // namespace

const TightSet& Sample::tight_at(int k) const {
    if (tight_sets.empty()) throw EmptyDataset("sample " + std::to_string(id) + " has no tight sets");
    const int i = std::clamp(k, 1, static_cast<int>(tight_sets.size())) - 1;
    return tight_sets[i];
}

Eigen::VectorXd Standardization::apply(const Eigen::VectorXd& x) const {
    return (x - mean).cwiseQuotient(std);
}

Standardization Standardization::fit(const Eigen::MatrixXd& X) {
    if (X.rows() == 0) throw EmptyDataset("standardization of an empty split");
    Standardization s;
    s.mean = X.colwise().mean().transpose();
    s.std.resize(X.cols());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const double var = X.rows() > 1 ? (X.col(j).array() - s.mean(j)).square().sum() / (X.rows() - 1) : 0.0;
        s.std(j) = var > 1e-24 ? std::sqrt(var) : 1.0;
    }
    return s;
}

std::vector<const Sample*> Dataset::select(Split s, bool converged_only) const {
    std::vector<const Sample*> out;
    for (const auto& x : samples) {
        if ((s == Split::None || x.split == s) && (!converged_only || x.converged)) out.push_back(&x);
    }
    return out;
}

Eigen::MatrixXd Dataset::params_matrix(const std::vector<const Sample*>& rows) const {
    Eigen::MatrixXd X(rows.size(), kParamDim);
    for (std::size_t i = 0; i < rows.size(); ++i) X.row(i) = rows[i]->params.transpose();
    return X;
}

Sample rotate_sample(const Sample& s, double phi) {
    Sample out = s;
    out.rotation_deg = s.rotation_deg + phi * 180.0 / std::numbers::pi;
    if (phi == 0.0) return out;
    const ProblemInstance inst = rotate_instance(instance_from_params(s.params), phi);
    out.params = param_vector(inst);
    out.params.segment<4>(6) = rotate_attitude(s.params.segment<4>(6), phi);
    if (s.solution.size() > 0) {
        const int stride = kStateDim + kControlDim;
        const int n = static_cast<int>((s.solution.size() - 1) / stride);
        for (int i = 0; i < n; ++i) {
            out.solution.segment<kStateDim>(i * stride) =
                rotate_state(s.solution.segment<kStateDim>(i * stride), phi);
            out.solution.segment<kControlDim>(i * stride + kStateDim) =
                rotate_control(s.solution.segment<kControlDim>(i * stride + kStateDim), phi);
        }
    }
    return out;
}

void augment(Dataset& ds) {
    std::vector<Sample> out;
    for (const auto& s : ds.samples) {
        out.push_back(s);
        if (!s.converged || s.rotation_deg != 0.0) continue;
        for (std::size_t j = 1; j < kRotationAnglesDeg.size(); ++j) {
            Sample r = rotate_sample(s, deg2rad(kRotationAnglesDeg[j]));
            r.rotation_deg = kRotationAnglesDeg[j];
            r.id = 8 * s.base_id + static_cast<int>(j);
            out.push_back(std::move(r));
        }
    }
    ds.samples = std::move(out);
}

Dataset generate(const GenerateOptions& opts, const ProblemInstance& base, GenerateStats* stats) {
    if (opts.count < 0) throw std::invalid_argument("sample count must be nonnegative");
    std::vector<std::optional<Sample>> slots(opts.count);
    std::vector<std::string> errors(opts.count);
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int i = next++; i < opts.count; i = next++) {
            std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                              static_cast<std::uint32_t>(i)};
            std::mt19937_64 rng(seq);
            Sample s;
            s.id = 8 * i;
            s.base_id = i;
            s.params = sample_params(rng, opts.ranges);
            try {
                const ProblemInstance inst = instance_from_params(s.params, base);
                const ScvxReport rep = scvx(inst);
                s.converged = rep.status == ScvxStatus::Converged;
                s.iterations = rep.iterations();
                s.tight_sets = rep.accepted_tight_sets();
                s.solution = encode_solution(rep.solution);
                slots[i] = std::move(s);
            } catch (const std::exception& e) {
                errors[i] = e.what();
            }
        }
    };
    const int nt = std::max(1, std::min(opts.threads, opts.count));
    std::vector<std::thread> pool;
    for (int t = 1; t < nt; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    GenerateStats st;
    Dataset ds;
    ds.n_nodes = base.constants.N;
    for (int i = 0; i < opts.count; ++i) {
        ++st.attempted;
        if (!slots[i]) {
            ++st.dropped;
            if (opts.log) opts.log("sample " + std::to_string(i) + " dropped: " + errors[i]);
            continue;
        }
        if (slots[i]->converged) {
            ++st.converged;
        } else {
            ++st.not_converged;
            if (opts.log) opts.log("sample " + std::to_string(i) + " did not converge");
        }
        ds.samples.push_back(std::move(*slots[i]));
    }
    if (opts.augment) augment(ds);
    if (stats) *stats = st;
    return ds;
}

void split_and_standardize(Dataset& ds, double ratio, std::uint64_t seed, bool per_sample) {
    if (ds.samples.empty()) throw EmptyDataset("cannot split an empty dataset");
    if (!(ratio > 0.0 && ratio < 1.0)) throw std::invalid_argument("split ratio must lie in (0, 1)");
    std::mt19937_64 rng(seed);
    if (per_sample) {
        std::vector<int> order(ds.samples.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        const auto n_train = static_cast<std::size_t>(std::lround(ratio * static_cast<double>(order.size())));
        for (std::size_t i = 0; i < order.size(); ++i) {
            ds.samples[order[i]].split = i < n_train ? Split::Train : Split::Test;
        }
    } else {
        std::set<int> group_set;
        for (const auto& s : ds.samples) group_set.insert(s.base_id);
        std::vector<int> groups(group_set.begin(), group_set.end());
        std::shuffle(groups.begin(), groups.end(), rng);
        const auto n_train = static_cast<std::size_t>(std::lround(ratio * static_cast<double>(groups.size())));
        std::map<int, Split> tag;
        for (std::size_t i = 0; i < groups.size(); ++i) tag[groups[i]] = i < n_train ? Split::Train : Split::Test;
        for (auto& s : ds.samples) s.split = tag[s.base_id];
    }
    auto train = ds.select(Split::Train);
    if (train.empty()) train = ds.select(Split::Train, false);
    ds.stats = Standardization::fit(ds.params_matrix(train));
}

namespace {

json vec_json(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd json_vec(const json& j) {
    const auto v = j.get<std::vector<double>>();
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json sample_json(const Sample& s) {
    json tight = json::array();
    for (const auto& t : s.tight_sets) {
        std::vector<int> on;
        for (std::size_t j = 0; j < t.bits.size(); ++j) {
            if (t.bits[j]) on.push_back(static_cast<int>(j));
        }
        tight.push_back({{"iteration", t.iteration}, {"rows", on}});
    }
    return {{"id", s.id},
            {"base_id", s.base_id},
            {"rotation_deg", s.rotation_deg},
            {"split", std::string(to_string(s.split))},
            {"converged", s.converged},
            {"iterations", s.iterations},
            {"params", vec_json(s.params)},
            {"tight", tight},
            {"solution", vec_json(s.solution)}};
}

Sample sample_from_json(const json& j, int width) {
    Sample s;
    s.id = j.at("id").get<int>();
    s.base_id = j.at("base_id").get<int>();
    s.rotation_deg = j.at("rotation_deg").get<double>();
    s.split = split_from_string(j.at("split").get<std::string>());
    s.converged = j.at("converged").get<bool>();
    s.iterations = j.at("iterations").get<int>();
    s.params = json_vec(j.at("params"));
    if (s.params.size() != kParamDim) throw FormatError("sample " + std::to_string(s.id) + ": bad parameter width");
    for (const auto& on : j.at("tight")) {
        TightSet t;
        t.iteration = on.at("iteration").get<int>();
        t.bits.assign(width, 0);
        for (int idx : on.at("rows").get<std::vector<int>>()) {
            if (idx < 0 || idx >= width) throw FormatError("sample " + std::to_string(s.id) + ": tight row out of range");
            t.bits[idx] = 1;
        }
        s.tight_sets.push_back(std::move(t));
    }
    s.solution = json_vec(j.at("solution"));
    return s;
}

}  // namespace

void write_dataset(std::ostream& os, const Dataset& ds) {
    const ConstraintCatalog cat(ds.n_nodes);
    json header{{"format", "tscvx-dataset"},
                {"version", 1},
                {"n_nodes", ds.n_nodes},
                {"catalog_width", cat.width()},
                {"catalog_hash", cat.hash()},
                {"param_names", std::vector<std::string>(kParamNames.begin(), kParamNames.end())},
                {"samples", ds.samples.size()}};
    if (ds.stats.empty()) {
        header["standardization"] = nullptr;
    } else {
        header["standardization"] = {{"mean", vec_json(ds.stats.mean)}, {"std", vec_json(ds.stats.std)}};
    }
    os << header.dump() << '\n';
    for (const auto& s : ds.samples) os << sample_json(s).dump() << '\n';
    if (!os) throw FormatError("failed writing dataset");
}

Dataset read_dataset(std::istream& is) {
    std::string line;
    int lineno = 0;
    auto parse = [&](const std::string& text) {
        try {
            return json::parse(text);
        } catch (const json::parse_error& e) {
            throw FormatError("dataset line " + std::to_string(lineno) + ": " + e.what());
        }
    };
    if (!std::getline(is, line)) throw FormatError("empty dataset file");
    ++lineno;
    const json header = parse(line);
    if (header.value("format", "") != "tscvx-dataset") throw FormatError("not a tscvx dataset");
    if (header.value("version", 0) != 1) throw FormatError("unsupported dataset version");
    Dataset ds;
    ds.n_nodes = header.at("n_nodes").get<int>();
    const ConstraintCatalog cat(ds.n_nodes);
    if (header.at("catalog_hash").get<std::string>() != cat.hash()) {
        throw InconsistentCatalog("dataset catalog hash does not match this build");
    }
    if (!header.at("standardization").is_null()) {
        ds.stats.mean = json_vec(header["standardization"].at("mean"));
        ds.stats.std = json_vec(header["standardization"].at("std"));
    }
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            ds.samples.push_back(sample_from_json(parse(line), cat.width()));
        } catch (const json::exception& e) {
            throw FormatError("dataset line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    return ds;
}

void save_dataset(const std::string& path, const Dataset& ds) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    write_dataset(os, ds);
}

Dataset load_dataset(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path);
    return read_dataset(is);
}

void export_training(const Dataset& ds, const std::string& prefix) {
    std::ofstream tc(prefix + "_constraint.csv"), sc(prefix + "_solution.csv"), st(prefix + "_stats.json");
    if (!tc || !sc || !st) throw FormatError("cannot write training export with prefix " + prefix);
    const int width = ConstraintCatalog(ds.n_nodes).width();
    const int sw = solution_width(ds.n_nodes);
    tc << "id,base_id,split,k";
    sc << "id,base_id,split";
    for (int j = 0; j < kParamDim; ++j) {
        tc << ",p" << j;
        sc << ",p" << j;
    }
    for (int j = 0; j < width; ++j) tc << ",t" << j;
    for (int j = 0; j < sw; ++j) sc << ",y" << j;
    tc << '\n';
    sc << '\n';
    tc.precision(17);
    sc.precision(17);
    for (const auto* s : ds.select(Split::None)) {
        const std::string lead = std::to_string(s->id) + "," + std::to_string(s->base_id) + "," +
                                 std::string(to_string(s->split));
        for (std::size_t k = 0; k < s->tight_sets.size(); ++k) {
            tc << lead << ',' << k + 1;
            for (int j = 0; j < kParamDim; ++j) tc << ',' << s->params(j);
            for (auto b : s->tight_sets[k].bits) tc << ',' << static_cast<int>(b);
            tc << '\n';
        }
        sc << lead;
        for (int j = 0; j < kParamDim; ++j) sc << ',' << s->params(j);
        for (int j = 0; j < sw; ++j) sc << ',' << s->solution(j);
        sc << '\n';
    }
    json stats = nullptr;
    if (!ds.stats.empty()) stats = {{"mean", vec_json(ds.stats.mean)}, {"std", vec_json(ds.stats.std)}};
    st << json{{"param_names", std::vector<std::string>(kParamNames.begin(), kParamNames.end())},
               {"n_nodes", ds.n_nodes},
               {"standardization", stats}}
              .dump(1)
       << '\n';
}

double zeros_baseline_accuracy(const std::vector<const Sample*>& samples) {
    std::size_t zeros = 0, total = 0;
    for (const auto* s : samples) {
        for (const auto& t : s->tight_sets) {
            for (auto b : t.bits) zeros += b == 0;
            total += t.bits.size();
        }
    }
    if (total == 0) throw EmptyDataset("no tight sets to score");
    return static_cast<double>(zeros) / static_cast<double>(total);
}

}  // namespace tscvx
