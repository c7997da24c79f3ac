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

#include "tscvx/nn.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>
#include <zlib.h>

#include "tscvx/errors.hpp"

namespace tscvx {

static_assert(std::endian::native == std::endian::little, "weights I/O assumes a little-endian host");

MatrixXd softmax_rows(const MatrixXd& m) {
    MatrixXd out(m.rows(), m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double mx = m.row(i).maxCoeff();
        const Eigen::RowVectorXd e = (m.row(i).array() - mx).exp().matrix();
        out.row(i) = e / e.sum();
    }
    return out;
}

MatrixXd attention(const MatrixXd& Q, const MatrixXd& K, const MatrixXd& V, int d_k) {
    if (Q.cols() != K.cols()) throw ShapeMismatch("query and key widths differ");
    if (K.rows() != V.rows()) throw ShapeMismatch("key and value lengths differ");
    if (d_k <= 0) throw ShapeMismatch("d_k must be positive");
    return softmax_rows(Q * K.transpose() / std::sqrt(static_cast<double>(d_k))) * V;
}

namespace {

constexpr double kLayerNormEps = 1e-5;

MatrixXd layer_norm(const MatrixXd& x, const VectorXd& g, const VectorXd& b) {
    MatrixXd out(x.rows(), x.cols());
    const double n = static_cast<double>(x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double mean = x.row(i).mean();
        const double var = (x.row(i).array() - mean).square().sum() / n;
        out.row(i) = ((x.row(i).array() - mean) / std::sqrt(var + kLayerNormEps)).matrix();
        out.row(i) = out.row(i).cwiseProduct(g.transpose()) + b.transpose();
    }
    return out;
}

// x W^T + b, rows are tokens.
MatrixXd linear(const MatrixXd& x, const MatrixXd& W, const VectorXd& b) {
    MatrixXd y = x * W.transpose();
    y.rowwise() += b.transpose();
    return y;
}

void expect_vec(const VectorXd& v, Eigen::Index n, const char* name) {
    if (v.size() != n) {
        throw ShapeMismatch(std::string(name) + ": expected length " + std::to_string(n) + ", got " +
                            std::to_string(v.size()));
    }
}

void expect_mat(const MatrixXd& m, Eigen::Index r, Eigen::Index c, const char* name) {
    if (m.rows() != r || m.cols() != c) {
        throw ShapeMismatch(std::string(name) + ": expected " + std::to_string(r) + "x" + std::to_string(c) +
                            ", got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
    }
}

}  // namespace

void TransformerWeights::validate() const {
    if (input_width <= 0 || output_width <= 0 || embed_dim <= 0 || n_heads <= 0 || ffn_dim <= 0) {
        throw ShapeMismatch("transformer dimensions must be positive");
    }
    if (embed_dim % n_heads != 0) throw ShapeMismatch("embed_dim must be divisible by the head count");
    const int d = embed_dim;
    expect_vec(encoder_weight, d, "encoder.weight");
    expect_vec(encoder_bias, d, "encoder.bias");
    expect_mat(position, input_width, d, "position");
    for (const auto& L : layers) {
        expect_vec(L.norm1_weight, d, "norm1.weight");
        expect_vec(L.norm1_bias, d, "norm1.bias");
        expect_mat(L.q_weight, d, d, "attn.q.weight");
        expect_mat(L.k_weight, d, d, "attn.k.weight");
        expect_mat(L.v_weight, d, d, "attn.v.weight");
        expect_mat(L.out_weight, d, d, "attn.out.weight");
        expect_vec(L.q_bias, d, "attn.q.bias");
        expect_vec(L.k_bias, d, "attn.k.bias");
        expect_vec(L.v_bias, d, "attn.v.bias");
        expect_vec(L.out_bias, d, "attn.out.bias");
        expect_vec(L.norm2_weight, d, "norm2.weight");
        expect_vec(L.norm2_bias, d, "norm2.bias");
        expect_mat(L.ffn1_weight, ffn_dim, d, "ffn1.weight");
        expect_vec(L.ffn1_bias, ffn_dim, "ffn1.bias");
        expect_mat(L.ffn2_weight, d, ffn_dim, "ffn2.weight");
        expect_vec(L.ffn2_bias, d, "ffn2.bias");
    }
    expect_vec(final_norm_weight, d, "final_norm.weight");
    expect_vec(final_norm_bias, d, "final_norm.bias");
    expect_mat(decoder_weight, output_width, d, "decoder.weight");
    expect_vec(decoder_bias, output_width, "decoder.bias");
    expect_vec(input_mean, input_width, "input_mean");
    expect_vec(input_std, input_width, "input_std");
    expect_vec(output_mean, output_width, "output_mean");
    expect_vec(output_std, output_width, "output_std");
}

TransformerWeights TransformerWeights::zeros(int input_width, int output_width, int embed_dim, int n_heads,
                                             int n_layers, int ffn_dim) {
    TransformerWeights w;
    w.input_width = input_width;
    w.output_width = output_width;
    w.embed_dim = embed_dim;
    w.n_heads = n_heads;
    w.ffn_dim = ffn_dim;
    const int d = embed_dim;
    w.encoder_weight = VectorXd::Zero(d);
    w.encoder_bias = VectorXd::Zero(d);
    w.position = MatrixXd::Zero(input_width, d);
    for (int i = 0; i < n_layers; ++i) {
        EncoderLayer L;
        L.norm1_weight = L.norm1_bias = L.norm2_weight = L.norm2_bias = VectorXd::Zero(d);
        L.q_weight = L.k_weight = L.v_weight = L.out_weight = MatrixXd::Zero(d, d);
        L.q_bias = L.k_bias = L.v_bias = L.out_bias = L.ffn2_bias = VectorXd::Zero(d);
        L.ffn1_weight = MatrixXd::Zero(ffn_dim, d);
        L.ffn1_bias = VectorXd::Zero(ffn_dim);
        L.ffn2_weight = MatrixXd::Zero(d, ffn_dim);
        w.layers.push_back(std::move(L));
    }
    w.final_norm_weight = VectorXd::Zero(d);
    w.final_norm_bias = VectorXd::Zero(d);
    w.decoder_weight = MatrixXd::Zero(output_width, d);
    w.decoder_bias = VectorXd::Zero(output_width);
    w.input_mean = VectorXd::Zero(input_width);
    w.input_std = VectorXd::Ones(input_width);
    w.output_mean = VectorXd::Zero(output_width);
    w.output_std = VectorXd::Ones(output_width);
    return w;
}

TransformerWeights TransformerWeights::random(int input_width, int output_width, int embed_dim, int n_heads,
                                              int n_layers, int ffn_dim, std::uint64_t seed, double scale) {
    TransformerWeights w = zeros(input_width, output_width, embed_dim, n_heads, n_layers, ffn_dim);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(-scale, scale);
    auto fill = [&](auto& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(U(rng));
    };
    fill(w.encoder_weight);
    fill(w.encoder_bias);
    fill(w.position);
    for (auto& L : w.layers) {
        for (VectorXd* v : {&L.norm1_bias, &L.norm2_bias, &L.q_bias, &L.k_bias, &L.v_bias, &L.out_bias,
                            &L.ffn1_bias, &L.ffn2_bias}) {
            fill(*v);
        }
        for (MatrixXd* m : {&L.q_weight, &L.k_weight, &L.v_weight, &L.out_weight, &L.ffn1_weight, &L.ffn2_weight}) {
            fill(*m);
        }
        L.norm1_weight = VectorXd::Ones(embed_dim);
        L.norm2_weight = VectorXd::Ones(embed_dim);
    }
    w.final_norm_weight = VectorXd::Ones(embed_dim);
    fill(w.final_norm_bias);
    fill(w.decoder_weight);
    fill(w.decoder_bias);
    return w;
}

VectorXd forward_standardized(const TransformerWeights& w, const VectorXd& x) {
    if (x.size() != w.input_width) {
        throw ShapeMismatch("input width " + std::to_string(x.size()) + ", model expects " +
                            std::to_string(w.input_width));
    }
    const int d = w.embed_dim, dk = w.d_k();
    MatrixXd h = x * w.encoder_weight.transpose() + w.position;
    h.rowwise() += w.encoder_bias.transpose();
    for (const auto& L : w.layers) {
        const MatrixXd a = layer_norm(h, L.norm1_weight, L.norm1_bias);
        const MatrixXd q = linear(a, L.q_weight, L.q_bias);
        const MatrixXd k = linear(a, L.k_weight, L.k_bias);
        const MatrixXd v = linear(a, L.v_weight, L.v_bias);
        MatrixXd heads(h.rows(), d);
        for (int hd = 0; hd < w.n_heads; ++hd) {
            heads.middleCols(hd * dk, dk) =
                attention(q.middleCols(hd * dk, dk), k.middleCols(hd * dk, dk), v.middleCols(hd * dk, dk), dk);
        }
        h += linear(heads, L.out_weight, L.out_bias);
        const MatrixXd b = layer_norm(h, L.norm2_weight, L.norm2_bias);
        h += linear(linear(b, L.ffn1_weight, L.ffn1_bias).cwiseMax(0.0), L.ffn2_weight, L.ffn2_bias);
    }
    const MatrixXd n = layer_norm(h, w.final_norm_weight, w.final_norm_bias);
    const VectorXd pooled = n.colwise().mean().transpose();
    return w.decoder_weight * pooled + w.decoder_bias;
}

VectorXd forward(const TransformerWeights& w, const VectorXd& params) {
    if (params.size() != w.input_width) {
        throw ShapeMismatch("input width " + std::to_string(params.size()) + ", model expects " +
                            std::to_string(w.input_width));
    }
    VectorXd x(params.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double s = w.input_std(i) > 0.0 ? w.input_std(i) : 1.0;
        x(i) = (params(i) - w.input_mean(i)) / s;
    }
    const VectorXd y = forward_standardized(w, x);
    return y.cwiseProduct(w.output_std) + w.output_mean;
}

namespace {

Tensor vec_tensor(const VectorXd& v) {
    Tensor t;
    t.dims = {static_cast<std::uint32_t>(v.size())};
    t.data.resize(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) t.data[i] = static_cast<float>(v(i));
    return t;
}

Tensor mat_tensor(const MatrixXd& m) {
    Tensor t;
    t.dims = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
    t.data.resize(m.size());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) t.data[i * m.cols() + j] = static_cast<float>(m(i, j));
    }
    return t;
}

const Tensor& find(const TensorMap& t, const std::string& name) {
    auto it = t.find(name);
    if (it == t.end()) throw ShapeMismatch("missing tensor " + name);
    return it->second;
}

VectorXd tensor_vec(const TensorMap& t, const std::string& name) {
    const Tensor& x = find(t, name);
    if (x.dims.size() != 1) throw ShapeMismatch(name + " must have rank 1");
    VectorXd v(x.dims[0]);
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = x.data[i];
    return v;
}

MatrixXd tensor_mat(const TensorMap& t, const std::string& name) {
    const Tensor& x = find(t, name);
    if (x.dims.size() != 2) throw ShapeMismatch(name + " must have rank 2");
    MatrixXd m(x.dims[0], x.dims[1]);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = x.data[i * m.cols() + j];
    }
    return m;
}

std::string layer_prefix(int i) { return "layers." + std::to_string(i) + "."; }

}  // namespace

TensorMap to_tensors(const TransformerWeights& w) {
    w.validate();
    TensorMap t;
    t["config"] = vec_tensor((VectorXd(6) << w.input_width, w.output_width, w.embed_dim, w.n_heads,
                              w.n_layers(), w.ffn_dim)
                                 .finished());
    t["encoder.weight"] = vec_tensor(w.encoder_weight);
    t["encoder.bias"] = vec_tensor(w.encoder_bias);
    t["position"] = mat_tensor(w.position);
    for (int i = 0; i < w.n_layers(); ++i) {
        const auto& L = w.layers[i];
        const std::string p = layer_prefix(i);
        t[p + "norm1.weight"] = vec_tensor(L.norm1_weight);
        t[p + "norm1.bias"] = vec_tensor(L.norm1_bias);
        t[p + "attn.q.weight"] = mat_tensor(L.q_weight);
        t[p + "attn.q.bias"] = vec_tensor(L.q_bias);
        t[p + "attn.k.weight"] = mat_tensor(L.k_weight);
        t[p + "attn.k.bias"] = vec_tensor(L.k_bias);
        t[p + "attn.v.weight"] = mat_tensor(L.v_weight);
        t[p + "attn.v.bias"] = vec_tensor(L.v_bias);
        t[p + "attn.out.weight"] = mat_tensor(L.out_weight);
        t[p + "attn.out.bias"] = vec_tensor(L.out_bias);
        t[p + "norm2.weight"] = vec_tensor(L.norm2_weight);
        t[p + "norm2.bias"] = vec_tensor(L.norm2_bias);
        t[p + "ffn1.weight"] = mat_tensor(L.ffn1_weight);
        t[p + "ffn1.bias"] = vec_tensor(L.ffn1_bias);
        t[p + "ffn2.weight"] = mat_tensor(L.ffn2_weight);
        t[p + "ffn2.bias"] = vec_tensor(L.ffn2_bias);
    }
    t["final_norm.weight"] = vec_tensor(w.final_norm_weight);
    t["final_norm.bias"] = vec_tensor(w.final_norm_bias);
    t["decoder.weight"] = mat_tensor(w.decoder_weight);
    t["decoder.bias"] = vec_tensor(w.decoder_bias);
    t["input_mean"] = vec_tensor(w.input_mean);
    t["input_std"] = vec_tensor(w.input_std);
    t["output_mean"] = vec_tensor(w.output_mean);
    t["output_std"] = vec_tensor(w.output_std);
    return t;
}

TransformerWeights from_tensors(const TensorMap& t) {
    const VectorXd cfg = tensor_vec(t, "config");
    if (cfg.size() != 6) throw ShapeMismatch("config tensor must hold 6 entries");
    TransformerWeights w;
    w.input_width = static_cast<int>(cfg(0));
    w.output_width = static_cast<int>(cfg(1));
    w.embed_dim = static_cast<int>(cfg(2));
    w.n_heads = static_cast<int>(cfg(3));
    const int n_layers = static_cast<int>(cfg(4));
    w.ffn_dim = static_cast<int>(cfg(5));
    w.encoder_weight = tensor_vec(t, "encoder.weight");
    w.encoder_bias = tensor_vec(t, "encoder.bias");
    w.position = tensor_mat(t, "position");
    for (int i = 0; i < n_layers; ++i) {
        const std::string p = layer_prefix(i);
        EncoderLayer L;
        L.norm1_weight = tensor_vec(t, p + "norm1.weight");
        L.norm1_bias = tensor_vec(t, p + "norm1.bias");
        L.q_weight = tensor_mat(t, p + "attn.q.weight");
        L.q_bias = tensor_vec(t, p + "attn.q.bias");
        L.k_weight = tensor_mat(t, p + "attn.k.weight");
        L.k_bias = tensor_vec(t, p + "attn.k.bias");
        L.v_weight = tensor_mat(t, p + "attn.v.weight");
        L.v_bias = tensor_vec(t, p + "attn.v.bias");
        L.out_weight = tensor_mat(t, p + "attn.out.weight");
        L.out_bias = tensor_vec(t, p + "attn.out.bias");
        L.norm2_weight = tensor_vec(t, p + "norm2.weight");
        L.norm2_bias = tensor_vec(t, p + "norm2.bias");
        L.ffn1_weight = tensor_mat(t, p + "ffn1.weight");
        L.ffn1_bias = tensor_vec(t, p + "ffn1.bias");
        L.ffn2_weight = tensor_mat(t, p + "ffn2.weight");
        L.ffn2_bias = tensor_vec(t, p + "ffn2.bias");
        w.layers.push_back(std::move(L));
    }
    w.final_norm_weight = tensor_vec(t, "final_norm.weight");
    w.final_norm_bias = tensor_vec(t, "final_norm.bias");
    w.decoder_weight = tensor_mat(t, "decoder.weight");
    w.decoder_bias = tensor_vec(t, "decoder.bias");
    w.input_mean = tensor_vec(t, "input_mean");
    w.input_std = tensor_vec(t, "input_std");
    w.output_mean = tensor_vec(t, "output_mean");
    w.output_std = tensor_vec(t, "output_std");
    w.validate();
    return w;
}

namespace {

template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const char* what) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError(std::string("truncated ") + what);
    return v;
}

std::uint32_t checksum(const std::vector<float>& data) {
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size() * sizeof(float))));
}

struct Entry {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::uint64_t offset = 0;
    std::uint32_t crc = 0;
};

std::size_t element_count(const std::vector<std::uint32_t>& dims) {
    std::size_t n = 1;
    for (auto d : dims) n *= d;
    return n;
}

std::vector<Entry> read_directory(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "TSCX", 4) != 0) throw FormatError("not a TSCX weights file");
    const auto version = get<std::uint32_t>(is, "version");
    if (version != kWeightsVersion) throw FormatError("unsupported weights version " + std::to_string(version));
    const auto count = get<std::uint32_t>(is, "tensor count");
    if (count > 100000) throw FormatError("implausible tensor count");
    std::vector<Entry> dir(count);
    for (auto& e : dir) {
        const auto len = get<std::uint32_t>(is, "name length");
        if (len > 4096) throw FormatError("implausible tensor name length");
        e.name.resize(len);
        if (!is.read(e.name.data(), len)) throw FormatError("truncated tensor name");
        const auto dtype = get<std::uint32_t>(is, "dtype");
        if (dtype != 0) throw FormatError("tensor " + e.name + ": unsupported dtype " + std::to_string(dtype));
        const auto rank = get<std::uint32_t>(is, "rank");
        if (rank > 8) throw FormatError("tensor " + e.name + ": implausible rank");
        e.dims.resize(rank);
        for (auto& d : e.dims) d = get<std::uint32_t>(is, "dims");
        e.offset = get<std::uint64_t>(is, "offset");
        e.crc = get<std::uint32_t>(is, "checksum");
    }
    return dir;
}

std::vector<float> read_payload(std::istream& is, const Entry& e) {
    std::vector<float> data(element_count(e.dims));
    is.clear();
    is.seekg(static_cast<std::streamoff>(e.offset));
    if (!is.read(reinterpret_cast<char*>(data.data()), static_cast<std::streamsize>(data.size() * sizeof(float)))) {
        throw FormatError("tensor " + e.name + ": payload out of range");
    }
    return data;
}

}  // namespace

void write_tensors(std::ostream& os, const TensorMap& t) {
    std::uint64_t header = 4 + 4 + 4;
    for (const auto& [name, x] : t) {
        if (x.data.size() != element_count(x.dims)) throw ShapeMismatch("tensor " + name + ": size does not match dims");
        header += 4 + name.size() + 4 + 4 + 4 * x.dims.size() + 8 + 4;
    }
    os.write("TSCX", 4);
    put<std::uint32_t>(os, kWeightsVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(t.size()));
    std::uint64_t offset = header;
    for (const auto& [name, x] : t) {
        put<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put<std::uint32_t>(os, 0);
        put<std::uint32_t>(os, static_cast<std::uint32_t>(x.dims.size()));
        for (auto d : x.dims) put<std::uint32_t>(os, d);
        put<std::uint64_t>(os, offset);
        put<std::uint32_t>(os, checksum(x.data));
        offset += x.data.size() * sizeof(float);
    }
    for (const auto& [name, x] : t) {
        os.write(reinterpret_cast<const char*>(x.data.data()), static_cast<std::streamsize>(x.data.size() * sizeof(float)));
    }
    if (!os) throw FormatError("failed writing weights");
}

TensorMap read_tensors(std::istream& is) {
    TensorMap t;
    for (const auto& e : read_directory(is)) {
        Tensor x;
        x.dims = e.dims;
        x.data = read_payload(is, e);
        if (checksum(x.data) != e.crc) throw FormatError("tensor " + e.name + ": checksum mismatch");
        t[e.name] = std::move(x);
    }
    return t;
}

void save_weights(const std::string& path, const TransformerWeights& w) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw FormatError("cannot open " + path + " for writing");
    write_tensors(os, to_tensors(w));
}

TransformerWeights load_weights(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path);
    return from_tensors(read_tensors(is));
}

WeightsCheck verify_weights(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw FormatError("cannot open " + path);
    WeightsCheck out;
    TensorMap t;
    for (const auto& e : read_directory(is)) {
        ++out.tensors;
        Tensor x;
        x.dims = e.dims;
        x.data = read_payload(is, e);
        if (checksum(x.data) != e.crc) out.checksum_failures.push_back(e.name);
        t[e.name] = std::move(x);
    }
    try {
        from_tensors(t);
    } catch (const ShapeMismatch& err) {
        out.shape_error = err.what();
    }
    return out;
}

ParityFixture load_parity_fixture(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw FormatError("cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch (const nlohmann::json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
    ParityFixture f;
    const auto dir = std::filesystem::path(path).parent_path();
    f.weights = (dir / j.at("weights").get<std::string>()).string();
    f.tolerance = j.value("tolerance", 1e-4);
    for (const auto& c : j.at("cases")) {
        const auto in = c.at("input").get<std::vector<double>>();
        const auto out = c.at("logits").get<std::vector<double>>();
        f.cases.push_back({Eigen::Map<const VectorXd>(in.data(), static_cast<Eigen::Index>(in.size())),
                           Eigen::Map<const VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()))});
    }
    return f;
}

}  // namespace tscvx
