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

#ifndef TSCVX_NN_HPP
#define TSCVX_NN_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace tscvx {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// Row-wise softmax, max-shifted.
MatrixXd softmax_rows(const MatrixXd& m);

/// Softmax(Q K^T / sqrt(d_k)) V. Throws ShapeMismatch.
MatrixXd attention(const MatrixXd& Q, const MatrixXd& K, const MatrixXd& V, int d_k);

struct EncoderLayer {
    VectorXd norm1_weight, norm1_bias;
    MatrixXd q_weight, k_weight, v_weight, out_weight;  // d x d
    VectorXd q_bias, k_bias, v_bias, out_bias;
    VectorXd norm2_weight, norm2_bias;
    MatrixXd ffn1_weight;  // f x d
    VectorXd ffn1_bias;
    MatrixXd ffn2_weight;  // d x f
    VectorXd ffn2_bias;
};

/// Pre-norm transformer encoder over one token per input scalar:
///   h_t = x_t * encoder_weight + encoder_bias + position_t
///   h  += MHA(LN1(h)); h += W2 relu(W1 LN2(h))   (per layer)
///   y   = decoder (mean_t LN_f(h))
/// Inputs are standardized with input_mean/input_std before the pass and
/// outputs de-standardized with output_mean/output_std after it.
struct TransformerWeights {
    int input_width = 0;
    int output_width = 0;
    int embed_dim = 0;
    int n_heads = 0;
    int ffn_dim = 0;

    VectorXd encoder_weight, encoder_bias;  // d
    MatrixXd position;                       // input_width x d
    std::vector<EncoderLayer> layers;
    VectorXd final_norm_weight, final_norm_bias;
    MatrixXd decoder_weight;  // output_width x d
    VectorXd decoder_bias;
    VectorXd input_mean, input_std, output_mean, output_std;

    [[nodiscard]] int d_k() const { return n_heads > 0 ? embed_dim / n_heads : 0; }
    [[nodiscard]] int n_layers() const { return static_cast<int>(layers.size()); }

    /// Throws ShapeMismatch on inconsistent tensors.
    void validate() const;

    /// Every tensor zero; standardization stats mean 0, std 1.
    static TransformerWeights zeros(int input_width, int output_width, int embed_dim, int n_heads, int n_layers,
                                    int ffn_dim);
    /// Uniform(-scale, scale) entries rounded to float; deterministic in seed.
    static TransformerWeights random(int input_width, int output_width, int embed_dim, int n_heads, int n_layers,
                                     int ffn_dim, std::uint64_t seed, double scale = 0.2);
};

/// Logits for an already standardized input.
VectorXd forward_standardized(const TransformerWeights& w, const VectorXd& x);

/// Standardize, forward, de-standardize.
VectorXd forward(const TransformerWeights& w, const VectorXd& params);

/// Named float tensors as stored in a weights file.
struct Tensor {
    std::vector<std::uint32_t> dims;
    std::vector<float> data;
};
using TensorMap = std::map<std::string, Tensor>;

TensorMap to_tensors(const TransformerWeights& w);
TransformerWeights from_tensors(const TensorMap& t);

/// Weights file:
///   "TSCX" | u32 version | u32 count | count x entry | payload
///   entry: u32 name_len | name | u32 dtype (0 = f32) | u32 rank | u32 dims[rank]
///          | u64 offset (from file start) | u32 crc32 of the payload bytes
/// All integers and floats little-endian; payload tensors row-major.
inline constexpr std::uint32_t kWeightsVersion = 1;

void write_tensors(std::ostream& os, const TensorMap& t);
/// Throws FormatError on malformed input or a checksum mismatch.
TensorMap read_tensors(std::istream& is);

void save_weights(const std::string& path, const TransformerWeights& w);
TransformerWeights load_weights(const std::string& path);

struct WeightsCheck {
    int tensors = 0;
    std::vector<std::string> checksum_failures;
    std::string shape_error;  // empty when consistent
    [[nodiscard]] bool ok() const { return checksum_failures.empty() && shape_error.empty(); }
};

/// Reads every tensor, recomputes checksums, and validates shapes without
/// throwing on checksum or shape problems. Throws FormatError when the
/// container itself is unreadable.
WeightsCheck verify_weights(const std::string& path);

/// Parity fixture: standardized inputs with expected logits.
struct ParityCase {
    VectorXd input;
    VectorXd logits;
};
struct ParityFixture {
    std::string weights;  // path relative to the fixture file
    double tolerance = 1e-4;
    std::vector<ParityCase> cases;
};
ParityFixture load_parity_fixture(const std::string& path);

}  // namespace tscvx

#endif  // TSCVX_NN_HPP
