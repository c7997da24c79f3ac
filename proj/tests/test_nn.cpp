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
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "tscvx/errors.hpp"
#include "tscvx/nn.hpp"

namespace tscvx {
namespace {

MatrixXd naive_attention(const MatrixXd& Q, const MatrixXd& K, const MatrixXd& V, int dk) {
    MatrixXd out = MatrixXd::Zero(Q.rows(), V.cols());
    for (int i = 0; i < Q.rows(); ++i) {
        std::vector<double> s(K.rows());
        double mx = -1e300;
        for (int j = 0; j < K.rows(); ++j) {
            double dot = 0.0;
            for (int c = 0; c < Q.cols(); ++c) dot += Q(i, c) * K(j, c);
            s[j] = dot / std::sqrt(static_cast<double>(dk));
            mx = std::max(mx, s[j]);
        }
        double z = 0.0;
        for (auto& v : s) z += (v = std::exp(v - mx));
        for (int j = 0; j < K.rows(); ++j) {
            for (int c = 0; c < V.cols(); ++c) out(i, c) += s[j] / z * V(j, c);
        }
    }
    return out;
}

TEST(Attention, IdentityInputs) {
    const MatrixXd I = MatrixXd::Identity(2, 2);
    const MatrixXd a = attention(I, I, I, 2);
    const double e = std::exp(1.0 / std::sqrt(2.0));
    EXPECT_NEAR(a(0, 0), e / (e + 1.0), 1e-15);
    EXPECT_NEAR(a(0, 1), 1.0 / (e + 1.0), 1e-15);
    for (int i = 0; i < 2; ++i) EXPECT_NEAR(a.row(i).sum(), 1.0, 1e-15);
}

TEST(Attention, SingleTokenReturnsValueRow) {
    MatrixXd q(1, 3), k(1, 3), v(1, 4);
    q << 0.3, -2.0, 7.0;
    k << 1.0, 5.0, -0.5;
    v << 1.5, -2.5, 3.5, 0.25;
    EXPECT_TRUE(attention(q, k, v, 3) == v);
}

TEST(Attention, MatchesLoopOracleAndRowsSumToOne) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> N(0.0, 2.0);
    for (int trial = 0; trial < 20; ++trial) {
        MatrixXd Q(3, 4), K(3, 4), V(3, 4);
        for (auto* m : {&Q, &K, &V}) {
            for (int i = 0; i < m->size(); ++i) m->data()[i] = N(rng);
        }
        EXPECT_LT((attention(Q, K, V, 4) - naive_attention(Q, K, V, 4)).cwiseAbs().maxCoeff(), 1e-6);
        const MatrixXd P = softmax_rows(Q * K.transpose() / 2.0);
        for (int i = 0; i < 3; ++i) EXPECT_NEAR(P.row(i).sum(), 1.0, 1e-9);
    }
}

TEST(Attention, ShapeMismatch) {
    EXPECT_THROW(attention(MatrixXd::Zero(2, 3), MatrixXd::Zero(2, 4), MatrixXd::Zero(2, 4), 3), ShapeMismatch);
    EXPECT_THROW(attention(MatrixXd::Zero(2, 3), MatrixXd::Zero(2, 3), MatrixXd::Zero(3, 4), 3), ShapeMismatch);
}

TEST(Transformer, ZeroWeightsGiveZeroLogits) {
    const auto w = TransformerWeights::zeros(17, 350, 8, 2, 2, 32);
    const VectorXd y = forward(w, VectorXd::LinSpaced(17, -1.0, 1.0));
    EXPECT_EQ(y.size(), 350);
    EXPECT_EQ(y.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Transformer, DeterministicAndWidthChecked) {
    const auto w = TransformerWeights::random(16, 851, 16, 2, 2, 64, 9);
    const VectorXd x = VectorXd::LinSpaced(16, -2.0, 2.0);
    const VectorXd a = forward(w, x), b = forward(w, x);
    EXPECT_EQ(a.size(), 851);
    EXPECT_TRUE(a == b);
    EXPECT_THROW(forward(w, VectorXd::Zero(17)), ShapeMismatch);
    auto bad = w;
    bad.n_heads = 3;
    EXPECT_THROW(bad.validate(), ShapeMismatch);
}

TEST(Weights, RoundTripIsExact) {
    const auto w = TransformerWeights::random(17, 20, 8, 2, 3, 16, 4);
    std::stringstream ss;
    write_tensors(ss, to_tensors(w));
    const auto r = from_tensors(read_tensors(ss));
    EXPECT_EQ(r.n_layers(), 3);
    EXPECT_EQ(r.d_k(), 4);
    const VectorXd x = VectorXd::LinSpaced(17, 0.0, 1.0);
    EXPECT_TRUE(forward(w, x) == forward(r, x));
    EXPECT_TRUE(r.layers[2].ffn2_weight == w.layers[2].ffn2_weight);
}

TEST(Weights, ChecksumDetectsCorruption) {
    const auto dir = std::filesystem::temp_directory_path();
    const std::string path = (dir / "tscvx_corrupt.tscx").string();
    save_weights(path, TransformerWeights::random(17, 20, 8, 2, 1, 16, 5));
    EXPECT_TRUE(verify_weights(path).ok());
    {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(-3, std::ios::end);
        f.put('\x7f');
    }
    const auto check = verify_weights(path);
    EXPECT_FALSE(check.ok());
    EXPECT_EQ(check.checksum_failures.size(), 1u);
    EXPECT_THROW(load_weights(path), FormatError);
    std::filesystem::remove(path);

    std::stringstream junk("TSCY\x01");
    EXPECT_THROW(read_tensors(junk), FormatError);
}

TEST(Weights, MissingTensorIsShapeMismatch) {
    auto t = to_tensors(TransformerWeights::random(17, 20, 8, 2, 1, 16, 5));
    t.erase("decoder.bias");
    EXPECT_THROW(from_tensors(t), ShapeMismatch);
}

TEST(Parity, ForwardPassMatchesTrainerFixture) {
    const auto fx = load_parity_fixture(std::string(TSCVX_TEST_DATA) + "/parity_fixture.json");
    const auto w = load_weights(fx.weights);
    ASSERT_FALSE(fx.cases.empty());
    for (const auto& c : fx.cases) {
        const VectorXd y = forward_standardized(w, c.input);
        ASSERT_EQ(y.size(), c.logits.size());
        EXPECT_LT((y - c.logits).cwiseAbs().maxCoeff(), fx.tolerance);
    }
    EXPECT_TRUE(verify_weights(fx.weights).ok());
}

}  // namespace
}  // namespace tscvx
