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

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <gtest/gtest.h>

#include "tscvx/errors.hpp"
#include "tscvx/neighbors.hpp"

namespace tscvx {
namespace {

Eigen::MatrixXd gaussian(std::mt19937_64& rng, int n, int p) {
    std::normal_distribution<double> N(0.0, 1.0);
    Eigen::MatrixXd X(n, p);
    for (int i = 0; i < X.size(); ++i) X.data()[i] = N(rng);
    return X;
}

TEST(Stats, QuartilesOfOneToFive) {
    const std::vector<double> v{5, 3, 1, 4, 2};
    const auto s = summarize(v);
    EXPECT_EQ(s.q1, 2.0);
    EXPECT_EQ(s.median, 3.0);
    EXPECT_EQ(s.q3, 4.0);
    EXPECT_EQ(s.mean, 3.0);
    EXPECT_NEAR(s.std, std::sqrt(2.5), 1e-15);
    const auto one = summarize({7.5});
    EXPECT_EQ(one.q1, 7.5);
    EXPECT_EQ(one.q3, 7.5);
    EXPECT_EQ(one.std, 0.0);
    EXPECT_THROW(summarize({}), EmptyDataset);
    EXPECT_DOUBLE_EQ(percentile({0.0, 10.0}, 0.95), 9.5);
}

TEST(KdTree, MatchesLinearScan) {
    std::mt19937_64 rng(21);
    const Eigen::MatrixXd P = gaussian(rng, 300, 16);
    std::vector<int> ids(300);
    std::iota(ids.begin(), ids.end(), 1000);
    std::shuffle(ids.begin(), ids.end(), rng);
    const KdTree tree(P, ids);
    for (int t = 0; t < 500; ++t) {
        const Eigen::VectorXd q = gaussian(rng, 16, 1);
        for (int k : {1, 11}) {
            const auto a = tree.knn(q, k);
            const auto b = KdTree::linear_scan(P, ids, q, k);
            ASSERT_EQ(a.size(), b.size());
            for (std::size_t i = 0; i < a.size(); ++i) {
                EXPECT_EQ(a[i].id, b[i].id);
                EXPECT_EQ(a[i].dist2, b[i].dist2);
            }
        }
    }
}

TEST(KdTree, SelfRecall) {
    std::mt19937_64 rng(22);
    const Eigen::MatrixXd P = gaussian(rng, 100, 5);
    std::vector<int> ids(100);
    std::iota(ids.begin(), ids.end(), 0);
    const KdTree tree(P, ids);
    for (int i = 0; i < 100; ++i) {
        const auto n = tree.nearest(P.row(i).transpose());
        EXPECT_EQ(n.id, i);
        EXPECT_EQ(n.dist2, 0.0);
    }
}

TEST(KdTree, TiesGoToLowerId) {
    Eigen::MatrixXd P(4, 2);
    P << 1, 0, -1, 0, 0, 1, 5, 5;
    const KdTree tree(P, {7, 3, 9, 1});
    EXPECT_EQ(tree.nearest(Eigen::Vector2d(0, 0)).id, 3);
    const auto three = tree.knn(Eigen::Vector2d(0, 0), 3);
    EXPECT_EQ(three[0].id, 3);
    EXPECT_EQ(three[1].id, 7);
    EXPECT_EQ(three[2].id, 9);

    Eigen::MatrixXd D(3, 1);
    D << 2, 2, 2;
    EXPECT_EQ(KdTree(D, {5, 2, 8}).nearest(Eigen::VectorXd::Constant(1, 2.0)).id, 2);
    EXPECT_THROW(KdTree(Eigen::MatrixXd(0, 2), {}), EmptyDataset);
}

TEST(Pca, ReconstructionLossIsTailEigenvalueMass) {
    std::mt19937_64 rng(23);
    Eigen::MatrixXd X = gaussian(rng, 200, 16);
    X = X * gaussian(rng, 16, 16);  // correlate components
    const Pca pca(X, 10);
    EXPECT_EQ(pca.components(), 10);

    const Eigen::MatrixXd C = X.rowwise() - X.colwise().mean();
    const Eigen::MatrixXd cov = C.transpose() * C / 199.0;
    Eigen::EigenSolver<Eigen::MatrixXd> oracle(cov);
    std::vector<double> ev;
    for (int i = 0; i < 16; ++i) ev.push_back(oracle.eigenvalues()(i).real());
    std::sort(ev.rbegin(), ev.rend());
    double tail = 0.0;
    for (int i = 0; i < 16; ++i) {
        EXPECT_NEAR(pca.eigenvalues()(i), ev[i], 1e-9 * ev[0]);
        if (i >= 10) tail += ev[i];
    }
    double loss = 0.0;
    for (int i = 0; i < 200; ++i) {
        const Eigen::VectorXd x = X.row(i).transpose();
        loss += (x - pca.inverse(pca.transform(x))).squaredNorm();
    }
    EXPECT_NEAR(loss, 199.0 * tail, 1e-8 * loss);
    EXPECT_LT((pca.basis().transpose() * pca.basis() - Eigen::MatrixXd::Identity(10, 10)).norm(), 1e-12);
}

TEST(Idw, ExactHitAndMidpoint) {
    const std::vector<Neighbor> hit{{0, 4, 0.0}, {1, 2, 1.0}, {2, 1, 0.0}};
    const auto w = idw_weights(hit);
    EXPECT_EQ(w[2], 1.0);
    EXPECT_EQ(w[0] + w[1], 0.0);
    const auto m = idw_weights({{0, 0, 0.25}, {1, 1, 0.25}});
    EXPECT_EQ(m[0], 0.5);
    EXPECT_EQ(m[1], 0.5);
}

TEST(Mahalanobis, MeanAndIdentityCovariance) {
    const int p = 4;
    Eigen::MatrixXd X(2 * p, p);
    X.setZero();
    const double c = std::sqrt((2.0 * p - 1.0) / 2.0);
    for (int j = 0; j < p; ++j) {
        X(2 * j, j) = c;
        X(2 * j + 1, j) = -c;
    }
    const Mahalanobis m(X);
    EXPECT_NEAR(m.distance(Eigen::VectorXd::Zero(p)), 0.0, 1e-15);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(p);
    x(0) = 3.0;
    EXPECT_NEAR(m.distance(x), 3.0, 1e-12);
    EXPECT_FALSE(m.regularized());
}

TEST(Mahalanobis, ConstantComponentIsRegularized) {
    std::mt19937_64 rng(24);
    Eigen::MatrixXd X = gaussian(rng, 50, 3);
    X.col(1).setConstant(2.0);
    const Mahalanobis m(X);
    EXPECT_TRUE(m.regularized());
    EXPECT_TRUE(std::isfinite(m.distance(Eigen::Vector3d(0.5, 2.0, -0.5))));
}

TEST(Mahalanobis, SplitMatchesSortOracle) {
    std::mt19937_64 rng(25);
    const Eigen::MatrixXd train = gaussian(rng, 400, 6);
    const Eigen::MatrixXd test = gaussian(rng, 200, 6);
    const auto split = mahalanobis_split(train, test);

    const Eigen::RowVectorXd mu = train.colwise().mean();
    const Eigen::MatrixXd C = train.rowwise() - mu;
    const Eigen::MatrixXd Sinv = (C.transpose() * C / 399.0).inverse();
    auto dm = [&](const Eigen::RowVectorXd& x) {
        const Eigen::RowVectorXd d = x - mu;
        return std::sqrt((d * Sinv * d.transpose())(0, 0));
    };
    std::vector<double> d;
    for (int i = 0; i < 400; ++i) d.push_back(dm(train.row(i)));
    std::sort(d.begin(), d.end());
    const double pos = 0.95 * 399.0;
    const int lo = static_cast<int>(pos);
    const double thr = d[lo] + (pos - lo) * (d[lo + 1] - d[lo]);
    EXPECT_NEAR(split.threshold, thr, 1e-10);
    std::vector<int> ood;
    for (int i = 0; i < 200; ++i) {
        if (dm(test.row(i)) > thr) ood.push_back(i);
    }
    EXPECT_EQ(split.ood, ood);
    EXPECT_EQ(split.ood.size() + split.in_distribution.size(), 200u);

    const auto self = mahalanobis_split(train, train);
    EXPECT_NEAR(static_cast<double>(self.ood.size()), 20.0, 1.0);
}

}  // namespace
}  // namespace tscvx
