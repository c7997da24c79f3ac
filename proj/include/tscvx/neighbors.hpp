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

#ifndef TSCVX_NEIGHBORS_HPP
#define TSCVX_NEIGHBORS_HPP

#include <vector>

#include <Eigen/Dense>

namespace tscvx {

/// Percentile p in [0, 1] by linear interpolation between closest ranks,
/// position p (n - 1) of the sorted sample. Throws EmptyDataset.
double percentile(std::vector<double> values, double p);

struct Summary {
    int n = 0;
    double mean = 0.0;
    double median = 0.0;
    double std = 0.0;  // unbiased, n - 1
    double min = 0.0;
    double max = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};
Summary summarize(const std::vector<double>& values);

struct Neighbor {
    int index = 0;  // row in the point matrix
    int id = 0;
    double dist2 = 0.0;
};

/// Exact k-nearest neighbors in Euclidean distance; ties resolved by the
/// lower id.
class KdTree {
public:
    /// Points are rows.
    KdTree(Eigen::MatrixXd points, std::vector<int> ids);

    [[nodiscard]] std::vector<Neighbor> knn(const Eigen::VectorXd& q, int k) const;
    [[nodiscard]] Neighbor nearest(const Eigen::VectorXd& q) const { return knn(q, 1).front(); }
    [[nodiscard]] int size() const { return static_cast<int>(points_.rows()); }
    [[nodiscard]] int dim() const { return static_cast<int>(points_.cols()); }

    /// Brute-force reference with the same ordering rule.
    static std::vector<Neighbor> linear_scan(const Eigen::MatrixXd& points, const std::vector<int>& ids,
                                             const Eigen::VectorXd& q, int k);

private:
    struct Node {
        int point = -1;
        int axis = 0;
        int left = -1;
        int right = -1;
    };
    int build(std::vector<int>& order, int lo, int hi, int depth);
    void search(int node, const Eigen::VectorXd& q, int k, std::vector<Neighbor>& heap) const;

    Eigen::MatrixXd points_;
    std::vector<int> ids_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

/// Principal components of row samples.
class Pca {
public:
    Pca(const Eigen::MatrixXd& samples, int components);

    [[nodiscard]] Eigen::VectorXd transform(const Eigen::VectorXd& x) const;
    [[nodiscard]] Eigen::VectorXd inverse(const Eigen::VectorXd& z) const;
    [[nodiscard]] Eigen::MatrixXd transform_rows(const Eigen::MatrixXd& X) const;

    [[nodiscard]] int components() const { return static_cast<int>(basis_.cols()); }
    /// Covariance eigenvalues (n - 1 normalization), descending.
    [[nodiscard]] const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
    [[nodiscard]] const Eigen::MatrixXd& basis() const { return basis_; }
    [[nodiscard]] const Eigen::VectorXd& mean() const { return mean_; }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd basis_;  // p x k, orthonormal columns
    Eigen::VectorXd eigenvalues_;
};

/// Inverse-squared-distance weights over neighbors; a zero-distance
/// neighbor takes all weight (the lowest id among several).
std::vector<double> idw_weights(const std::vector<Neighbor>& neighbors);

/// Mahalanobis distance to the fitted sample distribution.
class Mahalanobis {
public:
    /// Adds 1e-8 I when the covariance is not positive definite; throws
    /// DegenerateCovariance if that still fails.
    explicit Mahalanobis(const Eigen::MatrixXd& samples);

    [[nodiscard]] double distance(const Eigen::VectorXd& x) const;
    [[nodiscard]] const Eigen::VectorXd& mean() const { return mean_; }
    [[nodiscard]] bool regularized() const { return regularized_; }

private:
    Eigen::VectorXd mean_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    bool regularized_ = false;
};

struct OodSplit {
    double threshold = 0.0;
    std::vector<int> in_distribution;  // indices into the test rows
    std::vector<int> ood;
};

/// Threshold = percentile of training distances; test rows strictly above
/// it are out of distribution.
OodSplit mahalanobis_split(const Eigen::MatrixXd& train, const Eigen::MatrixXd& test, double pct = 0.95);

}  // namespace tscvx

#endif  // TSCVX_NEIGHBORS_HPP
