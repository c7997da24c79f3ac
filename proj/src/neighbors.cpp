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

#include "tscvx/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "tscvx/errors.hpp"

namespace tscvx {

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw EmptyDataset("percentile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("percentile must lie in [0, 1]");
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

Summary summarize(const std::vector<double>& values) {
    if (values.empty()) throw EmptyDataset("summary of an empty sample");
    Summary s;
    s.n = static_cast<int>(values.size());
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / s.n;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = s.n > 1 ? std::sqrt(ss / (s.n - 1)) : 0.0;
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    s.median = percentile(values, 0.5);
    s.q1 = percentile(values, 0.25);
    s.q3 = percentile(values, 0.75);
    return s;
}

namespace {

bool closer(const Neighbor& a, const Neighbor& b) {
    return a.dist2 < b.dist2 || (a.dist2 == b.dist2 && a.id < b.id);
}

double squared_distance(const Eigen::MatrixXd& P, int row, const Eigen::VectorXd& q) {
    double d = 0.0;
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
        const double t = P(row, j) - q(j);
        d += t * t;
    }
    return d;
}

void offer(std::vector<Neighbor>& heap, int k, const Neighbor& n) {
    if (static_cast<int>(heap.size()) < k) {
        heap.push_back(n);
        std::push_heap(heap.begin(), heap.end(), closer);
    } else if (closer(n, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), closer);
        heap.back() = n;
        std::push_heap(heap.begin(), heap.end(), closer);
    }
}

}  // namespace

KdTree::KdTree(Eigen::MatrixXd points, std::vector<int> ids) : points_(std::move(points)), ids_(std::move(ids)) {
    if (points_.rows() == 0) throw EmptyDataset("KD-tree over an empty point set");
    if (static_cast<Eigen::Index>(ids_.size()) != points_.rows()) {
        throw std::invalid_argument("KD-tree needs one id per point");
    }
    std::vector<int> order(points_.rows());
    std::iota(order.begin(), order.end(), 0);
    nodes_.reserve(order.size());
    root_ = build(order, 0, static_cast<int>(order.size()), 0);
}

int KdTree::build(std::vector<int>& order, int lo, int hi, int depth) {
    if (lo >= hi) return -1;
    int axis = 0;
    double best = -1.0;
    for (Eigen::Index j = 0; j < points_.cols(); ++j) {
        double mn = points_(order[lo], j), mx = mn;
        for (int i = lo + 1; i < hi; ++i) {
            mn = std::min(mn, points_(order[i], j));
            mx = std::max(mx, points_(order[i], j));
        }
        if (mx - mn > best) {
            best = mx - mn;
            axis = static_cast<int>(j);
        }
    }
    const int mid = lo + (hi - lo) / 2;
    std::nth_element(order.begin() + lo, order.begin() + mid, order.begin() + hi,
                     [&](int a, int b) { return points_(a, axis) < points_(b, axis); });
    const int node = static_cast<int>(nodes_.size());
    nodes_.push_back({order[mid], axis, -1, -1});
    const int left = build(order, lo, mid, depth + 1);
    const int right = build(order, mid + 1, hi, depth + 1);
    nodes_[node].left = left;
    nodes_[node].right = right;
    return node;
}

void KdTree::search(int node, const Eigen::VectorXd& q, int k, std::vector<Neighbor>& heap) const {
    if (node < 0) return;
    const Node& n = nodes_[node];
    offer(heap, k, {n.point, ids_[n.point], squared_distance(points_, n.point, q)});
    const double diff = q(n.axis) - points_(n.point, n.axis);
    const int near = diff < 0.0 ? n.left : n.right;
    const int far = diff < 0.0 ? n.right : n.left;
    search(near, q, k, heap);
    if (static_cast<int>(heap.size()) < k || diff * diff <= heap.front().dist2) search(far, q, k, heap);
}

std::vector<Neighbor> KdTree::knn(const Eigen::VectorXd& q, int k) const {
    if (q.size() != points_.cols()) throw std::invalid_argument("query dimension mismatch");
    k = std::min(k, size());
    std::vector<Neighbor> heap;
    heap.reserve(k);
    search(root_, q, k, heap);
    std::sort_heap(heap.begin(), heap.end(), closer);
    return heap;
}

std::vector<Neighbor> KdTree::linear_scan(const Eigen::MatrixXd& points, const std::vector<int>& ids,
                                          const Eigen::VectorXd& q, int k) {
    std::vector<Neighbor> all;
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        all.push_back({static_cast<int>(i), ids[i], squared_distance(points, static_cast<int>(i), q)});
    }
    std::sort(all.begin(), all.end(), closer);
    all.resize(std::min<std::size_t>(all.size(), static_cast<std::size_t>(k)));
    return all;
}

Pca::Pca(const Eigen::MatrixXd& X, int components) {
    if (X.rows() < 2) throw EmptyDataset("PCA needs at least two samples");
    mean_ = X.colwise().mean().transpose();
    const Eigen::MatrixXd C = X.rowwise() - mean_.transpose();
    const Eigen::MatrixXd cov = C.transpose() * C / static_cast<double>(X.rows() - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
    const Eigen::Index p = cov.rows();
    eigenvalues_ = es.eigenvalues().reverse();
    const Eigen::MatrixXd vecs = es.eigenvectors().rowwise().reverse();
    const Eigen::Index k = std::min<Eigen::Index>(components, p);
    basis_ = vecs.leftCols(k);
}

Eigen::VectorXd Pca::transform(const Eigen::VectorXd& x) const { return basis_.transpose() * (x - mean_); }

Eigen::VectorXd Pca::inverse(const Eigen::VectorXd& z) const { return basis_ * z + mean_; }

Eigen::MatrixXd Pca::transform_rows(const Eigen::MatrixXd& X) const {
    return (X.rowwise() - mean_.transpose()) * basis_;
}

std::vector<double> idw_weights(const std::vector<Neighbor>& nb) {
    std::vector<double> w(nb.size(), 0.0);
    int exact = -1;
    for (std::size_t i = 0; i < nb.size(); ++i) {
        if (nb[i].dist2 == 0.0 && (exact < 0 || nb[i].id < nb[exact].id)) exact = static_cast<int>(i);
    }
    if (exact >= 0) {
        w[exact] = 1.0;
        return w;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < nb.size(); ++i) total += (w[i] = 1.0 / nb[i].dist2);
    for (double& v : w) v /= total;
    return w;
}

Mahalanobis::Mahalanobis(const Eigen::MatrixXd& X) {
    if (X.rows() < 2) throw EmptyDataset("Mahalanobis distance needs at least two samples");
    mean_ = X.colwise().mean().transpose();
    const Eigen::MatrixXd C = X.rowwise() - mean_.transpose();
    Eigen::MatrixXd S = C.transpose() * C / static_cast<double>(X.rows() - 1);
    llt_.compute(S);
    if (llt_.info() != Eigen::Success) {
        S += 1e-8 * Eigen::MatrixXd::Identity(S.rows(), S.cols());
        llt_.compute(S);
        regularized_ = true;
        if (llt_.info() != Eigen::Success) throw DegenerateCovariance("covariance is not positive definite");
    }
}

double Mahalanobis::distance(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd y = llt_.matrixL().solve(x - mean_);
    return y.norm();
}

OodSplit mahalanobis_split(const Eigen::MatrixXd& train, const Eigen::MatrixXd& test, double pct) {
    const Mahalanobis m(train);
    std::vector<double> d(train.rows());
    for (Eigen::Index i = 0; i < train.rows(); ++i) d[i] = m.distance(train.row(i).transpose());
    OodSplit out;
    out.threshold = percentile(d, pct);
    for (Eigen::Index i = 0; i < test.rows(); ++i) {
        (m.distance(test.row(i).transpose()) > out.threshold ? out.ood : out.in_distribution)
            .push_back(static_cast<int>(i));
    }
    return out;
}

}  // namespace tscvx
