#include "trajmine/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "trajmine/rng.hpp"

namespace trajmine {

Eigen::MatrixXd spectral_embed(const SimilarityMatrix& affinity, int k) {
    const int n = affinity.n;
    if (n < k)
        throw std::invalid_argument("spectral_embed: need n >= k, got n=" +
                                    std::to_string(n) + " k=" + std::to_string(k));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(affinity.at(i, j) - affinity.at(j, i)) > 1e-12)
                throw std::invalid_argument("spectral_embed: affinity not symmetric");
    for (double v : affinity.values)
        if (v < 0.0) throw std::invalid_argument("spectral_embed: negative affinity entry");

    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = affinity.at(i, j);

    Eigen::VectorXd degree = a.rowwise().sum();
    Eigen::VectorXd dinv_sqrt(n);
    for (int i = 0; i < n; ++i)
        dinv_sqrt(i) = degree(i) > 0.0 ? 1.0 / std::sqrt(degree(i)) : 0.0;

    Eigen::MatrixXd lap =
        Eigen::MatrixXd::Identity(n, n) -
        dinv_sqrt.asDiagonal() * a * dinv_sqrt.asDiagonal();
    // Exact symmetry keeps the solver deterministic across expression trees.
    lap = ((lap + lap.transpose()) * 0.5).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(lap);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("spectral_embed: eigendecomposition failed");

    Eigen::MatrixXd embedding = solver.eigenvectors().leftCols(k);
    // Fix each eigenvector's sign: largest-magnitude component positive.
    for (int c = 0; c < k; ++c) {
        int arg = 0;
        double best = -1.0;
        for (int i = 0; i < n; ++i) {
            const double mag = std::abs(embedding(i, c));
            if (mag > best) {
                best = mag;
                arg = i;
            }
        }
        if (embedding(arg, c) < 0.0) embedding.col(c) = -embedding.col(c);
    }
    for (int i = 0; i < n; ++i) {
        if (degree(i) <= 0.0) {
            embedding.row(i).setZero();  // isolated rows land together at the origin
            continue;
        }
        const double norm = embedding.row(i).norm();
        if (norm > 0.0) embedding.row(i) /= norm;
    }
    return embedding;
}

namespace {

int count_distinct_rows(const Eigen::MatrixXd& points) {
    std::set<std::vector<double>> rows;
    for (int i = 0; i < points.rows(); ++i) {
        std::vector<double> row(points.cols());
        for (int j = 0; j < points.cols(); ++j) row[j] = points(i, j);
        rows.insert(std::move(row));
    }
    return static_cast<int>(rows.size());
}

double sq_dist(const Eigen::MatrixXd& points, int i, const Eigen::RowVectorXd& c) {
    return (points.row(i) - c).squaredNorm();
}

Eigen::MatrixXd seed_centroids_pp(const Eigen::MatrixXd& points, int k, Rng& rng) {
    const int n = static_cast<int>(points.rows());
    Eigen::MatrixXd centroids(k, points.cols());
    centroids.row(0) = points.row(static_cast<int>(rng.next_below(n)));
    std::vector<double> d2(n);
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            for (int j = 0; j < c; ++j)
                best = std::min(best, sq_dist(points, i, centroids.row(j)));
            d2[i] = best;
            total += best;
        }
        int pick = -1;
        if (total > 0.0) {
            const double r = rng.next_double() * total;
            double acc = 0.0;
            for (int i = 0; i < n; ++i) {
                acc += d2[i];
                if (r < acc) {
                    pick = i;
                    break;
                }
            }
            if (pick < 0) {  // r landed on accumulated rounding; take last positive
                for (int i = n - 1; i >= 0; --i)
                    if (d2[i] > 0.0) {
                        pick = i;
                        break;
                    }
            }
        }
        if (pick < 0) pick = static_cast<int>(rng.next_below(n));
        centroids.row(c) = points.row(pick);
    }
    return centroids;
}

struct LloydResult {
    std::vector<int> labels;
    double wcss = std::numeric_limits<double>::infinity();
};

LloydResult lloyd(const Eigen::MatrixXd& points, int k, Rng& rng) {
    const int n = static_cast<int>(points.rows());
    Eigen::MatrixXd centroids = seed_centroids_pp(points, k, rng);
    std::vector<int> labels(n, 0);
    for (int iter = 0; iter < 300; ++iter) {
        for (int i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int arg = 0;
            for (int c = 0; c < k; ++c) {
                const double d = sq_dist(points, i, centroids.row(c));
                if (d < best) {
                    best = d;
                    arg = c;
                }
            }
            labels[i] = arg;
        }
        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
        std::vector<int> counts(k, 0);
        for (int i = 0; i < n; ++i) {
            sums.row(labels[i]) += points.row(i);
            ++counts[labels[i]];
        }
        // Revive an emptied cluster with the point farthest from its centroid.
        for (int c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            double far = -1.0;
            int steal = 0;
            for (int i = 0; i < n; ++i) {
                if (counts[labels[i]] <= 1) continue;
                const double d = sq_dist(points, i, centroids.row(labels[i]));
                if (d > far) {
                    far = d;
                    steal = i;
                }
            }
            sums.row(labels[steal]) -= points.row(steal);
            --counts[labels[steal]];
            labels[steal] = c;
            sums.row(c) = points.row(steal);
            counts[c] = 1;
        }
        double shift = 0.0;
        for (int c = 0; c < k; ++c) {
            Eigen::RowVectorXd next = sums.row(c) / counts[c];
            shift = std::max(shift, (next - centroids.row(c)).norm());
            centroids.row(c) = next;
        }
        if (shift < 1e-9) break;
    }
    LloydResult res;
    res.labels = std::move(labels);
    res.wcss = 0.0;
    for (int i = 0; i < n; ++i) res.wcss += sq_dist(points, i, centroids.row(res.labels[i]));
    return res;
}

}  // namespace

std::vector<int> kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                        int restarts) {
    if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
    if (k > count_distinct_rows(points))
        throw std::invalid_argument("kmeans: k exceeds distinct point count");
    LloydResult best;
    for (int r = 0; r < restarts; ++r) {
        Rng rng(Rng::derive_seed(seed, static_cast<std::uint64_t>(r)));
        LloydResult run = lloyd(points, k, rng);
        if (run.wcss < best.wcss) best = std::move(run);
    }
    return best.labels;
}

double calinski_harabasz(const Eigen::MatrixXd& points, const std::vector<int>& labels) {
    const int n = static_cast<int>(points.rows());
    if (static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("calinski_harabasz: labels length mismatch");
    const int k = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    if (k < 2) throw std::invalid_argument("calinski_harabasz: needs k >= 2");
    if (n <= k) throw std::invalid_argument("calinski_harabasz: needs n > k");

    std::vector<int> counts(k, 0);
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
    for (int i = 0; i < n; ++i) {
        ++counts[labels[i]];
        sums.row(labels[i]) += points.row(i);
    }
    for (int c = 0; c < k; ++c)
        if (counts[c] == 0) throw std::invalid_argument("calinski_harabasz: empty cluster");

    const Eigen::RowVectorXd global = points.colwise().mean();
    double between = 0.0, within = 0.0;
    for (int c = 0; c < k; ++c) {
        const Eigen::RowVectorXd centroid = sums.row(c) / counts[c];
        between += counts[c] * (centroid - global).squaredNorm();
    }
    for (int i = 0; i < n; ++i) {
        const Eigen::RowVectorXd centroid = sums.row(labels[i]) / counts[labels[i]];
        within += (points.row(i) - centroid).squaredNorm();
    }
    if (between == 0.0) return 0.0;  // all centroids coincide
    if (within == 0.0) return std::numeric_limits<double>::infinity();
    return (between / (k - 1)) / (within / (n - k));
}

ClusterResult select_k_and_cluster(const SimilarityMatrix& affinity, int k_min, int k_max,
                                   std::uint64_t seed, int restarts) {
    const int n = affinity.n;
    if (n < k_min + 1)
        throw std::invalid_argument("select_k_and_cluster: need at least k_min+1 = " +
                                    std::to_string(k_min + 1) + " trajectories, got " +
                                    std::to_string(n));
    const int hi = std::min(k_max, n - 1);

    ClusterResult result;
    std::map<int, std::vector<int>> labels_by_k;
    std::map<int, Eigen::MatrixXd> embedding_by_k;
    for (int k = k_min; k <= hi; ++k) {
        Eigen::MatrixXd emb = spectral_embed(affinity, k);
        std::vector<int> labels;
        try {
            labels = kmeans(emb, k, seed, restarts);
        } catch (const std::invalid_argument&) {
            continue;  // fewer distinct embedded points than k; skip this k
        }
        result.ch_scores[k] = calinski_harabasz(emb, labels);
        labels_by_k[k] = std::move(labels);
        embedding_by_k[k] = std::move(emb);
    }
    if (result.ch_scores.empty())
        throw std::runtime_error("select_k_and_cluster: no feasible k in sweep");

    int best_k = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& [k, score] : result.ch_scores) {
        if (score > best) {  // map iterates ascending k, so ties keep the smaller k
            best = score;
            best_k = k;
        }
    }
    result.k_selected = best_k;
    result.labels = labels_by_k[best_k];
    result.embedding = embedding_by_k[best_k];
    return result;
}

}  // namespace trajmine
