#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "trajmine/network.hpp"

namespace trajmine {

struct ClusterResult {
    int k_selected = 0;
    std::vector<int> labels;       // length n, values in [0, k_selected)
    std::map<int, double> ch_scores;
    Eigen::MatrixXd embedding;     // n x k_selected, kept for audit
};

/// Spectral embedding of an affinity matrix: rows of the k eigenvectors of
/// the smallest eigenvalues of the symmetric normalized Laplacian
/// L = I - D^-1/2 A D^-1/2, row-normalized to unit length. Zero-degree rows
/// embed as zero rows. Eigenvector signs are fixed (largest-magnitude
/// component positive) so the embedding is deterministic.
/// Throws when n < k, the matrix is not symmetric, or entries are negative.
Eigen::MatrixXd spectral_embed(const SimilarityMatrix& affinity, int k);

/// Lloyd's algorithm with k-means++ seeding; best of `restarts` runs by
/// within-cluster sum of squares; converged when every centroid moves less
/// than 1e-9 or after 300 iterations. Deterministic for a fixed seed.
/// Throws when k exceeds the number of distinct points.
std::vector<int> kmeans(const Eigen::MatrixXd& points, int k, std::uint64_t seed,
                        int restarts = 10);

/// Between/within dispersion ratio; 0 when all cluster centroids coincide,
/// +infinity for a perfect (zero within-dispersion) separation.
/// Requires k >= 2, n > k, and no empty cluster.
double calinski_harabasz(const Eigen::MatrixXd& points, const std::vector<int>& labels);

/// Sweeps k in [k_min, min(k_max, n-1)]: embed, k-means, CH on the embedded
/// coordinates; selects argmax CH (ties prefer the smaller k).
ClusterResult select_k_and_cluster(const SimilarityMatrix& affinity, int k_min = 2,
                                   int k_max = 10, std::uint64_t seed = 0, int restarts = 10);

}  // namespace trajmine
