#pragma once

#include "dynembed/linsys.hpp"
#include "dynembed/similarity.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dynembed {

/// Eigendecomposition of a similarity matrix, eigenvalues descending and
/// clamped at zero. Each eigenvector has its largest-magnitude entry positive.
struct SpectralDecomp {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;  // column k pairs with eigenvalues(k)
    TimeSpec source;
    std::optional<Centering> centering;
    /// Index ranges [first, last] of numerically degenerate eigenvalue
    /// clusters; individual coordinates inside a cluster are not identifiable.
    std::vector<std::pair<Eigen::Index, Eigen::Index>> degenerate;
};

struct EmbeddingCoords {
    Eigen::MatrixXd coords;  // n×c, coords(i, k) = √μ_k v_{k,i}
    Eigen::Index c = 0;
    double truncation_error = 0.0;  // Σ_{k>c} μ_k / Σ_k μ_k
    /// +1/-1 per retained vector relative to the decomposition it came from.
    std::vector<int> sign;
    TimeSpec source;
};

SpectralDecomp decompose(const SimilarityMatrix& psi);

EmbeddingCoords embed(const SpectralDecomp& decomp, Eigen::Index c);

struct RankEntry {
    std::size_t node;
    double score;
};

/// Orders nodes by descending coordinate `dim` (0-based); equal scores fall
/// back to lexicographic node id.
std::vector<RankEntry> rank_by_coordinate(const EmbeddingCoords& emb, const std::vector<std::string>& node_ids,
                                          Eigen::Index dim);

/// Embeds Ψ(t) for each t of a strictly increasing grid. Signs after the first
/// time follow the predecessor (maximal dot product) rather than the
/// largest-entry rule.
std::vector<EmbeddingCoords> embedding_trajectory(const LinearSystem& sys, const std::vector<double>& times,
                                                  Eigen::Index c);

/// Spearman rank correlation with average ranks for ties.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace dynembed
