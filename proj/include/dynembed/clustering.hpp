#pragma once

#include "dynembed/graph.hpp"
#include "dynembed/linsys.hpp"
#include "dynembed/partition.hpp"
#include "dynembed/similarity.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace dynembed {

/// r(H) = trace Hᵀ Ψ H.
double quality_score(const Eigen::MatrixXd& psi, const Partition& p);
inline double quality_score(const SimilarityMatrix& psi, const Partition& p) {
    return quality_score(psi.values, p);
}

/// Quality of the form  trace Hᵀ [F - α·abᵀ] H.
///
/// The form is closed under contraction: for a partition H of the current
/// nodes, (HᵀFH, Hᵀa, Hᵀb) describes the coarse-grained problem exactly.
struct QualityConfig {
    Eigen::MatrixXd F;
    Eigen::VectorXd a;
    Eigen::VectorXd b;
    double alpha = 1.0;
    /// Slack weights γ_k used to build (a, b), kept for provenance.
    std::optional<Eigen::VectorXd> gamma;

    Eigen::Index size() const noexcept { return F.rows(); }
    double evaluate(const Partition& p) const;
    QualityConfig aggregate(const Partition& p) const;

    /// F = Ψ, no null term.
    static QualityConfig from_similarity(const Eigen::MatrixXd& psi);
    /// F = YᵀY, a = b = Yᵀν, so that the quality equals trace HᵀYᵀ(I - αννᵀ)YH.
    static QualityConfig from_responses(const Eigen::MatrixXd& y, const Eigen::VectorXd& nu, double alpha);
    /// F = Ψ, a = z̃ = diag(ΦᵀΓΦ), b = 1 with Φ = Λ^{1/2}Vᵀ. γ = e₁ gives the
    /// rank-one correction that turns exp(-2Lt) into Markov stability.
    static QualityConfig from_slack(const Eigen::MatrixXd& psi, const Eigen::VectorXd& gamma);
    /// Newman–Girvan modularity of an undirected graph: F = A/2m, a = b = d/2m.
    static QualityConfig modularity(const Graph& g);
};

struct LouvainOptions {
    std::uint64_t seed = 0;
    /// Moves must improve the quality by more than this times the scale of F.
    double min_gain = 1e-12;
    /// Checks after every accepted move that the tracked quality matches a
    /// fresh evaluation. Expensive; meant for tests.
    bool verify = false;
};

struct LouvainResult {
    Partition partition;
    double quality = 0.0;
    std::size_t levels = 0;
    std::size_t moves = 0;
};

/// Louvain heuristic on a dense QualityConfig: greedy node moves in a seeded
/// random order, contraction, repeat. Finishes with a node-level sweep so
/// the result is locally optimal with respect to single-node moves.
LouvainResult louvain_optimize(const QualityConfig& q, const LouvainOptions& opts = {});

struct KMeansOptions {
    std::uint64_t seed = 0;
    int restarts = 50;
    int max_iterations = 300;
    double tolerance = 1e-9;  // relative inertia change
};

struct KMeansResult {
    std::vector<int> labels;
    Eigen::MatrixXd centroids;
    double inertia = 0.0;
};

/// k-means with k-means++ seeding; best inertia over all restarts.
KMeansResult kmeans(const Eigen::MatrixXd& points, int k, const KMeansOptions& opts = {});

enum class SpectralSource {
    Laplacian,   // use the c eigenvectors with smallest eigenvalues
    Similarity,  // use the c eigenvectors with largest eigenvalues
};

Partition spectral_partition(const Eigen::MatrixXd& matrix, SpectralSource source, int c, int k,
                             const KMeansOptions& opts = {});

/// Variation of information in nats, divided by log n. Returns a value in [0, 1].
double variation_of_information(const Partition& p1, const Partition& p2);

struct ScanOptions {
    std::size_t seeds = 10;
    std::uint64_t base_seed = 0;
    double plateau_vi = 0.05;
    std::size_t min_plateau_points = 2;
    std::size_t threads = 0;  // 0: DYNEMBED_THREADS or hardware concurrency
};

struct Plateau {
    std::size_t first = 0;  // grid indices, inclusive
    std::size_t last = 0;
    std::size_t communities = 0;
    double mean_vi = 0.0;
};

struct ScanResult {
    std::vector<double> times;
    std::vector<std::vector<LouvainResult>> runs;  // runs[t][seed]
    std::vector<Partition> best;                    // highest quality per time
    std::vector<std::size_t> n_communities;         // modal group count per time
    Eigen::MatrixXd vi_matrix;                      // mean VI between seed ensembles
    std::vector<Plateau> plateaus;
};

/// Optimises trace HᵀΨ⊥(t)H for every t with several Louvain seeds and
/// identifies intervals where the partitions are robust.
ScanResult time_scan(const LinearSystem& sys, const std::vector<double>& times, const Centering& centering,
                     const ScanOptions& opts = {});

/// Same, but over precomputed quality configurations (one per time).
ScanResult time_scan(const std::vector<QualityConfig>& configs, const std::vector<double>& times,
                     const ScanOptions& opts = {});

/// Worker count: DYNEMBED_THREADS if set, else hardware concurrency.
std::size_t default_thread_count();

}  // namespace dynembed
