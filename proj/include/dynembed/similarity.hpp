#pragma once

#include "dynembed/graph.hpp"
#include "dynembed/linsys.hpp"
#include "dynembed/partition.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

namespace dynembed {

struct TimeSpec {
    enum class Kind { Point, Interval };
    Kind kind = Kind::Point;
    double t = 0.0;  // point time, or right end of [0, t]

    static TimeSpec point(double t) { return {Kind::Point, t}; }
    static TimeSpec interval(double t) { return {Kind::Interval, t}; }
};

/// Projector weighting I - α ννᵀ replacing the system's W.
struct Centering {
    Eigen::VectorXd nu;
    double alpha = 1.0;

    /// ν = 1/√n
    static Centering uniform(Eigen::Index n, double alpha = 1.0);
    Eigen::MatrixXd projector() const;
};

struct SimilarityMatrix {
    Eigen::MatrixXd values;
    TimeSpec time;
    std::optional<Centering> centering;
    std::string weighting = "identity";
};

struct DistanceMatrix {
    Eigen::MatrixXd values;  // squared distances D²
    Eigen::VectorXd z;       // diagonal of the source similarity
};

struct Gramian {
    Eigen::MatrixXd values;
    double horizon = 0.0;
};

struct DiffusionStats {
    Eigen::RowVectorXd pi;   // stationary distribution
    Eigen::MatrixXd Pi;      // diag(π)
    Eigen::MatrixXd Sigma0;  // Π - πᵀπ
    Eigen::MatrixXd P_t;     // exp(-L t)
};

// Tolerances shared by every similarity computation.
inline constexpr double kSymmetryTolerance = 1e-12;   // relative to ‖Ψ‖
inline constexpr double kPsdTolerance = 1e-10;        // relative to λ_max
inline constexpr double kDistanceClamp = 1e-10;       // absolute

/// Ψ(t) = Bᵀ e^{Aᵀt} CᵀWC e^{At} B, symmetrised.
SimilarityMatrix similarity_at(const LinearSystem& sys, double t);

/// Ψ⊥(t) = Yᵀ (I - α ννᵀ) Y with Y = C e^{At} B. Ignores the system's W.
SimilarityMatrix centered_similarity_at(const LinearSystem& sys, double t, const Centering& centering);

/// D²_ij = ψ_ii + ψ_jj - 2ψ_ij; entries in [-1e-10, 0) are clamped to 0 and
/// anything more negative raises NumericalError.
DistanceMatrix distance_squared(const SimilarityMatrix& psi);

/// Ψ_[0,t] = Bᵀ (∫₀ᵗ e^{Aᵀs} Q e^{As} ds) B, Q = CᵀWC (or Cᵀ(I - ανν ᵀ)C when
/// centred). Continuous mode only.
SimilarityMatrix integrated_similarity(const LinearSystem& sys, double t,
                                       const std::optional<Centering>& centering = std::nullopt);

/// Discrete analogue of the integrated similarity: Σ_{s=0}^{t} Ψ(s).
SimilarityMatrix summed_similarity(const LinearSystem& sys, double t,
                                   const std::optional<Centering>& centering = std::nullopt);

/// D²_[0,t] = 1zᵀ + z1ᵀ - 2Ψ_[0,t] with z = diag(Ψ_[0,t]).
DistanceMatrix integrated_distance(const SimilarityMatrix& psi_int);

/// G_O(t) = ∫₀ᵗ e^{Aᵀs} CᵀC e^{As} ds.
Gramian observability_gramian(const LinearSystem& sys, double t);

/// ∫₀ᵗ e^{Aᵀs} Q e^{As} ds evaluated with a Van Loan block exponential on a
/// short step followed by interval doubling.
Eigen::MatrixXd gramian_integral(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q, double t);

/// ‖(Ψ(t+h) - Ψ(t-h))/(2h) - (AᵀΨ(t) + Ψ(t)A)‖_max. Requires B = I.
double lyapunov_residual(const LinearSystem& sys, double t, double h);

/// Stationary statistics and transition matrix of the diffusion ṗ = -pL.
/// Undirected graphs use the combinatorial Laplacian; with `teleport` the
/// teleportation Laplacian is used instead. Directed graphs without
/// teleportation need a unique stationary distribution.
DiffusionStats diffusion_stats(const Graph& g, double t, std::optional<double> teleport = std::nullopt);

/// Σ(t) = (Π - πᵀπ) exp(-L t).
Eigen::MatrixXd autocovariance(const Graph& g, double t, std::optional<double> teleport = std::nullopt);

/// κ_ij = (eᵢ - eⱼ)ᵀ L† (eᵢ - eⱼ) for a connected undirected unsigned graph.
Eigen::MatrixXd resistance_distance(const Graph& g);

struct EepBlockReport {
    std::vector<double> times;
    std::vector<double> within_cell_distance;  // max within-cell D²(t) per time
    std::vector<double> quotient_mismatch;     // ‖Ψ_full - Ψ_quotient‖_max per time
    double max_within_cell = 0.0;
    double max_quotient_mismatch = 0.0;
};

/// Observes the diffusion through the cells of an EEP (C = H⁺) and reports
/// how far nodes of a cell are from identical responses.
EepBlockReport eep_block_check(const Graph& g, const Partition& cells,
                               const std::vector<double>& times = {0.1, 1.0, 10.0});

/// Smallest eigenvalue of a symmetric matrix relative to its largest magnitude.
double relative_min_eigenvalue(const Eigen::MatrixXd& sym);

}  // namespace dynembed
