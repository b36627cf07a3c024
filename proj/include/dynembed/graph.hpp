#pragma once

#include "dynembed/partition.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dynembed {

/// Weighted, possibly directed and signed network held as a dense adjacency
/// matrix. weights()(i, j) is the weight of the edge i -> j.
class Graph {
public:
    Graph(std::vector<std::string> node_ids, Eigen::MatrixXd weights, bool directed);

    std::size_t size() const noexcept { return node_ids_.size(); }
    const std::vector<std::string>& node_ids() const noexcept { return node_ids_; }
    const Eigen::MatrixXd& weights() const noexcept { return weights_; }
    bool directed() const noexcept { return directed_; }
    bool is_signed() const noexcept { return signed_; }

    /// A·1
    Eigen::VectorXd out_strength() const { return weights_.rowwise().sum(); }
    /// Aᵀ·1
    Eigen::VectorXd in_strength() const { return weights_.colwise().sum().transpose(); }

    /// Convenience for tests and generators: ids "0".."n-1".
    static Graph from_matrix(Eigen::MatrixXd weights, bool directed);

private:
    std::vector<std::string> node_ids_;
    Eigen::MatrixXd weights_;
    bool directed_;
    bool signed_;
};

/// Reads `src<TAB>dst<TAB>weight` lines. `#` starts a comment line, blank
/// lines are skipped. Nodes are numbered by first appearance; repeated
/// (src, dst) pairs accumulate. Undirected input adds each line to both
/// (src, dst) and (dst, src).
Graph load_edge_list(std::istream& in, bool directed);
Graph load_edge_list(const std::filesystem::path& path, bool directed);

/// L = diag(A·1) - A. Unsigned graphs only.
Eigen::MatrixXd combinatorial_laplacian(const Graph& g);

/// L_rw = I - K⁻¹A, zero rows of K⁻¹A for nodes without out-edges.
Eigen::MatrixXd random_walk_laplacian(const Graph& g);

/// L_s = D_s - A with [D_s]_ii = Σ_k |A_ik|. Undirected graphs only.
Eigen::MatrixXd signed_laplacian(const Graph& g);

/// K_in⁻¹Aᵀ - I; rows of nodes without in-edges are -eᵢᵀ.
Eigen::MatrixXd influence_operator(const Graph& g);

/// M = K⁻¹A; rows of sinks are zero.
Eigen::MatrixXd discrete_transition_matrix(const Graph& g);

/// Row-stochastic transition matrix with uniform teleportation:
/// (1 - tau)·M' + tau·11ᵀ/n, where M' is M with sink rows set to 1ᵀ/n.
Eigen::MatrixXd teleportation_transition_matrix(const Graph& g, double tau);

/// I - teleportation_transition_matrix(g, tau).
Eigen::MatrixXd teleportation_laplacian(const Graph& g, double tau);

struct QuotientGraph {
    Partition cells;
    Eigen::MatrixXd indicator;           // H_EE, n x k
    Eigen::MatrixXd quotient_laplacian;  // H⁺ L H, k x k
};

struct EepCheck {
    double residual = 0.0;  // ‖L·H - H·L̂‖_max
    std::optional<QuotientGraph> quotient;

    bool accepted() const noexcept { return quotient.has_value(); }
};

inline constexpr double kEepTolerance = 1e-10;

/// Tests whether `cells` is an external equitable partition of an unsigned
/// undirected graph. On success the quotient Laplacian is returned.
EepCheck check_eep(const Graph& g, const Partition& cells);

/// Moore–Penrose pseudoinverse of the indicator, (HᵀH)⁻¹Hᵀ.
Eigen::MatrixXd indicator_pinv(const Eigen::MatrixXd& indicator);

}  // namespace dynembed
