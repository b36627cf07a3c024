#include "dynembed/graph.hpp"

#include "dynembed/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <string_view>
#include <unordered_map>
#include <unordered_set>

namespace dynembed {

namespace {

void require_unsigned(const Graph& g, const char* op) {
    if (g.is_signed())
        throw PreconditionError(std::string(op) + ": graph has negative weights; use signed_laplacian");
}

// K⁻¹A with zero rows for nodes of zero out-strength.
Eigen::MatrixXd row_normalised(const Eigen::MatrixXd& a) {
    Eigen::MatrixXd m = a;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const double s = m.row(i).sum();
        if (s > 0.0)
            m.row(i) /= s;
        else
            m.row(i).setZero();
    }
    return m;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

Graph::Graph(std::vector<std::string> node_ids, Eigen::MatrixXd weights, bool directed)
    : node_ids_(std::move(node_ids)), weights_(std::move(weights)), directed_(directed) {
    const auto n = static_cast<Eigen::Index>(node_ids_.size());
    if (weights_.rows() != n || weights_.cols() != n)
        throw PreconditionError("graph: weight matrix must be n x n with n = number of node ids");
    std::unordered_set<std::string> seen;
    for (const auto& id : node_ids_)
        if (!seen.insert(id).second) throw PreconditionError("graph: duplicate node id '" + id + "'");
    if (!weights_.allFinite()) throw PreconditionError("graph: non-finite weight");
    if (!directed_ && weights_ != weights_.transpose())
        throw PreconditionError("graph: undirected graph needs a symmetric weight matrix");
    signed_ = n > 0 && weights_.minCoeff() < 0.0;
}

Graph Graph::from_matrix(Eigen::MatrixXd weights, bool directed) {
    std::vector<std::string> ids;
    ids.reserve(static_cast<std::size_t>(weights.rows()));
    for (Eigen::Index i = 0; i < weights.rows(); ++i) ids.push_back(std::to_string(i));
    return Graph(std::move(ids), std::move(weights), directed);
}

Graph load_edge_list(std::istream& in, bool directed) {
    struct Edge {
        std::size_t src, dst;
        double w;
    };
    std::vector<std::string> ids;
    std::unordered_map<std::string, std::size_t> index;
    std::vector<Edge> edges;

    auto intern = [&](std::string_view label) {
        auto [it, inserted] = index.try_emplace(std::string(label), ids.size());
        if (inserted) ids.emplace_back(label);
        return it->second;
    };

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view s = trim(line);
        if (s.empty() || s.front() == '#') continue;

        std::vector<std::string_view> cols;
        for (std::size_t start = 0;;) {
            const auto tab = s.find('\t', start);
            cols.push_back(s.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
            if (tab == std::string_view::npos) break;
            start = tab + 1;
        }
        if (cols.size() != 3) throw ParseError(lineno, "expected src<TAB>dst<TAB>weight");
        const auto wtext = trim(cols[2]);
        if (cols[0].empty() || cols[1].empty()) throw ParseError(lineno, "empty node label");

        double w = 0.0;
        const auto [ptr, ec] = std::from_chars(wtext.data(), wtext.data() + wtext.size(), w);
        if (ec != std::errc() || ptr != wtext.data() + wtext.size())
            throw ParseError(lineno, "weight '" + std::string(wtext) + "' is not a number");
        if (!std::isfinite(w)) throw ParseError(lineno, "weight must be finite");

        const auto src = intern(cols[0]);
        const auto dst = intern(cols[1]);
        edges.push_back({src, dst, w});
    }

    const auto n = static_cast<Eigen::Index>(ids.size());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : edges) {
        const auto i = static_cast<Eigen::Index>(e.src), j = static_cast<Eigen::Index>(e.dst);
        a(i, j) += e.w;
        if (!directed && i != j) a(j, i) += e.w;
    }
    return Graph(std::move(ids), std::move(a), directed);
}

Graph load_edge_list(const std::filesystem::path& path, bool directed) {
    std::ifstream in(path);
    if (!in) throw PreconditionError("cannot open edge list " + path.string());
    return load_edge_list(in, directed);
}

Eigen::MatrixXd combinatorial_laplacian(const Graph& g) {
    require_unsigned(g, "combinatorial_laplacian");
    Eigen::MatrixXd l = -g.weights();
    l.diagonal() += g.out_strength();
    return l;
}

Eigen::MatrixXd random_walk_laplacian(const Graph& g) {
    require_unsigned(g, "random_walk_laplacian");
    const auto n = static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXd l = Eigen::MatrixXd::Identity(n, n) - row_normalised(g.weights());
    // Nodes without out-edges get an all-zero row.
    const Eigen::VectorXd out = g.out_strength();
    for (Eigen::Index i = 0; i < n; ++i)
        if (out(i) == 0.0) l(i, i) = 0.0;
    return l;
}

Eigen::MatrixXd signed_laplacian(const Graph& g) {
    if (g.directed()) throw PreconditionError("signed_laplacian: graph must be undirected");
    Eigen::MatrixXd l = -g.weights();
    l.diagonal() += g.weights().cwiseAbs().rowwise().sum();
    return l;
}

Eigen::MatrixXd influence_operator(const Graph& g) {
    require_unsigned(g, "influence_operator");
    const auto n = static_cast<Eigen::Index>(g.size());
    return row_normalised(g.weights().transpose()) - Eigen::MatrixXd::Identity(n, n);
}

Eigen::MatrixXd discrete_transition_matrix(const Graph& g) {
    require_unsigned(g, "discrete_transition_matrix");
    return row_normalised(g.weights());
}

Eigen::MatrixXd teleportation_transition_matrix(const Graph& g, double tau) {
    require_unsigned(g, "teleportation_laplacian");
    if (!(tau >= 0.0 && tau < 1.0)) throw PreconditionError("teleportation rate must lie in [0, 1)");
    const auto n = static_cast<Eigen::Index>(g.size());
    const double uniform = 1.0 / static_cast<double>(n);
    Eigen::MatrixXd m = row_normalised(g.weights());
    for (Eigen::Index i = 0; i < n; ++i)
        if (g.weights().row(i).sum() <= 0.0) m.row(i).setConstant(uniform);
    return (1.0 - tau) * m + Eigen::MatrixXd::Constant(n, n, tau * uniform);
}

Eigen::MatrixXd teleportation_laplacian(const Graph& g, double tau) {
    const auto n = static_cast<Eigen::Index>(g.size());
    return Eigen::MatrixXd::Identity(n, n) - teleportation_transition_matrix(g, tau);
}

Eigen::MatrixXd indicator_pinv(const Eigen::MatrixXd& indicator) {
    const Eigen::VectorXd sizes = indicator.colwise().sum().transpose();
    if ((sizes.array() <= 0.0).any()) throw PreconditionError("indicator has an empty cell");
    return sizes.cwiseInverse().asDiagonal() * indicator.transpose();
}

EepCheck check_eep(const Graph& g, const Partition& cells) {
    if (g.directed()) throw PreconditionError("check_eep: graph must be undirected");
    if (cells.size() != g.size()) throw PreconditionError("check_eep: partition size does not match graph");
    const Eigen::MatrixXd l = combinatorial_laplacian(g);
    const Eigen::MatrixXd h = cells.indicator();
    const Eigen::MatrixXd lhat = indicator_pinv(h) * l * h;

    EepCheck result;
    result.residual = (l * h - h * lhat).cwiseAbs().maxCoeff();
    if (result.residual <= kEepTolerance) result.quotient = QuotientGraph{cells, h, lhat};
    return result;
}

}  // namespace dynembed
