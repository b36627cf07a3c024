#include "dynembed/embedding.hpp"

#include "dynembed/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dynembed {

namespace {

// Flips v so that its first entry of largest magnitude is positive.
void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    const double top = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) >= top - 1e-12) {
            if (v(i) < 0.0) v = -v;
            return;
        }
    }
}

std::vector<double> average_ranks(const std::vector<double>& x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
    std::vector<double> ranks(x.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

}  // namespace

SpectralDecomp decompose(const SimilarityMatrix& psi) {
    const auto& m = psi.values;
    if (m.rows() != m.cols()) throw PreconditionError("decompose: similarity must be square");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance * scale)
        throw PreconditionError("decompose: similarity is not symmetric");

    const auto n = m.rows();
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) throw NumericalError("decompose: eigensolver failed");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](auto a, auto b) { return es.eigenvalues()(a) > es.eigenvalues()(b); });

    SpectralDecomp out;
    out.source = psi.time;
    out.centering = psi.centering;
    out.eigenvalues.resize(n);
    out.eigenvectors.resize(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const auto src = order[static_cast<std::size_t>(k)];
        out.eigenvalues(k) = std::max(0.0, es.eigenvalues()(src));
        out.eigenvectors.col(k) = es.eigenvectors().col(src);
        fix_sign(out.eigenvectors.col(k));
    }

    const double gap_tol = 1e-10 * (n > 0 ? out.eigenvalues(0) : 0.0);
    for (Eigen::Index k = 0; k + 1 < n;) {
        Eigen::Index last = k;
        while (last + 1 < n && out.eigenvalues(last) - out.eigenvalues(last + 1) <= gap_tol) ++last;
        if (last > k) out.degenerate.emplace_back(k, last);
        k = last + 1;
    }
    return out;
}

EmbeddingCoords embed(const SpectralDecomp& decomp, Eigen::Index c) {
    const auto n = decomp.eigenvalues.size();
    if (c < 1 || c > n) throw PreconditionError("embed: dimension must lie in [1, n]");
    EmbeddingCoords out;
    out.c = c;
    out.source = decomp.source;
    out.coords = decomp.eigenvectors.leftCols(c) * decomp.eigenvalues.head(c).cwiseSqrt().asDiagonal();
    const double total = decomp.eigenvalues.sum();
    out.truncation_error = total > 0.0 ? decomp.eigenvalues.tail(n - c).sum() / total : 0.0;
    out.sign.assign(static_cast<std::size_t>(c), 1);
    return out;
}

std::vector<RankEntry> rank_by_coordinate(const EmbeddingCoords& emb, const std::vector<std::string>& node_ids,
                                          Eigen::Index dim) {
    if (dim < 0 || dim >= emb.c) throw PreconditionError("rank_by_coordinate: dimension out of range");
    if (static_cast<Eigen::Index>(node_ids.size()) != emb.coords.rows())
        throw PreconditionError("rank_by_coordinate: node id count does not match embedding");
    std::vector<RankEntry> out;
    out.reserve(node_ids.size());
    for (std::size_t i = 0; i < node_ids.size(); ++i)
        out.push_back({i, emb.coords(static_cast<Eigen::Index>(i), dim)});
    std::sort(out.begin(), out.end(), [&](const RankEntry& a, const RankEntry& b) {
        if (a.score != b.score) return a.score > b.score;
        return node_ids[a.node] < node_ids[b.node];
    });
    return out;
}

std::vector<EmbeddingCoords> embedding_trajectory(const LinearSystem& sys, const std::vector<double>& times,
                                                  Eigen::Index c) {
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw PreconditionError("embedding_trajectory: times must increase strictly");

    std::vector<EmbeddingCoords> out;
    out.reserve(times.size());
    Eigen::MatrixXd prev;
    for (double t : times) {
        SpectralDecomp d = decompose(similarity_at(sys, t));
        EmbeddingCoords e = embed(d, c);
        Eigen::MatrixXd v = d.eigenvectors.leftCols(c);
        if (prev.size() != 0) {
            for (Eigen::Index k = 0; k < c; ++k) {
                if (v.col(k).dot(prev.col(k)) < 0.0) {
                    v.col(k) = -v.col(k);
                    e.coords.col(k) = -e.coords.col(k);
                    e.sign[static_cast<std::size_t>(k)] = -1;
                }
            }
        }
        prev = std::move(v);
        out.push_back(std::move(e));
    }
    return out;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw PreconditionError("spearman: sequences differ in length");
    if (x.size() < 2) throw PreconditionError("spearman: need at least two observations");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
    const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw PreconditionError("spearman: constant sequence");
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace dynembed
