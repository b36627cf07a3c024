#pragma once

// Reference computations used by the tests. Everything here is deliberately
// naive and shares no code with the library.

#include "dynembed/graph.hpp"
#include "dynembed/linsys.hpp"
#include "dynembed/partition.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracle {

using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;

// exp(A) by a 60-term Taylor series in long double after scaling A by a
// power of two, followed by repeated squaring.
inline Eigen::MatrixXd taylor_expm(const Eigen::MatrixXd& a) {
    MatL x = a.cast<long double>();
    const long double norm = x.cwiseAbs().colwise().sum().maxCoeff();
    int s = 0;
    while (std::ldexp(norm, -s) > 0.5L) ++s;
    x /= std::ldexp(1.0L, s);
    MatL term = MatL::Identity(x.rows(), x.cols());
    MatL sum = term;
    for (int k = 1; k <= 60; ++k) {
        term = (term * x / static_cast<long double>(k)).eval();
        sum += term;
    }
    for (int i = 0; i < s; ++i) sum = (sum * sum).eval();
    return sum.cast<double>();
}

inline Eigen::MatrixXd similarity(const dynembed::LinearSystem& sys, double t) {
    Eigen::MatrixXd prop;
    if (sys.mode() == dynembed::TimeMode::Discrete) {
        prop = Eigen::MatrixXd::Identity(sys.state_dim(), sys.state_dim());
        for (int s = 0; s < static_cast<int>(t); ++s) prop = (sys.a() * prop).eval();
    } else {
        prop = taylor_expm(sys.a() * t);
    }
    const Eigen::MatrixXd y = sys.c() * prop * sys.b();
    return y.transpose() * sys.w() * y;
}

// Adaptive Simpson quadrature of a matrix-valued integrand.
inline Eigen::MatrixXd simpson(const std::function<Eigen::MatrixXd(double)>& f, double a, double b, double tol,
                               int depth = 30) {
    const std::function<Eigen::MatrixXd(double, double, const Eigen::MatrixXd&, const Eigen::MatrixXd&,
                                        const Eigen::MatrixXd&, const Eigen::MatrixXd&, double, int)>
        rec = [&](double lo, double hi, const Eigen::MatrixXd& flo, const Eigen::MatrixXd& fmid,
                  const Eigen::MatrixXd& fhi, const Eigen::MatrixXd& whole, double eps, int d) -> Eigen::MatrixXd {
        const double mid = 0.5 * (lo + hi);
        const Eigen::MatrixXd fl = f(0.5 * (lo + mid)), fr = f(0.5 * (mid + hi));
        const Eigen::MatrixXd left = (mid - lo) / 6.0 * (flo + 4.0 * fl + fmid);
        const Eigen::MatrixXd right = (hi - mid) / 6.0 * (fmid + 4.0 * fr + fhi);
        const Eigen::MatrixXd diff = left + right - whole;
        if (d <= 0 || diff.cwiseAbs().maxCoeff() <= 15.0 * eps) return left + right + diff / 15.0;
        return rec(lo, mid, flo, fl, fmid, left, eps / 2, d - 1) + rec(mid, hi, fmid, fr, fhi, right, eps / 2, d - 1);
    };
    const Eigen::MatrixXd fa = f(a), fm = f(0.5 * (a + b)), fb = f(b);
    const Eigen::MatrixXd whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return rec(a, b, fa, fm, fb, whole, tol, depth);
}

// Effective resistances from an SVD pseudoinverse of L.
inline Eigen::MatrixXd resistance(const Eigen::MatrixXd& laplacian) {
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(laplacian, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const auto& s = svd.singularValues();
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(s.size());
    for (Eigen::Index i = 0; i < s.size(); ++i)
        if (s(i) > 1e-10 * s(0)) inv(i) = 1.0 / s(i);
    const Eigen::MatrixXd pinv = svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
    const auto n = laplacian.rows();
    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) k(i, j) = pinv(i, i) + pinv(j, j) - 2.0 * pinv(i, j);
    return k;
}

// All set partitions of {0..n-1} as restricted growth strings.
inline std::vector<std::vector<int>> set_partitions(int n) {
    std::vector<std::vector<int>> out;
    std::vector<int> a(static_cast<std::size_t>(n), 0);
    std::function<void(int, int)> rec = [&](int i, int max) {
        if (i == n) {
            out.push_back(a);
            return;
        }
        for (int v = 0; v <= max + 1; ++v) {
            a[static_cast<std::size_t>(i)] = v;
            rec(i + 1, std::max(max, v));
        }
    };
    if (n == 0) return {{}};
    a[0] = 0;
    rec(1, 0);
    return out;
}

// Σ_C Σ_{i,j∈C} M_ij by explicit loops over group members.
inline double block_sum(const Eigen::MatrixXd& m, const std::vector<int>& labels) {
    double q = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i)
        for (std::size_t j = 0; j < labels.size(); ++j)
            if (labels[i] == labels[j]) q += m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    return q;
}

// Markov stability of an undirected connected graph at time t:
// trace Hᵀ[Π exp(-Lt) - πᵀπ]H with π = 1ᵀ/n for the combinatorial Laplacian.
inline double markov_stability(const Eigen::MatrixXd& adjacency, double t, const std::vector<int>& labels) {
    const auto n = adjacency.rows();
    const Eigen::MatrixXd l = Eigen::MatrixXd(adjacency.rowwise().sum().asDiagonal()) - adjacency;
    const double inv_n = 1.0 / static_cast<double>(n);
    const Eigen::MatrixXd r = inv_n * taylor_expm(-l * t) - Eigen::MatrixXd::Constant(n, n, inv_n * inv_n);
    return block_sum(r, labels);
}

// Exhaustive optimum of trace Hᵀ[F - α abᵀ]H.
inline double best_quality(const Eigen::MatrixXd& f, const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                           double alpha) {
    double best = -1e300;
    for (const auto& labels : set_partitions(static_cast<int>(f.rows()))) {
        const int k = *std::max_element(labels.begin(), labels.end()) + 1;
        std::vector<double> sa(static_cast<std::size_t>(k), 0.0), sb(static_cast<std::size_t>(k), 0.0);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            sa[static_cast<std::size_t>(labels[i])] += a(static_cast<Eigen::Index>(i));
            sb[static_cast<std::size_t>(labels[i])] += b(static_cast<Eigen::Index>(i));
        }
        double q = block_sum(f, labels);
        for (int c = 0; c < k; ++c) q -= alpha * sa[static_cast<std::size_t>(c)] * sb[static_cast<std::size_t>(c)];
        best = std::max(best, q);
    }
    return best;
}

// Random instances --------------------------------------------------------

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
    return m;
}

// Random A with spectral abscissa at most -0.1.
inline Eigen::MatrixXd random_stable(std::mt19937_64& rng, Eigen::Index m) {
    Eigen::MatrixXd a = random_matrix(rng, m, m, 1.0 / std::sqrt(static_cast<double>(m)));
    const double abscissa = Eigen::EigenSolver<Eigen::MatrixXd>(a, false).eigenvalues().real().maxCoeff();
    a -= (abscissa + 0.1) * Eigen::MatrixXd::Identity(m, m);
    return a;
}

// Random labelled tree with weights in [0.5, 2].
inline Eigen::MatrixXd random_tree(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> w(0.5, 2.0);
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
        std::uniform_int_distribution<int> parent(0, i - 1);
        const int p = parent(rng);
        a(i, p) = a(p, i) = w(rng);
    }
    return a;
}

// Connected undirected graph: random tree plus extra edges with probability p.
inline Eigen::MatrixXd random_connected(std::mt19937_64& rng, int n, double p = 0.3) {
    Eigen::MatrixXd a = random_tree(rng, n);
    std::uniform_real_distribution<double> u(0.0, 1.0), w(0.5, 2.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (a(i, j) == 0.0 && u(rng) < p) a(i, j) = a(j, i) = w(rng);
    return a;
}

inline Eigen::MatrixXd random_psd(std::mt19937_64& rng, int n) {
    std::uniform_int_distribution<int> rank(1, n);
    const Eigen::MatrixXd f = random_matrix(rng, rank(rng), n);
    return f.transpose() * f;
}

}  // namespace oracle
