#include "dynembed/similarity.hpp"

#include "dynembed/error.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <string>

namespace dynembed {

namespace {

Eigen::MatrixXd symmetrised(const Eigen::MatrixXd& m) { return 0.5 * (m + m.transpose()); }

void require_continuous(const LinearSystem& sys, const char* op) {
    if (sys.mode() != TimeMode::Continuous)
        throw PreconditionError(std::string(op) + ": continuous-time system required");
}

void validate_centering(const Centering& c, Eigen::Index n) {
    if (c.nu.size() != n) throw PreconditionError("centering vector has wrong length");
    if (std::abs(c.nu.norm() - 1.0) > 1e-12) throw PreconditionError("centering vector must have unit norm");
    if (!(c.alpha >= 0.0 && c.alpha <= 1.0)) throw PreconditionError("centering alpha must lie in [0, 1]");
}

Eigen::MatrixXd output_weight(const LinearSystem& sys, const std::optional<Centering>& centering) {
    if (!centering) return sys.w();
    validate_centering(*centering, sys.output_dim());
    return centering->projector();
}

bool connected_undirected(const Eigen::MatrixXd& a) {
    const auto n = a.rows();
    if (n == 0) return true;
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::queue<Eigen::Index> q;
    q.push(0);
    seen[0] = 1;
    Eigen::Index count = 1;
    while (!q.empty()) {
        const auto i = q.front();
        q.pop();
        for (Eigen::Index j = 0; j < n; ++j) {
            if (!seen[static_cast<std::size_t>(j)] && (a(i, j) != 0.0 || a(j, i) != 0.0)) {
                seen[static_cast<std::size_t>(j)] = 1;
                ++count;
                q.push(j);
            }
        }
    }
    return count == n;
}

// Unique π with πL = 0 and π·1 = 1, or NumericalError.
Eigen::RowVectorXd stationary_distribution(const Eigen::MatrixXd& l) {
    const auto n = l.rows();
    Eigen::MatrixXd sys(n + 1, n);
    sys.topRows(n) = l.transpose();
    sys.row(n).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + 1);
    rhs(n) = 1.0;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_lt(l.transpose());
    qr_lt.setThreshold(1e-10);
    if (qr_lt.rank() != n - 1)
        throw NumericalError("diffusion has no unique stationary distribution; use the similarity "
                             "of the original process instead of the autocovariance");
    const Eigen::VectorXd pi = sys.colPivHouseholderQr().solve(rhs);
    if ((sys * pi - rhs).cwiseAbs().maxCoeff() > 1e-9 || pi.minCoeff() < -1e-12)
        throw NumericalError("stationary distribution could not be computed");
    return pi.cwiseMax(0.0).transpose() / pi.cwiseMax(0.0).sum();
}

}  // namespace

Centering Centering::uniform(Eigen::Index n, double alpha) {
    return {Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n))), alpha};
}

Eigen::MatrixXd Centering::projector() const {
    const auto n = nu.size();
    return Eigen::MatrixXd::Identity(n, n) - alpha * nu * nu.transpose();
}

SimilarityMatrix similarity_at(const LinearSystem& sys, double t) {
    const Eigen::MatrixXd y = impulse_response_matrix(sys, t).y;
    return {symmetrised(y.transpose() * sys.w() * y), TimeSpec::point(t), std::nullopt, "system"};
}

SimilarityMatrix centered_similarity_at(const LinearSystem& sys, double t, const Centering& centering) {
    validate_centering(centering, sys.output_dim());
    const Eigen::MatrixXd y = impulse_response_matrix(sys, t).y;
    const Eigen::VectorXd proj = y.transpose() * centering.nu;
    Eigen::MatrixXd psi = y.transpose() * y;
    psi.noalias() -= centering.alpha * proj * proj.transpose();
    return {symmetrised(psi), TimeSpec::point(t), centering, "centered"};
}

DistanceMatrix distance_squared(const SimilarityMatrix& psi) {
    const auto& m = psi.values;
    if (m.rows() != m.cols()) throw PreconditionError("distance_squared: similarity must be square");
    const Eigen::VectorXd z = m.diagonal();
    const auto n = m.rows();
    Eigen::MatrixXd d = z.replicate(1, n) + z.transpose().replicate(n, 1) - 2.0 * m;
    for (Eigen::Index i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (d(i, j) < 0.0) {
                if (d(i, j) < -kDistanceClamp)
                    throw NumericalError("distance_squared: similarity is not positive semidefinite (D² = " +
                                         std::to_string(d(i, j)) + ")");
                d(i, j) = 0.0;
            }
        }
    }
    return {std::move(d), z};
}

Eigen::MatrixXd gramian_integral(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q, double t) {
    const auto m = a.rows();
    if (a.cols() != m || q.rows() != m || q.cols() != m)
        throw PreconditionError("gramian_integral: dimension mismatch");
    if (!(t >= 0.0) || !std::isfinite(t)) throw PreconditionError("gramian_integral: time must be non-negative");
    if (t == 0.0 || m == 0) return Eigen::MatrixXd::Zero(m, m);

    // The block exponential of [[-Aᵀ, Q], [0, A]] contains e^{-Aᵀh}, which
    // overflows for long horizons; evaluate it on a short step h = t/2^s and
    // double: X(2h) = X(h) + e^{Aᵀh} X(h) e^{Ah}.
    const double norm = a.cwiseAbs().colwise().sum().maxCoeff() * t;
    int s = 0;
    if (norm > 1.0) s = static_cast<int>(std::ceil(std::log2(norm)));
    const double h = std::ldexp(t, -s);

    Eigen::MatrixXd block = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    block.topLeftCorner(m, m) = -a.transpose() * h;
    block.topRightCorner(m, m) = q * h;
    block.bottomRightCorner(m, m) = a * h;
    const Eigen::MatrixXd f = expm(block);

    Eigen::MatrixXd e = f.bottomRightCorner(m, m);
    Eigen::MatrixXd x = e.transpose() * f.topRightCorner(m, m);
    for (int i = 0; i < s; ++i) {
        x = (x + e.transpose() * x * e).eval();
        e = (e * e).eval();
    }
    if (!x.allFinite()) throw NumericalError("gramian_integral: result is not finite");
    return symmetrised(x);
}

SimilarityMatrix integrated_similarity(const LinearSystem& sys, double t, const std::optional<Centering>& centering) {
    require_continuous(sys, "integrated_similarity");
    if (!(t > 0.0)) throw PreconditionError("integrated_similarity: horizon must be positive");
    const Eigen::MatrixXd q = sys.c().transpose() * output_weight(sys, centering) * sys.c();
    const Eigen::MatrixXd x = gramian_integral(sys.a(), q, t);
    return {symmetrised(sys.b().transpose() * x * sys.b()), TimeSpec::interval(t), centering,
            centering ? "centered" : "system"};
}

SimilarityMatrix summed_similarity(const LinearSystem& sys, double t, const std::optional<Centering>& centering) {
    if (sys.mode() != TimeMode::Discrete)
        throw PreconditionError("summed_similarity: discrete-time system required");
    const auto steps = discrete_steps(t);
    const Eigen::MatrixXd w = output_weight(sys, centering);
    Eigen::MatrixXd state = sys.b();
    Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(sys.input_dim(), sys.input_dim());
    for (std::uint64_t s = 0; s <= steps; ++s) {
        const Eigen::MatrixXd y = sys.c() * state;
        sum.noalias() += y.transpose() * w * y;
        if (s < steps) state = (sys.a() * state).eval();
    }
    return {symmetrised(sum), TimeSpec::interval(t), centering, centering ? "centered" : "system"};
}

DistanceMatrix integrated_distance(const SimilarityMatrix& psi_int) { return distance_squared(psi_int); }

Gramian observability_gramian(const LinearSystem& sys, double t) {
    require_continuous(sys, "observability_gramian");
    return {gramian_integral(sys.a(), sys.c().transpose() * sys.c(), t), t};
}

double lyapunov_residual(const LinearSystem& sys, double t, double h) {
    require_continuous(sys, "lyapunov_residual");
    const auto m = sys.state_dim();
    if (sys.b().rows() != m || sys.b().cols() != m || sys.b() != Eigen::MatrixXd::Identity(m, m))
        throw PreconditionError("lyapunov_residual: requires B = I");
    if (!(h > 0.0) || t < h) throw PreconditionError("lyapunov_residual: need 0 < h <= t");
    const Eigen::MatrixXd plus = similarity_at(sys, t + h).values;
    const Eigen::MatrixXd minus = similarity_at(sys, t - h).values;
    const Eigen::MatrixXd psi = similarity_at(sys, t).values;
    const Eigen::MatrixXd rhs = sys.a().transpose() * psi + psi * sys.a();
    return ((plus - minus) / (2.0 * h) - rhs).cwiseAbs().maxCoeff();
}

DiffusionStats diffusion_stats(const Graph& g, double t, std::optional<double> teleport) {
    if (!(t >= 0.0)) throw PreconditionError("diffusion_stats: time must be non-negative");
    const auto n = static_cast<Eigen::Index>(g.size());
    Eigen::MatrixXd l;
    Eigen::RowVectorXd pi;
    if (teleport) {
        l = teleportation_laplacian(g, *teleport);
        pi = stationary_distribution(l);
    } else {
        l = combinatorial_laplacian(g);
        if (!g.directed()) {
            if (!connected_undirected(g.weights()))
                throw NumericalError("diffusion on a disconnected graph has no unique stationary distribution");
            pi = Eigen::RowVectorXd::Constant(n, 1.0 / static_cast<double>(n));
        } else {
            pi = stationary_distribution(l);
        }
    }
    DiffusionStats stats;
    stats.pi = pi;
    stats.Pi = pi.transpose().asDiagonal();
    stats.Sigma0 = stats.Pi - pi.transpose() * pi;
    stats.P_t = expm(-l * t);
    return stats;
}

Eigen::MatrixXd autocovariance(const Graph& g, double t, std::optional<double> teleport) {
    const auto stats = diffusion_stats(g, t, teleport);
    return stats.Sigma0 * stats.P_t;
}

Eigen::MatrixXd resistance_distance(const Graph& g) {
    if (g.directed()) throw PreconditionError("resistance_distance: graph must be undirected");
    const Eigen::MatrixXd l = combinatorial_laplacian(g);
    if (!connected_undirected(g.weights()))
        throw NumericalError("resistance_distance: graph is disconnected, distances are infinite");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(l);
    const auto& lambda = es.eigenvalues();
    const double tol = 1e-10 * std::max(1.0, lambda.cwiseAbs().maxCoeff());
    const auto n = l.rows();
    Eigen::MatrixXd pinv = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < n; ++k) {
        if (lambda(k) > tol) pinv.noalias() += es.eigenvectors().col(k) * es.eigenvectors().col(k).transpose() / lambda(k);
    }
    const Eigen::VectorXd d = pinv.diagonal();
    Eigen::MatrixXd kappa = d.replicate(1, n) + d.transpose().replicate(n, 1) - 2.0 * pinv;
    kappa.diagonal().setZero();
    return kappa;
}

EepBlockReport eep_block_check(const Graph& g, const Partition& cells, const std::vector<double>& times) {
    const EepCheck check = check_eep(g, cells);
    if (!check.accepted())
        throw PreconditionError("eep_block_check: cells are not an external equitable partition (residual " +
                                std::to_string(check.residual) + ")");
    const auto& quotient = *check.quotient;
    const Eigen::MatrixXd l = combinatorial_laplacian(g);
    const Eigen::MatrixXd hpinv = indicator_pinv(quotient.indicator);
    const auto n = l.rows();
    const auto k = hpinv.rows();
    const LinearSystem sys(-l, Eigen::MatrixXd::Identity(n, n), hpinv, Eigen::MatrixXd::Identity(k, k));

    EepBlockReport report;
    report.times = times;
    for (double t : times) {
        const SimilarityMatrix psi = similarity_at(sys, t);
        const Eigen::MatrixXd d2 = distance_squared(psi).values;
        double within = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (cells.label(static_cast<std::size_t>(i)) == cells.label(static_cast<std::size_t>(j)))
                    within = std::max(within, d2(i, j));

        const Eigen::MatrixXd yq = expm(-quotient.quotient_laplacian * t) * hpinv;
        const double mismatch = (psi.values - yq.transpose() * yq).cwiseAbs().maxCoeff();

        report.within_cell_distance.push_back(within);
        report.quotient_mismatch.push_back(mismatch);
        report.max_within_cell = std::max(report.max_within_cell, within);
        report.max_quotient_mismatch = std::max(report.max_quotient_mismatch, mismatch);
    }
    return report;
}

double relative_min_eigenvalue(const Eigen::MatrixXd& sym) {
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym, Eigen::EigenvaluesOnly);
    const double scale = es.eigenvalues().cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return es.eigenvalues().minCoeff() / scale;
}

}  // namespace dynembed
