#include "dynembed/linsys.hpp"

#include "dynembed/error.hpp"

#include <array>
#include <cmath>
#include <string>

namespace dynembed {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw PreconditionError(msg);
}

double one_norm(const Eigen::MatrixXd& a) { return a.cwiseAbs().colwise().sum().maxCoeff(); }

}  // namespace

LinearSystem::LinearSystem(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c, Eigen::MatrixXd w,
                           TimeMode mode)
    : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)), w_(std::move(w)), mode_(mode) {
    require(a_.rows() == a_.cols(), "linear system: A must be square");
    require(b_.rows() == a_.rows(), "linear system: B must have as many rows as A");
    require(c_.cols() == a_.rows(), "linear system: C must have as many columns as A");
    require(w_.rows() == c_.rows() && w_.cols() == c_.rows(), "linear system: W must be n x n with n = rows(C)");
    require(a_.allFinite() && b_.allFinite() && c_.allFinite() && w_.allFinite(),
            "linear system: non-finite entries");
    if (w_.size() > 0) {
        const double scale = std::max(1.0, w_.cwiseAbs().maxCoeff());
        require((w_ - w_.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, "linear system: W must be symmetric");
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(w_, Eigen::EigenvaluesOnly);
        require(es.eigenvalues().minCoeff() >= -1e-10 * std::max(1.0, es.eigenvalues().cwiseAbs().maxCoeff()),
                "linear system: W must be positive semidefinite");
    }
}

LinearSystem LinearSystem::state_feedback(Eigen::MatrixXd a, TimeMode mode) {
    const auto m = a.rows();
    return LinearSystem(std::move(a), Eigen::MatrixXd::Identity(m, m), Eigen::MatrixXd::Identity(m, m),
                        Eigen::MatrixXd::Identity(m, m), mode);
}

LinearSystem LinearSystem::with_weighting(Eigen::MatrixXd w) const {
    return LinearSystem(a_, b_, c_, std::move(w), mode_);
}

LinearSystem LinearSystem::with_output(Eigen::MatrixXd c) const {
    const auto n = c.rows();
    return LinearSystem(a_, b_, std::move(c), Eigen::MatrixXd::Identity(n, n), mode_);
}

Eigen::MatrixXd expm(const Eigen::MatrixXd& a) {
    require(a.rows() == a.cols(), "expm: matrix must be square");
    require(a.allFinite(), "expm: non-finite input");
    const auto n = a.rows();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    if (n == 0) return id;

    const double norm = one_norm(a);

    // Padé numerator coefficients; the denominator uses the same values with
    // alternating sign, so only U (odd part) and V (even part) are needed.
    auto low_degree = [&](const auto& b, const Eigen::MatrixXd& x) {
        const Eigen::MatrixXd x2 = x * x;
        Eigen::MatrixXd power = id;
        Eigen::MatrixXd u = b[1] * id;
        Eigen::MatrixXd v = b[0] * id;
        for (std::size_t k = 2; k + 1 < b.size(); k += 2) {
            power = power * x2;
            v += b[k] * power;
            u += b[k + 1] * power;
        }
        u = x * u;
        return Eigen::PartialPivLU<Eigen::MatrixXd>(v - u).solve(v + u).eval();
    };

    static constexpr std::array<double, 4> b3{120., 60., 12., 1.};
    static constexpr std::array<double, 6> b5{30240., 15120., 3360., 420., 30., 1.};
    static constexpr std::array<double, 8> b7{17297280., 8648640., 1995840., 277200., 25200., 1512., 56., 1.};
    static constexpr std::array<double, 10> b9{17643225600., 8821612800., 2075673600., 302702400., 30270240.,
                                               2162160., 110880., 3960., 90., 1.};
    if (norm <= 1.495585217958292e-2) return low_degree(b3, a);
    if (norm <= 2.539398330063230e-1) return low_degree(b5, a);
    if (norm <= 9.504178996162932e-1) return low_degree(b7, a);
    if (norm <= 2.097847961257068e0) return low_degree(b9, a);

    static constexpr std::array<double, 14> b{64764752532480000., 32382376266240000., 7771770303897600.,
                                              1187353796428800.,  129060195264000.,   10559470521600.,
                                              670442572800.,      33522128640.,       1323241920.,
                                              40840800.,          960960.,            16380.,
                                              182.,               1.};
    constexpr double theta13 = 5.371920351148152;
    int s = 0;
    if (norm > theta13) s = static_cast<int>(std::ceil(std::log2(norm / theta13)));
    const Eigen::MatrixXd x = a / std::ldexp(1.0, s);

    const Eigen::MatrixXd x2 = x * x;
    const Eigen::MatrixXd x4 = x2 * x2;
    const Eigen::MatrixXd x6 = x4 * x2;
    Eigen::MatrixXd u_inner = b[13] * x6 + b[11] * x4 + b[9] * x2;
    Eigen::MatrixXd u = x * (x6 * u_inner + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * id);
    Eigen::MatrixXd v_inner = b[12] * x6 + b[10] * x4 + b[8] * x2;
    Eigen::MatrixXd v = x6 * v_inner + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * id;
    Eigen::MatrixXd r = Eigen::PartialPivLU<Eigen::MatrixXd>(v - u).solve(v + u);
    for (int i = 0; i < s; ++i) r = (r * r).eval();
    if (!r.allFinite()) throw NumericalError("expm: result is not finite (norm " + std::to_string(norm) + ")");
    return r;
}

Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& a, std::uint64_t k) {
    require(a.rows() == a.cols(), "matrix_power: matrix must be square");
    Eigen::MatrixXd result = Eigen::MatrixXd::Identity(a.rows(), a.cols());
    Eigen::MatrixXd base = a;
    while (k > 0) {
        if (k & 1u) result = (result * base).eval();
        k >>= 1u;
        if (k > 0) base = (base * base).eval();
    }
    return result;
}

std::uint64_t discrete_steps(double t) {
    if (!(t >= 0.0) || std::floor(t) != t || t > 1e18)
        throw PreconditionError("discrete time must be a non-negative integer, got " + std::to_string(t));
    return static_cast<std::uint64_t>(t);
}

Eigen::MatrixXd propagator(const LinearSystem& sys, double t) {
    if (sys.mode() == TimeMode::Discrete) return matrix_power(sys.a(), discrete_steps(t));
    require(t >= 0.0 && std::isfinite(t), "propagator: time must be finite and non-negative");
    return expm(sys.a() * t);
}

ResponseSet impulse_response_matrix(const LinearSystem& sys, double t) {
    return {t, sys.c() * propagator(sys, t) * sys.b()};
}

}  // namespace dynembed
