#pragma once

#include <Eigen/Dense>

#include <cstdint>

namespace dynembed {

enum class TimeMode { Continuous, Discrete };

/// Linear dynamics  ẋ = A x + B u,  y = C x  (or x_{t+1} = A x_t in discrete
/// mode) together with the weighting W of the output inner product.
///
/// Dimensions: A is m×m, B is m×p, C is n×m, W is n×n symmetric PSD.
/// In discrete mode A is the one-step propagator and times must be
/// non-negative integers.
class LinearSystem {
public:
    LinearSystem(Eigen::MatrixXd a, Eigen::MatrixXd b, Eigen::MatrixXd c, Eigen::MatrixXd w,
                 TimeMode mode = TimeMode::Continuous);

    /// B = C = W = I.
    static LinearSystem state_feedback(Eigen::MatrixXd a, TimeMode mode = TimeMode::Continuous);

    const Eigen::MatrixXd& a() const noexcept { return a_; }
    const Eigen::MatrixXd& b() const noexcept { return b_; }
    const Eigen::MatrixXd& c() const noexcept { return c_; }
    const Eigen::MatrixXd& w() const noexcept { return w_; }
    TimeMode mode() const noexcept { return mode_; }

    Eigen::Index state_dim() const noexcept { return a_.rows(); }
    Eigen::Index input_dim() const noexcept { return b_.cols(); }
    Eigen::Index output_dim() const noexcept { return c_.rows(); }

    LinearSystem with_weighting(Eigen::MatrixXd w) const;
    LinearSystem with_output(Eigen::MatrixXd c) const;

private:
    Eigen::MatrixXd a_, b_, c_, w_;
    TimeMode mode_;
};

/// exp(A) by scaling and squaring with degree 3..13 Padé approximants
/// (Higham 2005 thresholds).
Eigen::MatrixXd expm(const Eigen::MatrixXd& a);

/// Aᵏ by binary exponentiation.
Eigen::MatrixXd matrix_power(const Eigen::MatrixXd& a, std::uint64_t k);

/// exp(A t) (continuous) or Aᵗ (discrete, t integral).
Eigen::MatrixXd propagator(const LinearSystem& sys, double t);

struct ResponseSet {
    double t = 0.0;
    Eigen::MatrixXd y;  // n×p, column i is the zero-state impulse response of input i
};

/// Y(t) = C · propagator(t) · B.
ResponseSet impulse_response_matrix(const LinearSystem& sys, double t);

/// Validates a discrete-mode time and returns it as an integer step count.
std::uint64_t discrete_steps(double t);

}  // namespace dynembed
