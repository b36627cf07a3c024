#include "dynembed/error.hpp"
#include "dynembed/linsys.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace dynembed;

namespace {

Eigen::MatrixXd edge_laplacian() {
    Eigen::MatrixXd l(2, 2);
    l << 1, -1, -1, 1;
    return l;
}

double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(1e-300, b.cwiseAbs().maxCoeff());
}

}  // namespace

TEST_SUITE("expm") {
    TEST_CASE("matches the Taylor oracle across norm ranges") {
        std::mt19937_64 rng(21);
        // Scales chosen to hit every Padé degree and several squarings.
        for (double scale : {1e-3, 0.05, 0.3, 1.0, 2.0, 5.0, 20.0, 80.0}) {
            for (int trial = 0; trial < 5; ++trial) {
                const Eigen::MatrixXd a = oracle::random_matrix(rng, 6, 6, scale / 6.0);
                CHECK(rel_err(expm(a), oracle::taylor_expm(a)) <= 1e-11);
            }
        }
    }

    TEST_CASE("closed forms") {
        CHECK(expm(Eigen::MatrixXd::Zero(3, 3)) == Eigen::MatrixXd::Identity(3, 3));
        Eigen::MatrixXd rot(2, 2);
        rot << 0, -M_PI / 3, M_PI / 3, 0;
        const Eigen::MatrixXd r = expm(rot);
        CHECK(r(0, 0) == doctest::Approx(0.5).epsilon(1e-14));
        CHECK(r(1, 0) == doctest::Approx(std::sqrt(3.0) / 2).epsilon(1e-14));
        CHECK(expm(Eigen::MatrixXd::Constant(1, 1, -30.0))(0, 0) ==
              doctest::Approx(std::exp(-30.0)).epsilon(1e-12));
    }

    TEST_CASE("overflow is reported") {
        CHECK_THROWS_AS(expm(Eigen::MatrixXd::Constant(1, 1, 1e4)), NumericalError);
    }
}

TEST_SUITE("linear system") {
    TEST_CASE("dimension and weighting checks") {
        const Eigen::MatrixXd i2 = Eigen::MatrixXd::Identity(2, 2);
        CHECK_THROWS_AS(LinearSystem(i2, Eigen::MatrixXd::Identity(3, 3), i2, i2), PreconditionError);
        CHECK_THROWS_AS(LinearSystem(i2, i2, Eigen::MatrixXd::Identity(3, 2), i2), PreconditionError);
        Eigen::MatrixXd asym = i2;
        asym(0, 1) = 0.5;
        CHECK_THROWS_AS(LinearSystem(i2, i2, i2, asym), PreconditionError);
        CHECK_THROWS_AS(LinearSystem(i2, i2, i2, -i2), PreconditionError);
        Eigen::MatrixXd bad = i2;
        bad(0, 0) = std::nan("");
        CHECK_THROWS_AS(LinearSystem::state_feedback(bad), PreconditionError);
    }

    TEST_CASE("propagator") {
        CHECK(propagator(LinearSystem::state_feedback(Eigen::MatrixXd::Zero(2, 2)), 5.0) ==
              Eigen::MatrixXd::Identity(2, 2));

        const auto sys = LinearSystem::state_feedback(-edge_laplacian());
        for (double t : {0.0, 0.25, 1.0, 3.0}) {
            const double e = std::exp(-2 * t);
            Eigen::MatrixXd expected(2, 2);
            expected << 1 + e, 1 - e, 1 - e, 1 + e;
            CHECK(rel_err(propagator(sys, t), 0.5 * expected) <= 1e-14);
        }

        Eigen::MatrixXd swap(2, 2);
        swap << 0, 1, 1, 0;
        const auto disc = LinearSystem::state_feedback(swap, TimeMode::Discrete);
        CHECK(propagator(disc, 2.0) == Eigen::MatrixXd::Identity(2, 2));
        CHECK(propagator(disc, 3.0) == swap);
        CHECK_THROWS_AS(propagator(disc, 1.5), PreconditionError);
        CHECK_THROWS_AS(propagator(disc, -1.0), PreconditionError);
    }

    TEST_CASE("impulse responses") {
        const auto id = LinearSystem::state_feedback(-edge_laplacian());
        CHECK(impulse_response_matrix(id, 0.0).y == Eigen::MatrixXd::Identity(2, 2));

        const Eigen::MatrixXd centre = Eigen::MatrixXd::Identity(2, 2) - Eigen::MatrixXd::Constant(2, 2, 0.5);
        const auto centred = id.with_output(centre);
        for (double t : {0.1, 1.0}) {
            const Eigen::MatrixXd y = impulse_response_matrix(centred, t).y;
            CHECK(y(0, 0) == doctest::Approx(0.5 * std::exp(-2 * t)).epsilon(1e-13));
            CHECK(y(1, 0) == doctest::Approx(-0.5 * std::exp(-2 * t)).epsilon(1e-13));
        }

        std::mt19937_64 rng(22);
        const Eigen::MatrixXd a = oracle::random_stable(rng, 4);
        const Eigen::MatrixXd c = oracle::random_matrix(rng, 3, 4);
        const LinearSystem single(a, Eigen::VectorXd::Unit(4, 0), c, Eigen::MatrixXd::Identity(3, 3));
        const Eigen::MatrixXd y = impulse_response_matrix(single, 0.7).y;
        REQUIRE(y.cols() == 1);
        CHECK(rel_err(y, c * oracle::taylor_expm(a * 0.7).col(0)) <= 1e-12);

        const LinearSystem at_zero(a, oracle::random_matrix(rng, 4, 2), c, Eigen::MatrixXd::Identity(3, 3));
        const Eigen::MatrixXd cb = at_zero.c() * at_zero.b();
        CHECK((impulse_response_matrix(at_zero, 0.0).y - cb).cwiseAbs().maxCoeff() <= 1e-12 * cb.norm());
    }

    TEST_CASE("matrix power") {
        Eigen::MatrixXd m(2, 2);
        m << 1, 1, 0, 1;
        Eigen::MatrixXd expected(2, 2);
        expected << 1, 37, 0, 1;
        CHECK(matrix_power(m, 37) == expected);
        CHECK(matrix_power(m, 0) == Eigen::MatrixXd::Identity(2, 2));
    }
}

TEST_SUITE("propagator properties") {
    TEST_CASE("semigroup") {
        std::mt19937_64 rng(23);
        for (int trial = 0; trial < 50; ++trial) {
            std::uniform_int_distribution<int> size(1, 12);
            const auto sys = LinearSystem::state_feedback(oracle::random_stable(rng, size(rng)));
            for (double s : {0.3, 1.0, 2.0})
                for (double t : {0.3, 1.0, 2.0})
                    CHECK(rel_err(propagator(sys, s + t), propagator(sys, s) * propagator(sys, t)) <= 1e-8);
        }
    }

    TEST_CASE("derivative") {
        std::mt19937_64 rng(24);
        const double h = 1e-4;
        for (int trial = 0; trial < 10; ++trial) {
            const auto sys = LinearSystem::state_feedback(oracle::random_stable(rng, 6));
            const double t = 0.8;
            const Eigen::MatrixXd fd = (propagator(sys, t + h) - propagator(sys, t - h)) / (2 * h);
            CHECK(rel_err(fd, sys.a() * propagator(sys, t)) <= 1e-5);
        }
    }

    TEST_CASE("laplacian dynamics conserve probability") {
        std::mt19937_64 rng(25);
        for (int trial = 0; trial < 10; ++trial) {
            const Eigen::MatrixXd a = oracle::random_connected(rng, 8);
            const Eigen::MatrixXd l = Eigen::MatrixXd(a.rowwise().sum().asDiagonal()) - a;
            const auto sys = LinearSystem::state_feedback(-l.transpose());
            Eigen::VectorXd p = Eigen::VectorXd::Random(8).cwiseAbs();
            p /= p.sum();
            for (double t : {0.1, 1.0, 10.0}) CHECK(std::abs((propagator(sys, t) * p).sum() - 1.0) <= 1e-10);
        }
    }
}
