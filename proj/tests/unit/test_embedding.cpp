#include "dynembed/dynamics.hpp"
#include "dynembed/embedding.hpp"
#include "dynembed/error.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace dynembed;

namespace {

SimilarityMatrix wrap(const Eigen::MatrixXd& m) { return {m, TimeSpec::point(0.0), std::nullopt, "identity"}; }

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

Graph two_triangles() {
    // Triangles {0,1,2} and {3,4,5} joined by a negative bridge 2-3.
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(6, 6);
    for (int off : {0, 3})
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                if (i != j) a(off + i, off + j) = 1.0;
    a(2, 3) = a(3, 2) = -1.0;
    return Graph::from_matrix(a, false);
}

}  // namespace

TEST_SUITE("decompose") {
    TEST_CASE("identity and diagonal inputs") {
        const SpectralDecomp id = decompose(wrap(Eigen::MatrixXd::Identity(3, 3)));
        CHECK(id.eigenvalues.isOnes());
        CHECK(id.eigenvectors == Eigen::MatrixXd::Identity(3, 3));
        REQUIRE(id.degenerate.size() == 1);
        CHECK(id.degenerate.front() == std::pair<Eigen::Index, Eigen::Index>{0, 2});

        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(2, 2);
        d.diagonal() << 4, 1;
        const SpectralDecomp dd = decompose(wrap(d));
        CHECK(dd.eigenvalues(0) == 4.0);
        CHECK(dd.eigenvalues(1) == 1.0);
        CHECK(max_abs(dd.eigenvectors - Eigen::MatrixXd::Identity(2, 2)) <= 1e-15);
        CHECK(dd.degenerate.empty());
    }

    TEST_CASE("two-node diffusion spectrum") {
        const auto sys = make_system(Graph::from_matrix((Eigen::MatrixXd(2, 2) << 0, 1, 1, 0).finished(), false),
                                     Dynamics::Diffusion);
        const double t = 0.3;
        const SpectralDecomp d = decompose(similarity_at(sys, t));
        CHECK(d.eigenvalues(0) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(d.eigenvalues(1) == doctest::Approx(std::exp(-4 * t)).epsilon(1e-13));
        const double r = 1 / std::sqrt(2.0);
        CHECK(d.eigenvectors(0, 0) == doctest::Approx(r));
        CHECK(d.eigenvectors(1, 0) == doctest::Approx(r));
        // Largest-magnitude entries tie; the first one is made positive.
        CHECK(d.eigenvectors(0, 1) == doctest::Approx(r));
        CHECK(d.eigenvectors(1, 1) == doctest::Approx(-r));
    }

    TEST_CASE("orthonormal and reconstructing") {
        std::mt19937_64 rng(51);
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::MatrixXd psi = oracle::random_psd(rng, 9);
            const SpectralDecomp d = decompose(wrap(psi));
            CHECK(max_abs(d.eigenvectors.transpose() * d.eigenvectors - Eigen::MatrixXd::Identity(9, 9)) <= 1e-10);
            const Eigen::MatrixXd back = d.eigenvectors * d.eigenvalues.asDiagonal() * d.eigenvectors.transpose();
            CHECK((back - psi).norm() <= 1e-8 * psi.norm());
            for (Eigen::Index k = 1; k < 9; ++k) CHECK(d.eigenvalues(k) <= d.eigenvalues(k - 1));
            CHECK(d.eigenvalues.minCoeff() >= 0.0);
        }
    }

    TEST_CASE("asymmetric input is refused") {
        Eigen::MatrixXd m = Eigen::MatrixXd::Identity(2, 2);
        m(0, 1) = 0.1;
        CHECK_THROWS_AS(decompose(wrap(m)), PreconditionError);
    }
}

TEST_SUITE("embed") {
    TEST_CASE("full rank reproduces the gram matrix") {
        std::mt19937_64 rng(52);
        const Eigen::MatrixXd psi = oracle::random_psd(rng, 7);
        const EmbeddingCoords e = embed(decompose(wrap(psi)), 7);
        CHECK(max_abs(e.coords * e.coords.transpose() - psi) <= 1e-8 * std::max(1.0, max_abs(psi)));
        CHECK(e.truncation_error == doctest::Approx(0.0));
    }

    TEST_CASE("two-node diffusion distance") {
        const auto sys = make_system(Graph::from_matrix((Eigen::MatrixXd(2, 2) << 0, 1, 1, 0).finished(), false),
                                     Dynamics::Diffusion);
        for (double t : {0.1, 1.0}) {
            const EmbeddingCoords e = embed(decompose(similarity_at(sys, t)), 2);
            CHECK((e.coords.row(0) - e.coords.row(1)).squaredNorm() == doctest::Approx(2 * std::exp(-4 * t)));
        }
    }

    TEST_CASE("rank one has no truncation error") {
        Eigen::VectorXd v(4);
        v << 1, 2, -1, 0.5;
        const EmbeddingCoords e = embed(decompose(wrap(v * v.transpose())), 1);
        CHECK(e.truncation_error == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(max_abs(e.coords * e.coords.transpose() - v * v.transpose()) <= 1e-12);
    }

    TEST_CASE("dimension bounds") {
        const SpectralDecomp d = decompose(wrap(Eigen::MatrixXd::Identity(3, 3)));
        CHECK_THROWS_AS(embed(d, 0), PreconditionError);
        CHECK_THROWS_AS(embed(d, 4), PreconditionError);
    }

    TEST_CASE("truncation follows Eckart-Young") {
        std::mt19937_64 rng(53);
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::MatrixXd psi = oracle::random_psd(rng, 8);
            const SpectralDecomp d = decompose(wrap(psi));
            for (Eigen::Index c = 1; c <= 8; ++c) {
                const EmbeddingCoords e = embed(d, c);
                const double err = (e.coords * e.coords.transpose() - psi).norm();
                CHECK(err == doctest::Approx(d.eigenvalues.tail(8 - c).norm()).epsilon(1e-8).scale(1.0));
                const double share = d.eigenvalues.tail(8 - c).sum() / d.eigenvalues.sum();
                CHECK(e.truncation_error == doctest::Approx(share));
            }
        }
    }

    TEST_CASE("isometry on random gram matrices") {
        std::mt19937_64 rng(54);
        for (int trial = 0; trial < 100; ++trial) {
            std::uniform_int_distribution<int> size(2, 12);
            const int n = size(rng);
            const Eigen::MatrixXd psi = oracle::random_psd(rng, n);
            const Eigen::MatrixXd d2 = distance_squared(wrap(psi)).values;
            const EmbeddingCoords e = embed(decompose(wrap(psi)), n);
            double worst = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    worst = std::max(worst, std::abs((e.coords.row(i) - e.coords.row(j)).squaredNorm() - d2(i, j)));
            CHECK(worst <= 1e-8);
        }
    }

    TEST_CASE("identical input gives identical coordinates") {
        std::mt19937_64 rng(55);
        const Eigen::MatrixXd psi = oracle::random_psd(rng, 10);
        const EmbeddingCoords a = embed(decompose(wrap(psi)), 4);
        const EmbeddingCoords b = embed(decompose(wrap(psi)), 4);
        CHECK(a.coords == b.coords);
    }

    TEST_CASE("diffusion map coordinates") {
        std::mt19937_64 rng(56);
        const Graph g = Graph::from_matrix(oracle::random_connected(rng, 8), false);
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(combinatorial_laplacian(g));
        const double t = 0.4;
        const EmbeddingCoords e = embed(decompose(similarity_at(make_system(g, Dynamics::Diffusion), t)), 8);
        for (Eigen::Index k = 0; k < 8; ++k) {
            const Eigen::VectorXd expected = std::exp(-es.eigenvalues()(k) * t) * es.eigenvectors().col(k);
            const Eigen::VectorXd col = e.coords.col(k);
            CHECK(std::min((col - expected).cwiseAbs().maxCoeff(), (col + expected).cwiseAbs().maxCoeff()) <= 1e-8);
        }
    }
}

TEST_SUITE("ranking") {
    TEST_CASE("descending order with id tie-break") {
        EmbeddingCoords e;
        e.c = 1;
        e.coords = (Eigen::MatrixXd(3, 1) << 0.9, 0.1, -0.3).finished();
        auto r = rank_by_coordinate(e, {"n1", "n2", "n3"}, 0);
        CHECK(r[0].node == 0);
        CHECK(r[1].node == 1);
        CHECK(r[2].node == 2);

        e.coords = Eigen::MatrixXd::Constant(3, 1, 0.5);
        r = rank_by_coordinate(e, {"c", "a", "b"}, 0);
        CHECK(r[0].node == 1);
        CHECK(r[1].node == 2);
        CHECK(r[2].node == 0);
        CHECK_THROWS_AS(rank_by_coordinate(e, {"c", "a", "b"}, 1), PreconditionError);
    }

    TEST_CASE("spearman") {
        CHECK(spearman({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
        CHECK(spearman({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
        // Average ranks for ties: x ranks (1.5, 1.5, 3), y ranks (1, 2, 3).
        CHECK(spearman({1, 1, 2}, {1, 2, 3}) == doctest::Approx(std::sqrt(3.0) / 2));
        CHECK_THROWS_AS(spearman({1, 2}, {1}), PreconditionError);
    }
}

TEST_SUITE("trajectory") {
    TEST_CASE("identity responses at time zero") {
        const auto sys = make_system(two_triangles(), Dynamics::Signed);
        const auto traj = embedding_trajectory(sys, {0.0, 0.5}, 6);
        const Eigen::MatrixXd& x = traj.front().coords;
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                if (i != j) CHECK((x.row(i) - x.row(j)).squaredNorm() == doctest::Approx(2.0));
    }

    TEST_CASE("symmetric dynamics keep their eigenvectors") {
        std::mt19937_64 rng(57);
        const Graph g = Graph::from_matrix(oracle::random_connected(rng, 7), false);
        const std::vector<double> times{0.1, 0.3, 1.0, 3.0};
        const auto traj = embedding_trajectory(make_system(g, Dynamics::Diffusion), times, 7);
        const Eigen::VectorXd lambda = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(combinatorial_laplacian(g)).eigenvalues();
        for (std::size_t s = 1; s < traj.size(); ++s)
            for (Eigen::Index k = 0; k < 7; ++k) {
                // Skip directions whose weight has decayed below resolution.
                if (std::exp(-2 * lambda(k) * times[s]) < 1e-6) continue;
                const Eigen::VectorXd a = traj[s].coords.col(k).normalized();
                const Eigen::VectorXd b = traj[s - 1].coords.col(k).normalized();
                CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-6);
            }
    }

    TEST_CASE("negative bridge separates the triangles") {
        const std::vector<double> times{0.5, 1.0, 2.0, 4.0};
        const auto traj = embedding_trajectory(make_system(two_triangles(), Dynamics::Signed), times, 2);
        for (const auto& e : traj) {
            const Eigen::VectorXd phi1 = e.coords.col(0);
            // Balanced signing: the leading direction is the ±1 group indicator with μ₁ = 1.
            CHECK(phi1.head(3).minCoeff() > 0.0);
            CHECK(phi1.tail(3).maxCoeff() < 0.0);
            CHECK(phi1.cwiseAbs().maxCoeff() == doctest::Approx(1 / std::sqrt(6.0)).epsilon(1e-10));
            CHECK(phi1.cwiseAbs().minCoeff() == doctest::Approx(1 / std::sqrt(6.0)).epsilon(1e-10));
        }
    }

    TEST_CASE("times must increase") {
        const auto sys = make_system(two_triangles(), Dynamics::Signed);
        CHECK_THROWS_AS(embedding_trajectory(sys, {1.0, 1.0}, 2), PreconditionError);
    }
}
