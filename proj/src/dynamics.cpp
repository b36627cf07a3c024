#include "dynembed/dynamics.hpp"

#include "dynembed/error.hpp"

namespace dynembed {

Dynamics parse_dynamics(std::string_view name) {
    if (name == "diffusion") return Dynamics::Diffusion;
    if (name == "rw") return Dynamics::RandomWalk;
    if (name == "signed") return Dynamics::Signed;
    if (name == "influence") return Dynamics::Influence;
    if (name == "rate") return Dynamics::Rate;
    if (name == "discrete") return Dynamics::Discrete;
    throw PreconditionError("unknown dynamics '" + std::string(name) + "'");
}

std::string to_string(Dynamics d) {
    switch (d) {
        case Dynamics::Diffusion: return "diffusion";
        case Dynamics::RandomWalk: return "rw";
        case Dynamics::Signed: return "signed";
        case Dynamics::Influence: return "influence";
        case Dynamics::Rate: return "rate";
        case Dynamics::Discrete: return "discrete";
    }
    return "unknown";
}

LinearSystem make_system(const Graph& g, Dynamics d, std::optional<double> teleport) {
    const auto n = static_cast<Eigen::Index>(g.size());
    if (teleport && d != Dynamics::RandomWalk && d != Dynamics::Discrete)
        throw PreconditionError("teleportation only applies to rw and discrete dynamics");

    switch (d) {
        case Dynamics::Diffusion: return LinearSystem::state_feedback(-combinatorial_laplacian(g));
        case Dynamics::RandomWalk:
            return LinearSystem::state_feedback(teleport ? Eigen::MatrixXd(-teleportation_laplacian(g, *teleport))
                                                         : Eigen::MatrixXd(-random_walk_laplacian(g)));
        case Dynamics::Signed: return LinearSystem::state_feedback(-signed_laplacian(g));
        case Dynamics::Influence: return LinearSystem::state_feedback(influence_operator(g));
        case Dynamics::Rate:
            return LinearSystem::state_feedback(g.weights().transpose() - Eigen::MatrixXd::Identity(n, n));
        case Dynamics::Discrete: {
            const Eigen::MatrixXd m =
                teleport ? teleportation_transition_matrix(g, *teleport) : discrete_transition_matrix(g);
            return LinearSystem::state_feedback(m.transpose(), TimeMode::Discrete);
        }
    }
    throw PreconditionError("unknown dynamics");
}

}  // namespace dynembed
