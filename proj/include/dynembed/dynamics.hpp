#pragma once

#include "dynembed/graph.hpp"
#include "dynembed/linsys.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace dynembed {

// Linear dynamics that can be attached to a graph.
//   Diffusion   A = -L               (combinatorial Laplacian, out-degree convention)
//   RandomWalk  A = -L_rw            (or -(I - T) with teleportation T)
//   Signed      A = -L_s
//   Influence   A = K_in⁻¹Aᵀ - I
//   Rate        A = -I + W_N, W_N = Aᵀ so that W_N(i, j) is the weight j -> i
//   Discrete    x_{t+1} = Mᵀ x_t     (so that Ψ(t) = Mᵗ(Mᵗ)ᵀ)
enum class Dynamics { Diffusion, RandomWalk, Signed, Influence, Rate, Discrete };

Dynamics parse_dynamics(std::string_view name);
std::string to_string(Dynamics d);

/// Builds the state-feedback system (B = C = W = I) for `d` on `g`.
/// `teleport` is honoured by RandomWalk and Discrete only.
LinearSystem make_system(const Graph& g, Dynamics d, std::optional<double> teleport = std::nullopt);

}  // namespace dynembed
