#pragma once

#include "dynembed/linsys.hpp"
#include "dynembed/partition.hpp"

#include <json.hpp>
#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <vector>

namespace dynembed::lif {

/// Leaky integrate-and-fire network parameters. Times in ms; potentials are
/// dimensionless (threshold 1, reset 0). Defaults describe the 1000-neuron
/// network with 10 mixed excitatory/inhibitory assemblies.
struct LifParams {
    std::size_t n_exc = 800;
    std::size_t n_inh = 200;
    double tau_m_E = 15.0;
    double tau_m_I = 10.0;
    double tau_s_E = 3.0;
    double tau_s_I = 2.0;
    double v_threshold = 1.0;
    double v_reset = 0.0;
    double t_refractory = 5.0;
    double u_E_min = 1.1, u_E_max = 1.2;
    double u_I_min = 1.0, u_I_max = 1.05;
    double p_EE = 0.2, p_II = 0.5;
    double p_IE_in = 0.90, p_IE = 0.4545;  // E -> I, own assembly / otherwise
    double p_EI_in = 0.2632, p_EI = 0.5263;  // I -> E, own assembly / otherwise
    double W_EE = 0.022, W_II = 0.042;
    double W_IE_in = 0.0263, W_IE = 0.0087;
    double W_EI_in = 0.015, W_EI = 0.045;
    std::size_t n_assemblies = 10;
    double dt = 0.1;

    std::size_t size() const noexcept { return n_exc + n_inh; }
    bool excitatory(std::size_t i) const noexcept { return i < n_exc; }
    /// Assembly of neuron i: excitatory neurons first, then inhibitory,
    /// each population split into n_assemblies consecutive blocks.
    std::size_t assembly(std::size_t i) const;

    /// Throws PreconditionError when an invariant does not hold.
    void validate() const;

    /// Same densities, `assemblies` groups of `exc_per`+`inh_per` neurons.
    LifParams scaled(std::size_t assemblies, std::size_t exc_per, std::size_t inh_per) const;
};

void to_json(nlohmann::json& j, const LifParams& p);
void from_json(const nlohmann::json& j, LifParams& p);

struct AssemblyNetwork {
    Eigen::MatrixXd W;      // W(i, j) is the weight of the synapse j -> i
    Partition planted;      // n_assemblies mixed E/I groups
    Partition structural;   // 2·n_assemblies pure E or pure I blocks
};

AssemblyNetwork generate_assembly_network(const LifParams& p, std::uint64_t seed);

struct SpikeEvent {
    double time;  // ms
    std::size_t neuron;
};

struct SpikeTrain {
    std::vector<SpikeEvent> events;  // sorted by time, then neuron
    double duration = 0.0;
    std::size_t neurons = 0;

    std::vector<double> spike_times(std::size_t neuron) const;
};

/// Draws constant inputs u_i uniformly from the E/I intervals.
Eigen::VectorXd draw_inputs(const LifParams& p, std::uint64_t seed);

/// Forward-Euler integration of the LIF network with exponentially
/// decaying synapses. Spikes emitted in a step reach their targets from the
/// next step on.
SpikeTrain simulate_lif(const Eigen::MatrixXd& W, const LifParams& p, const Eigen::VectorXd& inputs,
                        double duration);

SpikeTrain simulate_lif(const Eigen::MatrixXd& W, const LifParams& p, double duration, std::uint64_t seed);

/// ẋ = (-I + W) x + u as a state-feedback linear system.
LinearSystem rate_model_system(const Eigen::MatrixXd& W);

/// Firing rate (Hz per neuron) of each group in consecutive windows; k×T.
Eigen::MatrixXd assembly_coactivation(const SpikeTrain& spikes, const Partition& groups, double window);

}  // namespace dynembed::lif
