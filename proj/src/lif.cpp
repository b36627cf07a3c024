#include "dynembed/lif.hpp"

#include "dynembed/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace dynembed::lif {

namespace {

void require_probability(double p, const char* name) {
    if (!(p >= 0.0 && p <= 1.0)) throw PreconditionError(std::string("LifParams: ") + name + " must lie in [0, 1]");
}

void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw PreconditionError(std::string("LifParams: ") + name + " must be positive");
}

void require_weight(double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v))
        throw PreconditionError(std::string("LifParams: ") + name + " must be a finite magnitude >= 0");
}

}  // namespace

std::size_t LifParams::assembly(std::size_t i) const {
    if (i >= size()) throw PreconditionError("LifParams::assembly: neuron index out of range");
    if (excitatory(i)) return i / (n_exc / n_assemblies);
    return (i - n_exc) / (n_inh / n_assemblies);
}

void LifParams::validate() const {
    if (n_assemblies == 0) throw PreconditionError("LifParams: n_assemblies must be positive");
    if (n_exc == 0 || n_inh == 0) throw PreconditionError("LifParams: both populations must be non-empty");
    if (n_exc % n_assemblies != 0 || n_inh % n_assemblies != 0)
        throw PreconditionError("LifParams: population sizes must be divisible by n_assemblies");
    require_positive(tau_m_E, "tau_m_E");
    require_positive(tau_m_I, "tau_m_I");
    require_positive(tau_s_E, "tau_s_E");
    require_positive(tau_s_I, "tau_s_I");
    require_positive(dt, "dt");
    if (!(t_refractory >= 0.0)) throw PreconditionError("LifParams: t_refractory must be non-negative");
    if (!(v_threshold > v_reset)) throw PreconditionError("LifParams: v_threshold must exceed v_reset");
    if (!(u_E_min <= u_E_max) || !(u_I_min <= u_I_max))
        throw PreconditionError("LifParams: input ranges must satisfy min <= max");
    for (auto [p, name] : {std::pair{p_EE, "p_EE"}, {p_II, "p_II"}, {p_IE_in, "p_IE_in"}, {p_IE, "p_IE"},
                           {p_EI_in, "p_EI_in"}, {p_EI, "p_EI"}})
        require_probability(p, name);
    for (auto [w, name] : {std::pair{W_EE, "W_EE"}, {W_II, "W_II"}, {W_IE_in, "W_IE_in"}, {W_IE, "W_IE"},
                           {W_EI_in, "W_EI_in"}, {W_EI, "W_EI"}})
        require_weight(w, name);
}

LifParams LifParams::scaled(std::size_t assemblies, std::size_t exc_per, std::size_t inh_per) const {
    LifParams p = *this;
    p.n_assemblies = assemblies;
    p.n_exc = assemblies * exc_per;
    p.n_inh = assemblies * inh_per;
    return p;
}

void to_json(nlohmann::json& j, const LifParams& p) {
    j = nlohmann::json{
        {"n_exc", p.n_exc},       {"n_inh", p.n_inh},
        {"tau_m_E", p.tau_m_E},   {"tau_m_I", p.tau_m_I},
        {"tau_s_E", p.tau_s_E},   {"tau_s_I", p.tau_s_I},
        {"v_threshold", p.v_threshold}, {"v_reset", p.v_reset},
        {"t_refractory", p.t_refractory},
        {"u_range_E", {p.u_E_min, p.u_E_max}}, {"u_range_I", {p.u_I_min, p.u_I_max}},
        {"p_EE", p.p_EE},         {"p_II", p.p_II},
        {"p_IE_in", p.p_IE_in},   {"p_IE", p.p_IE},
        {"p_EI_in", p.p_EI_in},   {"p_EI", p.p_EI},
        {"W_EE", p.W_EE},         {"W_II", p.W_II},
        {"W_IE_in", p.W_IE_in},   {"W_IE", p.W_IE},
        {"W_EI_in", p.W_EI_in},   {"W_EI", p.W_EI},
        {"n_assemblies", p.n_assemblies}, {"dt", p.dt},
    };
}

void from_json(const nlohmann::json& j, LifParams& p) {
    if (!j.is_object()) throw PreconditionError("LifParams: JSON object expected");
    nlohmann::json defaults;
    to_json(defaults, p);
    for (const auto& [key, value] : j.items())
        if (!defaults.contains(key)) throw PreconditionError("LifParams: unknown field '" + key + "'");
    try {
        auto get = [&](const char* key, auto& field) {
            if (j.contains(key)) j.at(key).get_to(field);
        };
        auto get_range = [&](const char* key, double& lo, double& hi) {
            if (!j.contains(key)) return;
            const auto& r = j.at(key);
            if (!r.is_array() || r.size() != 2) throw PreconditionError(std::string("LifParams: ") + key + " must be [min, max]");
            r.at(0).get_to(lo);
            r.at(1).get_to(hi);
        };
        get("n_exc", p.n_exc);
        get("n_inh", p.n_inh);
        get("tau_m_E", p.tau_m_E);
        get("tau_m_I", p.tau_m_I);
        get("tau_s_E", p.tau_s_E);
        get("tau_s_I", p.tau_s_I);
        get("v_threshold", p.v_threshold);
        get("v_reset", p.v_reset);
        get("t_refractory", p.t_refractory);
        get_range("u_range_E", p.u_E_min, p.u_E_max);
        get_range("u_range_I", p.u_I_min, p.u_I_max);
        get("p_EE", p.p_EE);
        get("p_II", p.p_II);
        get("p_IE_in", p.p_IE_in);
        get("p_IE", p.p_IE);
        get("p_EI_in", p.p_EI_in);
        get("p_EI", p.p_EI);
        get("W_EE", p.W_EE);
        get("W_II", p.W_II);
        get("W_IE_in", p.W_IE_in);
        get("W_IE", p.W_IE);
        get("W_EI_in", p.W_EI_in);
        get("W_EI", p.W_EI);
        get("n_assemblies", p.n_assemblies);
        get("dt", p.dt);
    } catch (const nlohmann::json::exception& e) {
        throw PreconditionError(std::string("LifParams: ") + e.what());
    }
}

AssemblyNetwork generate_assembly_network(const LifParams& p, std::uint64_t seed) {
    p.validate();
    const std::size_t n = p.size();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    AssemblyNetwork net;
    net.W = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t i = 0; i < n; ++i) {
            if (i == j) continue;
            const bool same = p.assembly(i) == p.assembly(j);
            double prob = 0.0, weight = 0.0;
            if (p.excitatory(j) && p.excitatory(i)) {
                prob = p.p_EE;
                weight = p.W_EE;
            } else if (!p.excitatory(j) && !p.excitatory(i)) {
                prob = p.p_II;
                weight = -p.W_II;
            } else if (p.excitatory(j)) {
                prob = same ? p.p_IE_in : p.p_IE;
                weight = same ? p.W_IE_in : p.W_IE;
            } else {
                prob = same ? p.p_EI_in : p.p_EI;
                weight = -(same ? p.W_EI_in : p.W_EI);
            }
            if (unit(rng) < prob) net.W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = weight;
        }
    }

    std::vector<int> planted(n), structural(n);
    for (std::size_t i = 0; i < n; ++i) {
        planted[i] = static_cast<int>(p.assembly(i));
        structural[i] = static_cast<int>(p.assembly(i) + (p.excitatory(i) ? 0 : p.n_assemblies));
    }
    net.planted = Partition(planted);
    net.structural = Partition(structural);
    return net;
}

std::vector<double> SpikeTrain::spike_times(std::size_t neuron) const {
    std::vector<double> out;
    for (const auto& e : events)
        if (e.neuron == neuron) out.push_back(e.time);
    return out;
}

Eigen::VectorXd draw_inputs(const LifParams& p, std::uint64_t seed) {
    p.validate();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ue(p.u_E_min, p.u_E_max), ui(p.u_I_min, p.u_I_max);
    Eigen::VectorXd u(static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) u(static_cast<Eigen::Index>(i)) = p.excitatory(i) ? ue(rng) : ui(rng);
    return u;
}

SpikeTrain simulate_lif(const Eigen::MatrixXd& W, const LifParams& p, const Eigen::VectorXd& inputs,
                        double duration) {
    p.validate();
    const auto n = static_cast<Eigen::Index>(p.size());
    if (W.rows() != n || W.cols() != n) throw PreconditionError("simulate_lif: weight matrix does not match params");
    if (inputs.size() != n) throw PreconditionError("simulate_lif: one input per neuron required");
    if (!(duration > 0.0) || !std::isfinite(duration)) throw PreconditionError("simulate_lif: duration must be positive");
    if (!W.allFinite() || !inputs.allFinite()) throw PreconditionError("simulate_lif: non-finite weights or inputs");

    const auto steps = static_cast<std::size_t>(std::llround(duration / p.dt));
    const auto hold = static_cast<int>(std::lround(p.t_refractory / p.dt));
    const double decay_E = std::exp(-p.dt / p.tau_s_E);
    const double decay_I = std::exp(-p.dt / p.tau_s_I);
    const auto ne = static_cast<Eigen::Index>(p.n_exc);

    Eigen::VectorXd inv_tau(n);
    inv_tau.head(ne).setConstant(1.0 / p.tau_m_E);
    inv_tau.tail(n - ne).setConstant(1.0 / p.tau_m_I);

    // Σ_j W_ij g_j split by presynaptic type so each part decays by one factor.
    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, p.v_reset);
    Eigen::VectorXd syn_E = Eigen::VectorXd::Zero(n), syn_I = Eigen::VectorXd::Zero(n);
    std::vector<int> refractory(static_cast<std::size_t>(n), 0);
    std::vector<Eigen::Index> fired;

    SpikeTrain train;
    train.duration = duration;
    train.neurons = p.size();
    for (std::size_t step = 1; step <= steps; ++step) {
        fired.clear();
        for (Eigen::Index i = 0; i < n; ++i) {
            auto& r = refractory[static_cast<std::size_t>(i)];
            if (r > 0) {
                --r;
                v(i) = p.v_reset;
                continue;
            }
            v(i) += p.dt * ((inputs(i) - v(i)) * inv_tau(i) + syn_E(i) + syn_I(i));
            if (v(i) >= p.v_threshold) {
                fired.push_back(i);
                v(i) = p.v_reset;
                r = hold;
            }
        }
        if (!v.allFinite()) throw NumericalError("simulate_lif: membrane potential diverged at step " + std::to_string(step));
        syn_E *= decay_E;
        syn_I *= decay_I;
        const double t = static_cast<double>(step) * p.dt;
        for (Eigen::Index j : fired) {
            if (j < ne)
                syn_E += W.col(j);
            else
                syn_I += W.col(j);
            train.events.push_back({t, static_cast<std::size_t>(j)});
        }
    }
    return train;
}

SpikeTrain simulate_lif(const Eigen::MatrixXd& W, const LifParams& p, double duration, std::uint64_t seed) {
    return simulate_lif(W, p, draw_inputs(p, seed), duration);
}

LinearSystem rate_model_system(const Eigen::MatrixXd& W) {
    if (W.rows() != W.cols()) throw PreconditionError("rate_model_system: weight matrix must be square");
    return LinearSystem::state_feedback(W - Eigen::MatrixXd::Identity(W.rows(), W.cols()));
}

Eigen::MatrixXd assembly_coactivation(const SpikeTrain& spikes, const Partition& groups, double window) {
    if (!(window > 0.0)) throw PreconditionError("assembly_coactivation: window must be positive");
    if (groups.size() != spikes.neurons) throw PreconditionError("assembly_coactivation: partition size mismatch");
    const auto bins = static_cast<Eigen::Index>(std::max(1.0, std::ceil(spikes.duration / window - 1e-9)));
    const auto k = static_cast<Eigen::Index>(groups.group_count());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(k, bins);
    for (const auto& e : spikes.events) {
        auto bin = static_cast<Eigen::Index>(std::floor((e.time - 1e-9) / window));
        bin = std::min(bin, bins - 1);
        if (bin < 0) continue;
        out(groups.label(e.neuron), bin) += 1.0;
    }
    const auto sizes = groups.group_sizes();
    for (Eigen::Index g = 0; g < k; ++g) out.row(g) /= static_cast<double>(sizes[static_cast<std::size_t>(g)]) * window / 1000.0;
    return out;
}

}  // namespace dynembed::lif
