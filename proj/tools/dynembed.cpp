// dynembed: command-line front end. Exit codes: 0 success, 2 usage or
// precondition failure, 3 numerical failure.

#include "dynembed/clustering.hpp"
#include "dynembed/dynamics.hpp"
#include "dynembed/embedding.hpp"
#include "dynembed/error.hpp"
#include "dynembed/graph.hpp"
#include "dynembed/io.hpp"
#include "dynembed/lif.hpp"
#include "dynembed/similarity.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace dynembed;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

struct GraphArgs {
    std::string edges;
    bool directed = false;
    std::string dynamics = "diffusion";
    std::optional<double> teleport;
};

struct TimeArgs {
    std::optional<double> t;
    std::optional<double> interval;
    bool center = false;
    double alpha = 1.0;
};

void add_graph_options(CLI::App* cmd, GraphArgs& g) {
    cmd->add_option("--edges", g.edges, "Tab-separated edge list: source, target, weight")->required();
    cmd->add_flag("--directed", g.directed, "Treat edges as directed");
    cmd->add_option("--dynamics", g.dynamics, "diffusion|rw|signed|influence|rate|discrete")
        ->check(CLI::IsMember({"diffusion", "rw", "signed", "influence", "rate", "discrete"}))
        ->capture_default_str();
    cmd->add_option("--teleport", g.teleport, "Teleportation rate for rw/discrete (0.15 when given bare)")
        ->expected(0, 1)
        ->default_str("0.15");
}

void add_time_options(CLI::App* cmd, TimeArgs& t, bool with_centering) {
    auto* point = cmd->add_option("--t", t.t, "Similarity at a single time");
    auto* interval = cmd->add_option("--interval", t.interval, "Similarity integrated over [0, X]");
    point->excludes(interval);
    interval->excludes(point);
    if (with_centering) {
        cmd->add_flag("--center", t.center, "Weight outputs by I - alpha*nu*nu^T with nu = 1/sqrt(n)");
        cmd->add_option("--alpha", t.alpha, "Centering strength in [0, 1]")->capture_default_str();
    }
}

void add_output(CLI::App* cmd, std::string& out) {
    cmd->add_option("-o,--out", out, "Output directory")->required();
}

struct Loaded {
    Graph graph;
    LinearSystem sys;
};

Loaded load(const GraphArgs& args) {
    Graph g = load_edge_list(fs::path(args.edges), args.directed);
    LinearSystem sys = make_system(g, parse_dynamics(args.dynamics), args.teleport);
    return {std::move(g), std::move(sys)};
}

std::optional<Centering> centering_for(const TimeArgs& t, Eigen::Index n) {
    if (!t.center) return std::nullopt;
    return Centering::uniform(n, t.alpha);
}

SimilarityMatrix compute_similarity(const LinearSystem& sys, const TimeArgs& t, double default_interval) {
    const auto centering = centering_for(t, sys.output_dim());
    if (t.t) {
        if (centering) return centered_similarity_at(sys, *t.t, *centering);
        return similarity_at(sys, *t.t);
    }
    const double horizon = t.interval.value_or(default_interval);
    if (sys.mode() == TimeMode::Discrete) return summed_similarity(sys, horizon, centering);
    return integrated_similarity(sys, horizon, centering);
}

json time_json(const SimilarityMatrix& psi) {
    return {{"kind", psi.time.kind == TimeSpec::Kind::Point ? "point" : "interval"}, {"t", psi.time.t}};
}

json centering_json(const SimilarityMatrix& psi) {
    if (!psi.centering) return nullptr;
    return {{"nu", "uniform"}, {"alpha", psi.centering->alpha}};
}

json partition_json(const Partition& p) {
    return {{"groups", p.group_count()}, {"labels", p.labels()}};
}

fs::path prepare(const std::string& out) {
    fs::path dir(out);
    fs::create_directories(dir);
    return dir;
}

// Every option of the subcommand with the value it resolved to, so that the
// run can be repeated from the file alone.
void write_resolved_config(const CLI::App* cmd, const fs::path& dir) {
    json args = json::object();
    for (const CLI::Option* opt : cmd->get_options()) {
        if (opt->get_lnames().empty()) continue;
        const std::string name = opt->get_lnames().front();
        if (name == "help") continue;
        if (opt->get_type_size() == 0) {
            args[name] = opt->count() > 0;
        } else if (opt->count() > 0) {
            const auto& r = opt->results();
            args[name] = r.empty() || r.front().empty() ? opt->get_default_str() : r.front();
        } else if (!opt->get_default_str().empty()) {
            args[name] = opt->get_default_str();
        } else {
            args[name] = nullptr;
        }
    }
    io::write_json(dir / "resolved_config.json", {{"command", cmd->get_name()}, {"args", args}});
}

std::vector<std::string> time_labels(const std::vector<double>& times) {
    std::vector<std::string> out;
    for (double t : times) out.push_back(io::format_double(t));
    return out;
}

std::vector<double> log_grid(double tmin, double tmax, std::size_t npoints) {
    if (!(tmin > 0.0) || !(tmax > tmin) || npoints < 2)
        throw PreconditionError("time grid needs 0 < tmin < tmax and at least two points");
    std::vector<double> times;
    const double a = std::log10(tmin), b = std::log10(tmax);
    for (std::size_t i = 0; i < npoints; ++i)
        times.push_back(std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(npoints - 1)));
    return times;
}

json plateaus_json(const ScanResult& r) {
    json out = json::array();
    for (const auto& p : r.plateaus)
        out.push_back({{"first", p.first},
                       {"last", p.last},
                       {"t_first", r.times[p.first]},
                       {"t_last", r.times[p.last]},
                       {"communities", p.communities},
                       {"mean_vi", p.mean_vi}});
    return out;
}

void write_scan(const ScanResult& r, const std::vector<std::string>& ids, const fs::path& dir, json extra) {
    const auto labels = time_labels(r.times);
    io::write_matrix_csv(dir / "vi.csv", r.vi_matrix, labels, labels, "t");
    Eigen::MatrixXd parts(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(r.times.size()));
    std::vector<double> quality;
    for (std::size_t t = 0; t < r.times.size(); ++t) {
        for (std::size_t i = 0; i < ids.size(); ++i)
            parts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)) = r.best[t].label(i);
        double q = r.runs[t].front().quality;
        for (const auto& run : r.runs[t]) q = std::max(q, run.quality);
        quality.push_back(q);
    }
    io::write_matrix_csv(dir / "partitions.csv", parts, ids, labels);
    extra["times"] = r.times;
    extra["n_communities"] = r.n_communities;
    extra["best_quality"] = quality;
    extra["plateaus"] = plateaus_json(r);
    io::write_json(dir / "scan.json", extra);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dynamical similarity, embedding and clustering of networked linear systems"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "dynembed 1.0.0");

    GraphArgs graph;
    TimeArgs time;
    std::string out;
    std::uint64_t seed = 0;

    auto* similarity = app.add_subcommand("similarity", "Write the similarity matrix and squared distances");
    add_graph_options(similarity, graph);
    add_time_options(similarity, time, true);
    add_output(similarity, out);

    Eigen::Index dims = 2;
    auto* embed = app.add_subcommand("embed", "Spectral embedding of the similarity matrix");
    add_graph_options(embed, graph);
    add_time_options(embed, time, true);
    embed->add_option("--c", dims, "Embedding dimension")->capture_default_str();
    add_output(embed, out);

    Eigen::Index dim = 1;
    std::string reference;
    auto* rank = app.add_subcommand("rank", "Rank nodes by one embedding coordinate");
    add_graph_options(rank, graph);
    add_time_options(rank, time, true);
    rank->add_option("--dim", dim, "Coordinate used for ranking (1-based)")->capture_default_str();
    rank->add_option("--reference", reference, "CSV node_id,rank to correlate against");
    add_output(rank, out);

    bool spectral = false, louvain = false;
    int k = 2;
    std::string source = "similarity";
    auto* cluster = app.add_subcommand("cluster", "Partition the nodes");
    add_graph_options(cluster, graph);
    add_time_options(cluster, time, false);
    auto* spectral_flag = cluster->add_flag("--spectral", spectral, "k-means on the leading eigenvectors");
    auto* louvain_flag = cluster->add_flag("--louvain", louvain, "Louvain on the centred similarity");
    spectral_flag->excludes(louvain_flag);
    cluster->add_option("--c", dims, "Eigenvectors used by --spectral")->capture_default_str();
    cluster->add_option("--k", k, "Groups for --spectral")->capture_default_str();
    cluster->add_option("--source", source, "similarity: leading eigenvectors of Psi; operator: smallest of -A")
        ->check(CLI::IsMember({"similarity", "operator"}))
        ->capture_default_str();
    cluster->add_option("--alpha", time.alpha, "Centering strength for --louvain")->capture_default_str();
    cluster->add_option("--seed", seed, "Random seed")->capture_default_str();
    add_output(cluster, out);

    double tmin = 0.01, tmax = 100.0;
    std::size_t npoints = 30;
    ScanOptions scan_opts;
    auto* scan = app.add_subcommand("scan", "Louvain over a log-spaced time grid with robustness analysis");
    add_graph_options(scan, graph);
    scan->add_option("--tmin", tmin)->capture_default_str();
    scan->add_option("--tmax", tmax)->capture_default_str();
    scan->add_option("--npoints", npoints)->capture_default_str();
    scan->add_option("--seeds", scan_opts.seeds, "Louvain runs per time")->capture_default_str();
    scan->add_option("--seed", scan_opts.base_seed, "Seed of the first run")->capture_default_str();
    scan->add_option("--alpha", time.alpha, "Centering strength")->capture_default_str();
    scan->add_option("--plateau-vi", scan_opts.plateau_vi, "Mean VI bound inside a plateau")->capture_default_str();
    scan->add_option("--min-plateau", scan_opts.min_plateau_points, "Grid points per plateau")->capture_default_str();
    add_output(scan, out);

    std::string params_path;
    auto* lif_gen = app.add_subcommand("lif-gen", "Generate an assembly network");
    lif_gen->add_option("--params", params_path, "JSON with LifParams fields (defaults otherwise)");
    lif_gen->add_option("--seed", seed)->capture_default_str();
    add_output(lif_gen, out);

    std::string wn_path;
    double duration = 1000.0, window = 50.0;
    auto* lif_sim = app.add_subcommand("lif-sim", "Simulate the LIF network");
    lif_sim->add_option("--wn", wn_path, "Weight matrix CSV written by lif-gen")->required();
    lif_sim->add_option("--params", params_path);
    lif_sim->add_option("--duration", duration, "Simulated time in ms")->capture_default_str();
    lif_sim->add_option("--window", window, "Bin width of the assembly activity in ms")->capture_default_str();
    lif_sim->add_option("--seed", seed, "Seed of the input draw")->capture_default_str();
    add_output(lif_sim, out);

    double lif_tmin = 0.1, lif_tmax = 100.0;
    std::size_t lif_points = 16;
    ScanOptions lif_scan;
    auto* lif_validate = app.add_subcommand("lif-validate", "Recover the planted assemblies from the rate model");
    lif_validate->add_option("--params", params_path);
    lif_validate->add_option("--seed", seed, "Network seed")->capture_default_str();
    lif_validate->add_option("--tmin", lif_tmin)->capture_default_str();
    lif_validate->add_option("--tmax", lif_tmax)->capture_default_str();
    lif_validate->add_option("--npoints", lif_points)->capture_default_str();
    lif_validate->add_option("--seeds", lif_scan.seeds, "Louvain runs per time")->capture_default_str();
    add_output(lif_validate, out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    const CLI::App* active = app.get_subcommands().front();
    try {
        auto load_params = [&] {
            lif::LifParams p;
            if (!params_path.empty()) io::read_json(params_path).get_to(p);
            p.validate();
            return p;
        };

        if (active == similarity || active == embed || active == rank) {
            const auto [g, sys] = load(graph);
            const SimilarityMatrix psi = compute_similarity(sys, time, 1.0);
            const fs::path dir = prepare(out);
            const auto& ids = g.node_ids();
            json meta = {{"time", time_json(psi)},
                         {"dynamics", graph.dynamics},
                         {"teleport", graph.teleport ? json(*graph.teleport) : json(nullptr)},
                         {"centering", centering_json(psi)}};

            if (active == similarity) {
                const DistanceMatrix d2 = distance_squared(psi);
                io::write_matrix_csv(dir / "psi.csv", psi.values, ids, ids);
                io::write_matrix_csv(dir / "dsq.csv", d2.values, ids, ids);
                meta["weighting"] = psi.weighting;
                meta["relative_min_eigenvalue"] = relative_min_eigenvalue(psi.values);
                io::write_json(dir / "similarity.json", meta);
            } else {
                const SpectralDecomp decomp = decompose(psi);
                const Eigen::Index c = active == rank ? std::max(dims, dim) : dims;
                const EmbeddingCoords emb = dynembed::embed(decomp, std::min<Eigen::Index>(c, decomp.eigenvalues.size()));
                std::vector<std::string> cols;
                for (Eigen::Index j = 0; j < emb.c; ++j) cols.push_back("phi_" + std::to_string(j + 1));
                io::write_matrix_csv(dir / "embedding.csv", emb.coords, ids, cols);
                json degenerate = json::array();
                for (auto [a, b] : decomp.degenerate) degenerate.push_back({a + 1, b + 1});
                meta["c"] = emb.c;
                meta["eigenvalues"] = std::vector<double>(decomp.eigenvalues.data(),
                                                          decomp.eigenvalues.data() + decomp.eigenvalues.size());
                meta["truncation_error"] = emb.truncation_error;
                meta["sign_convention"] = "largest-magnitude entry positive";
                meta["degenerate"] = degenerate;

                if (active == rank) {
                    const auto order = rank_by_coordinate(emb, ids, dim - 1);
                    std::ofstream csv(dir / "ranking.csv");
                    csv << "node_id,rank,score\n";
                    std::map<std::string, double> position;
                    for (std::size_t r = 0; r < order.size(); ++r) {
                        csv << ids[order[r].node] << ',' << r + 1 << ',' << io::format_double(order[r].score) << '\n';
                        position[ids[order[r].node]] = static_cast<double>(r + 1);
                    }
                    meta["dim"] = dim;
                    if (!reference.empty()) {
                        std::vector<double> ours, theirs;
                        for (const auto& [id, value] : io::read_ranking_csv(reference)) {
                            if (auto it = position.find(id); it != position.end()) {
                                ours.push_back(it->second);
                                theirs.push_back(value);
                            }
                        }
                        meta["reference"] = reference;
                        meta["matched_nodes"] = ours.size();
                        meta["spearman"] = spearman(ours, theirs);
                    }
                    io::write_json(dir / "ranking.json", meta);
                } else {
                    io::write_json(dir / "embedding.json", meta);
                }
            }
            write_resolved_config(active, dir);
        } else if (active == cluster) {
            if (!spectral && !louvain) throw PreconditionError("cluster: choose --spectral or --louvain");
            const auto [g, sys] = load(graph);
            const fs::path dir = prepare(out);
            json meta = {{"dynamics", graph.dynamics}, {"seed", seed}};
            Partition p;
            if (spectral) {
                KMeansOptions opts;
                opts.seed = seed;
                if (source == "operator") {
                    p = spectral_partition(-sys.a(), SpectralSource::Laplacian, static_cast<int>(dims), k, opts);
                } else {
                    const SimilarityMatrix psi = compute_similarity(sys, time, 1.0);
                    meta["time"] = time_json(psi);
                    p = spectral_partition(psi.values, SpectralSource::Similarity, static_cast<int>(dims), k, opts);
                }
                meta["method"] = "spectral";
                meta["source"] = source;
                meta["c"] = dims;
                meta["k"] = k;
            } else {
                if (time.interval) throw PreconditionError("cluster --louvain works on Psi at a single time (--t)");
                const double t = time.t.value_or(1.0);
                const Centering centering = Centering::uniform(sys.output_dim(), time.alpha);
                const QualityConfig q =
                    QualityConfig::from_responses(impulse_response_matrix(sys, t).y, centering.nu, centering.alpha);
                const LouvainResult r = louvain_optimize(q, {seed});
                p = r.partition;
                meta["method"] = "louvain";
                meta["time"] = {{"kind", "point"}, {"t", t}};
                meta["alpha"] = time.alpha;
                meta["quality"] = r.quality;
                meta["levels"] = r.levels;
            }
            io::write_partition_csv(dir / "partition.csv", p, g.node_ids());
            meta["partition"] = partition_json(p);
            io::write_json(dir / "cluster.json", meta);
            write_resolved_config(active, dir);
        } else if (active == scan) {
            const auto [g, sys] = load(graph);
            const auto times = log_grid(tmin, tmax, npoints);
            const ScanResult r = time_scan(sys, times, Centering::uniform(sys.output_dim(), time.alpha), scan_opts);
            const fs::path dir = prepare(out);
            write_scan(r, g.node_ids(), dir,
                       {{"dynamics", graph.dynamics}, {"alpha", time.alpha}, {"seeds", scan_opts.seeds}});
            write_resolved_config(active, dir);
        } else if (active == lif_gen) {
            const lif::LifParams p = load_params();
            const auto net = lif::generate_assembly_network(p, seed);
            const fs::path dir = prepare(out);
            const auto ids = io::index_ids(p.size());
            io::write_matrix_csv(dir / "W_N.csv", net.W, ids, ids);
            io::write_partition_csv(dir / "planted.csv", net.planted, ids);
            io::write_partition_csv(dir / "structural.csv", net.structural, ids);
            io::write_json(dir / "params.json", p);
            write_resolved_config(active, dir);
        } else if (active == lif_sim) {
            const lif::LifParams p = load_params();
            const Eigen::MatrixXd w = io::read_matrix_csv(wn_path);
            const lif::SpikeTrain spikes = lif::simulate_lif(w, p, duration, seed);
            const fs::path dir = prepare(out);
            std::ofstream csv(dir / "spikes.csv");
            csv << "time_ms,neuron_id\n";
            for (const auto& e : spikes.events) csv << io::format_double(e.time) << ',' << e.neuron << '\n';
            std::vector<int> labels(p.size());
            for (std::size_t i = 0; i < p.size(); ++i) labels[i] = static_cast<int>(p.assembly(i));
            const Eigen::MatrixXd act = lif::assembly_coactivation(spikes, Partition(labels), window);
            std::vector<std::string> rows, cols;
            for (Eigen::Index a = 0; a < act.rows(); ++a) rows.push_back(std::to_string(a));
            for (Eigen::Index b = 0; b < act.cols(); ++b) cols.push_back(io::format_double(static_cast<double>(b) * window));
            io::write_matrix_csv(dir / "coactivation.csv", act, rows, cols, "assembly");
            io::write_json(dir / "lif_sim.json", {{"spikes", spikes.events.size()},
                                                  {"duration_ms", duration},
                                                  {"mean_rate_hz", static_cast<double>(spikes.events.size()) /
                                                                       static_cast<double>(p.size()) /
                                                                       (duration / 1000.0)}});
            write_resolved_config(active, dir);
        } else if (active == lif_validate) {
            const lif::LifParams p = load_params();
            const auto net = lif::generate_assembly_network(p, seed);
            const LinearSystem sys = lif::rate_model_system(net.W);
            const auto times = log_grid(lif_tmin, lif_tmax, lif_points);
            const ScanResult r = time_scan(sys, times, Centering::uniform(sys.output_dim()), lif_scan);

            std::vector<double> vi_planted;
            for (const auto& best : r.best) vi_planted.push_back(variation_of_information(best, net.planted));
            bool recovered = false, structural = false;
            for (const auto& pl : r.plateaus)
                for (std::size_t t = pl.first; t <= pl.last; ++t) {
                    recovered = recovered || r.best[t] == net.planted;
                    structural = structural || r.best[t] == net.structural;
                }
            const fs::path dir = prepare(out);
            write_scan(r, io::index_ids(p.size()), dir,
                       {{"network_seed", seed}, {"seeds", lif_scan.seeds}});
            io::write_json(dir / "validation.json", {{"vi_to_planted", vi_planted},
                                                     {"plateaus", plateaus_json(r)},
                                                     {"recovered_planted_on_plateau", recovered},
                                                     {"structural_partition_on_plateau", structural}});
            write_resolved_config(active, dir);
        }
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}
