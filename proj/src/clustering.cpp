#include "dynembed/clustering.hpp"

#include "dynembed/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <random>
#include <string>
#include <thread>

namespace dynembed {

namespace {

void require_size(const Partition& p, Eigen::Index n, const char* op) {
    if (static_cast<Eigen::Index>(p.size()) != n)
        throw PreconditionError(std::string(op) + ": partition size does not match matrix");
}

// Runs fn(i) for i in [0, count) on up to `threads` workers. The first
// exception thrown by any worker is rethrown on the caller.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn fn) {
    threads = std::max<std::size_t>(1, std::min(threads, count));
    if (threads == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = count;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

struct MoveState {
    const Eigen::MatrixXd& fs;  // F + Fᵀ
    const Eigen::VectorXd& a;
    const Eigen::VectorXd& b;
    double alpha;
    double min_gain;
};

// Greedy single-node moves until a full sweep changes nothing. `labels`
// holds community ids in [0, n). Returns the number of accepted moves and
// adds the quality change to `quality`.
std::size_t local_moves(const MoveState& st, std::vector<int>& labels, std::mt19937_64& rng, double& quality,
                        const std::function<void(const std::vector<int>&, double)>& on_move) {
    const auto n = static_cast<std::size_t>(st.fs.rows());
    std::vector<double> sum_a(n, 0.0), sum_b(n, 0.0), link(n, 0.0);
    std::vector<std::size_t> count(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        const auto c = static_cast<std::size_t>(labels[i]);
        sum_a[c] += st.a(static_cast<Eigen::Index>(i));
        sum_b[c] += st.b(static_cast<Eigen::Index>(i));
        ++count[c];
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::size_t moves = 0;
    for (bool improved = true; improved;) {
        improved = false;
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t i : order) {
            const auto ii = static_cast<Eigen::Index>(i);
            const auto c0 = static_cast<std::size_t>(labels[i]);
            std::fill(link.begin(), link.end(), 0.0);
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) link[static_cast<std::size_t>(labels[j])] += st.fs(ii, static_cast<Eigen::Index>(j));

            const double ai = st.a(ii), bi = st.b(ii);
            sum_a[c0] -= ai;
            sum_b[c0] -= bi;
            --count[c0];
            auto gain = [&](std::size_t c) { return link[c] - st.alpha * (ai * sum_b[c] + bi * sum_a[c]); };

            const double stay = count[c0] > 0 ? gain(c0) : 0.0;
            std::size_t best = c0;
            double best_gain = stay;
            bool have_empty = count[c0] == 0;
            for (std::size_t c = 0; c < n; ++c) {
                if (c == c0) continue;
                if (count[c] == 0) {
                    if (!have_empty) {
                        have_empty = true;
                        if (0.0 > best_gain) {
                            best = c;
                            best_gain = 0.0;
                        }
                    }
                    continue;
                }
                const double g = gain(c);
                if (g > best_gain) {
                    best = c;
                    best_gain = g;
                }
            }
            if (best != c0 && best_gain - stay > st.min_gain) {
                labels[i] = static_cast<int>(best);
                quality += best_gain - stay;
                ++moves;
                improved = true;
            } else {
                best = c0;
            }
            sum_a[best] += ai;
            sum_b[best] += bi;
            ++count[best];
            if (best != c0 && on_move) on_move(labels, quality);
        }
    }
    return moves;
}

}  // namespace

double quality_score(const Eigen::MatrixXd& psi, const Partition& p) {
    if (psi.rows() != psi.cols()) throw PreconditionError("quality_score: matrix must be square");
    require_size(p, psi.rows(), "quality_score");
    double q = 0.0;
    const auto& l = p.labels();
    for (Eigen::Index j = 0; j < psi.cols(); ++j)
        for (Eigen::Index i = 0; i < psi.rows(); ++i)
            if (l[static_cast<std::size_t>(i)] == l[static_cast<std::size_t>(j)]) q += psi(i, j);
    return q;
}

double QualityConfig::evaluate(const Partition& p) const {
    require_size(p, size(), "QualityConfig::evaluate");
    std::vector<double> sa(p.group_count(), 0.0), sb(p.group_count(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        sa[static_cast<std::size_t>(p.label(i))] += a(static_cast<Eigen::Index>(i));
        sb[static_cast<std::size_t>(p.label(i))] += b(static_cast<Eigen::Index>(i));
    }
    double q = quality_score(F, p);
    for (std::size_t c = 0; c < sa.size(); ++c) q -= alpha * sa[c] * sb[c];
    return q;
}

QualityConfig QualityConfig::aggregate(const Partition& p) const {
    require_size(p, size(), "QualityConfig::aggregate");
    const auto k = static_cast<Eigen::Index>(p.group_count());
    QualityConfig out;
    out.F = Eigen::MatrixXd::Zero(k, k);
    out.a = Eigen::VectorXd::Zero(k);
    out.b = Eigen::VectorXd::Zero(k);
    out.alpha = alpha;
    out.gamma = gamma;
    const auto& l = p.labels();
    for (Eigen::Index j = 0; j < size(); ++j) {
        const auto lj = l[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < size(); ++i) out.F(l[static_cast<std::size_t>(i)], lj) += F(i, j);
        out.a(lj) += a(j);
        out.b(lj) += b(j);
    }
    return out;
}

QualityConfig QualityConfig::from_similarity(const Eigen::MatrixXd& psi) {
    if (psi.rows() != psi.cols()) throw PreconditionError("from_similarity: matrix must be square");
    return {psi, Eigen::VectorXd::Zero(psi.rows()), Eigen::VectorXd::Zero(psi.rows()), 1.0, std::nullopt};
}

QualityConfig QualityConfig::from_responses(const Eigen::MatrixXd& y, const Eigen::VectorXd& nu, double alpha) {
    if (nu.size() != y.rows()) throw PreconditionError("from_responses: centering vector has wrong length");
    const Eigen::VectorXd proj = y.transpose() * nu;
    Eigen::MatrixXd f = y.transpose() * y;
    f = (0.5 * (f + f.transpose())).eval();
    return {std::move(f), proj, proj, alpha, std::nullopt};
}

QualityConfig QualityConfig::from_slack(const Eigen::MatrixXd& psi, const Eigen::VectorXd& gamma) {
    if (psi.rows() != psi.cols()) throw PreconditionError("from_slack: matrix must be square");
    const auto n = psi.rows();
    if (gamma.size() > n) throw PreconditionError("from_slack: more slack weights than eigenvectors");
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (psi + psi.transpose()));
    // Eigen sorts ascending; γ_k pairs with the k-th largest eigenvalue.
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < gamma.size(); ++k) {
        const auto src = n - 1 - k;
        const double mu = std::max(0.0, es.eigenvalues()(src));
        z += gamma(k) * mu * es.eigenvectors().col(src).cwiseAbs2();
    }
    return {psi, z, Eigen::VectorXd::Ones(n), 1.0, gamma};
}

QualityConfig QualityConfig::modularity(const Graph& g) {
    if (g.directed() || g.is_signed()) throw PreconditionError("modularity: graph must be undirected and unsigned");
    const Eigen::VectorXd d = g.out_strength();
    const double two_m = d.sum();
    if (!(two_m > 0.0)) throw PreconditionError("modularity: graph has no edges");
    return {g.weights() / two_m, d / two_m, d / two_m, 1.0, std::nullopt};
}

LouvainResult louvain_optimize(const QualityConfig& q, const LouvainOptions& opts) {
    const auto n = q.size();
    if (q.F.cols() != n || q.a.size() != n || q.b.size() != n)
        throw PreconditionError("louvain_optimize: inconsistent quality configuration");
    if (!q.F.allFinite() || !q.a.allFinite() || !q.b.allFinite() || !std::isfinite(q.alpha))
        throw PreconditionError("louvain_optimize: quality configuration is not finite");

    LouvainResult result;
    const auto nn = static_cast<std::size_t>(n);
    if (nn == 0) return result;

    double scale = q.F.cwiseAbs().maxCoeff();
    scale = std::max(scale, std::abs(q.alpha) * q.a.cwiseAbs().maxCoeff() * q.b.cwiseAbs().maxCoeff());
    if (scale == 0.0) scale = 1.0;
    const double min_gain = opts.min_gain * scale;
    const double verify_tol = 1e-9 * scale * static_cast<double>(n);

    std::mt19937_64 rng(opts.seed);
    std::vector<int> flat(nn);
    std::iota(flat.begin(), flat.end(), 0);

    auto checker = [&](const QualityConfig& cfg) -> std::function<void(const std::vector<int>&, double)> {
        if (!opts.verify) return {};
        return [&cfg, verify_tol, last = -std::numeric_limits<double>::infinity()](const std::vector<int>& labels,
                                                                                    double tracked) mutable {
            const double fresh = cfg.evaluate(Partition(labels));
            if (std::abs(fresh - tracked) > verify_tol)
                throw NumericalError("louvain_optimize: tracked quality drifted from evaluation");
            if (fresh < last - verify_tol) throw NumericalError("louvain_optimize: quality decreased");
            last = fresh;
        };
    };

    const Eigen::MatrixXd fs0 = q.F + q.F.transpose();
    for (;;) {
        QualityConfig cur = q.aggregate(Partition(flat));
        flat = Partition(flat).labels();
        for (;;) {
            const Eigen::MatrixXd fs = cur.F + cur.F.transpose();
            std::vector<int> labels(static_cast<std::size_t>(cur.size()));
            std::iota(labels.begin(), labels.end(), 0);
            double quality = cur.evaluate(Partition(labels));
            const std::size_t moved =
                local_moves({fs, cur.a, cur.b, cur.alpha, min_gain}, labels, rng, quality, checker(cur));
            if (moved == 0) break;
            result.moves += moved;
            ++result.levels;
            const Partition pc(labels);
            for (auto& f : flat) f = pc.label(static_cast<std::size_t>(f));
            cur = cur.aggregate(pc);
        }
        // A coarse optimum can leave single nodes that would rather move.
        double quality = q.evaluate(Partition(flat));
        const std::size_t moved = local_moves({fs0, q.a, q.b, q.alpha, min_gain}, flat, rng, quality, checker(q));
        if (moved == 0) break;
        result.moves += moved;
    }
    result.partition = Partition(flat);
    result.quality = q.evaluate(result.partition);
    return result;
}

KMeansResult kmeans(const Eigen::MatrixXd& points, int k, const KMeansOptions& opts) {
    const auto n = points.rows();
    if (k < 1 || k > n) throw PreconditionError("kmeans: k must lie in [1, n]");
    if (opts.restarts < 1 || opts.max_iterations < 1) throw PreconditionError("kmeans: invalid options");
    if (!points.allFinite()) throw PreconditionError("kmeans: points are not finite");

    KMeansResult best;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int r = 0; r < opts.restarts; ++r) {
        std::seed_seq seq{static_cast<std::uint32_t>(opts.seed), static_cast<std::uint32_t>(opts.seed >> 32),
                          static_cast<std::uint32_t>(r)};
        std::mt19937_64 rng(seq);

        Eigen::MatrixXd centroids(k, points.cols());
        std::uniform_int_distribution<Eigen::Index> first(0, n - 1);
        centroids.row(0) = points.row(first(rng));
        Eigen::VectorXd d2 = (points.rowwise() - centroids.row(0)).rowwise().squaredNorm();
        for (int c = 1; c < k; ++c) {
            Eigen::Index pick;
            if (d2.sum() > 0.0) {
                std::discrete_distribution<Eigen::Index> dist(d2.data(), d2.data() + n);
                pick = dist(rng);
            } else {
                pick = first(rng);
            }
            centroids.row(c) = points.row(pick);
            d2 = d2.cwiseMin((points.rowwise() - centroids.row(c)).rowwise().squaredNorm());
        }

        std::vector<int> labels(static_cast<std::size_t>(n), 0);
        double inertia = std::numeric_limits<double>::infinity();
        for (int it = 0; it < opts.max_iterations; ++it) {
            double next = 0.0;
            Eigen::VectorXd dist(n);
            for (Eigen::Index i = 0; i < n; ++i) {
                Eigen::Index arg = 0;
                const double m = (centroids.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&arg);
                labels[static_cast<std::size_t>(i)] = static_cast<int>(arg);
                dist(i) = m;
                next += m;
            }
            Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(k, points.cols());
            std::vector<Eigen::Index> sizes(static_cast<std::size_t>(k), 0);
            for (Eigen::Index i = 0; i < n; ++i) {
                sums.row(labels[static_cast<std::size_t>(i)]) += points.row(i);
                ++sizes[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])];
            }
            for (int c = 0; c < k; ++c) {
                if (sizes[static_cast<std::size_t>(c)] > 0) {
                    centroids.row(c) = sums.row(c) / static_cast<double>(sizes[static_cast<std::size_t>(c)]);
                } else {
                    // Re-seed an empty cluster at the worst-served point.
                    Eigen::Index far = 0;
                    dist.maxCoeff(&far);
                    centroids.row(c) = points.row(far);
                    dist(far) = 0.0;
                }
            }
            const bool converged = std::abs(inertia - next) <= opts.tolerance * std::max(next, 1e-300);
            inertia = next;
            if (converged) break;
        }
        // Final assignment against the last centroids.
        double final_inertia = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Index arg = 0;
            final_inertia += (centroids.rowwise() - points.row(i)).rowwise().squaredNorm().minCoeff(&arg);
            labels[static_cast<std::size_t>(i)] = static_cast<int>(arg);
        }
        if (final_inertia < best.inertia) {
            best.inertia = final_inertia;
            best.labels = labels;
            best.centroids = centroids;
        }
    }
    return best;
}

Partition spectral_partition(const Eigen::MatrixXd& matrix, SpectralSource source, int c, int k,
                             const KMeansOptions& opts) {
    const auto n = matrix.rows();
    if (matrix.cols() != n) throw PreconditionError("spectral_partition: matrix must be square");
    if (c < 1 || c > n) throw PreconditionError("spectral_partition: c must lie in [1, n]");
    if (k < 1 || k > n) throw PreconditionError("spectral_partition: k must lie in [1, n]");
    const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
    if ((matrix - matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw PreconditionError("spectral_partition: matrix is not symmetric");

    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(matrix);
    Eigen::MatrixXd vc(n, c);
    for (int j = 0; j < c; ++j) {
        const Eigen::Index src = source == SpectralSource::Laplacian ? j : n - 1 - j;
        vc.col(j) = es.eigenvectors().col(src);
        Eigen::Index arg = 0;
        vc.col(j).cwiseAbs().maxCoeff(&arg);
        if (vc(arg, j) < 0.0) vc.col(j) = -vc.col(j);
    }
    return Partition(kmeans(vc, k, opts).labels);
}

double variation_of_information(const Partition& p1, const Partition& p2) {
    if (p1.size() != p2.size()) throw PreconditionError("variation_of_information: node sets differ");
    const std::size_t n = p1.size();
    if (n <= 1) return 0.0;
    std::map<std::pair<int, int>, std::size_t> joint;
    for (std::size_t i = 0; i < n; ++i) ++joint[{p1.label(i), p2.label(i)}];
    const double dn = static_cast<double>(n);
    auto entropy = [&](const std::vector<std::size_t>& sizes) {
        double h = 0.0;
        for (auto s : sizes) {
            const double p = static_cast<double>(s) / dn;
            h -= p * std::log(p);
        }
        return h;
    };
    std::vector<std::size_t> joint_sizes;
    joint_sizes.reserve(joint.size());
    for (const auto& [key, count] : joint) joint_sizes.push_back(count);
    const double vi = 2.0 * entropy(joint_sizes) - entropy(p1.group_sizes()) - entropy(p2.group_sizes());
    return std::clamp(vi / std::log(dn), 0.0, 1.0);
}

std::size_t default_thread_count() {
    if (const char* env = std::getenv("DYNEMBED_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

using ConfigFactory = std::function<QualityConfig(std::size_t)>;

ScanResult run_scan(std::size_t count, const ConfigFactory& make, const std::vector<double>& times,
                    const ScanOptions& opts) {
    if (opts.seeds < 2) throw PreconditionError("time_scan: at least two seeds are required");
    if (times.empty()) throw PreconditionError("time_scan: empty time grid");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1])) throw PreconditionError("time_scan: times must increase");
    const std::size_t threads = opts.threads > 0 ? opts.threads : default_thread_count();
    const std::size_t seeds = opts.seeds;

    ScanResult out;
    out.times = times;
    out.runs.assign(count, std::vector<LouvainResult>(seeds));

    // Configurations are built lazily once per time and dropped when every
    // seed for that time has finished.
    std::vector<std::shared_ptr<const QualityConfig>> cache(count);
    std::vector<std::mutex> locks(count);
    std::vector<std::atomic<std::size_t>> remaining(count);
    for (auto& r : remaining) r = seeds;

    parallel_for(count * seeds, threads, [&](std::size_t cell) {
        const std::size_t t = cell / seeds, s = cell % seeds;
        std::shared_ptr<const QualityConfig> cfg;
        {
            std::lock_guard lock(locks[t]);
            if (!cache[t]) cache[t] = std::make_shared<const QualityConfig>(make(t));
            cfg = cache[t];
        }
        out.runs[t][s] = louvain_optimize(*cfg, {opts.base_seed + s});
        if (--remaining[t] == 0) {
            std::lock_guard lock(locks[t]);
            cache[t].reset();
        }
    });

    for (const auto& runs : out.runs) {
        std::size_t best = 0;
        std::map<std::size_t, std::size_t> freq;
        for (std::size_t s = 0; s < runs.size(); ++s) {
            if (runs[s].quality > runs[best].quality) best = s;
            ++freq[runs[s].partition.group_count()];
        }
        out.best.push_back(runs[best].partition);
        std::size_t modal = 0, top = 0;
        for (const auto& [k, f] : freq)
            if (f > top) {
                modal = k;
                top = f;
            }
        out.n_communities.push_back(modal);
    }

    // VI is evaluated once per pair of distinct partitions.
    std::map<std::vector<int>, std::size_t> ids;
    std::vector<const Partition*> unique;
    std::vector<std::vector<std::size_t>> uid(count, std::vector<std::size_t>(seeds));
    for (std::size_t t = 0; t < count; ++t)
        for (std::size_t s = 0; s < seeds; ++s) {
            const auto& p = out.runs[t][s].partition;
            auto [it, inserted] = ids.try_emplace(p.labels(), unique.size());
            if (inserted) unique.push_back(&p);
            uid[t][s] = it->second;
        }
    const std::size_t u = unique.size();
    Eigen::MatrixXd vi_u = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(u));
    parallel_for(u, threads, [&](std::size_t i) {
        for (std::size_t j = i + 1; j < u; ++j)
            vi_u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                variation_of_information(*unique[i], *unique[j]);
    });
    vi_u = vi_u.selfadjointView<Eigen::Upper>();

    const auto nt = static_cast<Eigen::Index>(count);
    out.vi_matrix = Eigen::MatrixXd::Zero(nt, nt);
    for (std::size_t t = 0; t < count; ++t)
        for (std::size_t t2 = t; t2 < count; ++t2) {
            double sum = 0.0;
            std::size_t pairs = 0;
            for (std::size_t s = 0; s < seeds; ++s)
                for (std::size_t s2 = 0; s2 < seeds; ++s2) {
                    if (t == t2 && s == s2) continue;
                    sum += vi_u(static_cast<Eigen::Index>(uid[t][s]), static_cast<Eigen::Index>(uid[t2][s2]));
                    ++pairs;
                }
            const double mean = sum / static_cast<double>(pairs);
            out.vi_matrix(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(t2)) = mean;
            out.vi_matrix(static_cast<Eigen::Index>(t2), static_cast<Eigen::Index>(t)) = mean;
        }

    auto mean_vi = [&](std::size_t first, std::size_t last) {
        const auto len = static_cast<Eigen::Index>(last - first + 1);
        return out.vi_matrix
                   .block(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(first), len, len)
                   .mean();
    };
    const std::size_t min_len = std::max<std::size_t>(1, opts.min_plateau_points);
    for (std::size_t i = 0; i < count;) {
        std::size_t run_end = i;
        while (run_end + 1 < count && out.n_communities[run_end + 1] == out.n_communities[i]) ++run_end;
        std::optional<std::size_t> last;
        for (std::size_t j = run_end + 1; j-- > i;)
            if (j + 1 - i >= min_len && mean_vi(i, j) < opts.plateau_vi) {
                last = j;
                break;
            }
        if (last) {
            out.plateaus.push_back({i, *last, out.n_communities[i], mean_vi(i, *last)});
            i = *last + 1;
        } else {
            ++i;
        }
    }
    return out;
}

}  // namespace

ScanResult time_scan(const LinearSystem& sys, const std::vector<double>& times, const Centering& centering,
                     const ScanOptions& opts) {
    if (centering.nu.size() != sys.output_dim()) throw PreconditionError("time_scan: centering has wrong length");
    if (std::abs(centering.nu.norm() - 1.0) > 1e-12) throw PreconditionError("time_scan: centering must be unit");
    return run_scan(
        times.size(),
        [&](std::size_t t) {
            const Eigen::MatrixXd y = impulse_response_matrix(sys, times[t]).y;
            return QualityConfig::from_responses(y, centering.nu, centering.alpha);
        },
        times, opts);
}

ScanResult time_scan(const std::vector<QualityConfig>& configs, const std::vector<double>& times,
                     const ScanOptions& opts) {
    if (configs.size() != times.size()) throw PreconditionError("time_scan: one configuration per time required");
    return run_scan(configs.size(), [&](std::size_t t) { return configs[t]; }, times, opts);
}

}  // namespace dynembed
