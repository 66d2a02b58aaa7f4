#include "pcp/pricing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <queue>
#include <stdexcept>

#include "pcp/rng.hpp"

namespace pcp::pricing {

std::string backend_name(Backend b) {
    switch (b) {
    case Backend::Exact: return "exact";
    case Backend::Bsb: return "bsb";
    case Backend::SimCim: return "simcim";
    }
    return "?";
}

std::optional<Backend> backend_from_name(const std::string& name) {
    if (name == "exact") return Backend::Exact;
    if (name == "bsb") return Backend::Bsb;
    if (name == "simcim") return Backend::SimCim;
    return std::nullopt;
}

VertexWeights vertex_weights(const master::DualPrices& duals, const ConflictGraph& graph) {
    VertexWeights w;
    w.omega.assign(graph.vertex_count(), 0.0);
    for (VertexId v : graph.alive_vertices())
        w.omega[v] = duals.pi[v] * graph.completion(v) - duals.lambda[graph.partition_of(v)];
    return w;
}

double reduced_cost(const master::Column& col, const master::DualPrices& duals,
                    const ConflictGraph& graph, int pile) {
    double acc = 0.0;
    for (VertexId v : col.vertices) {
        acc += duals.pi[v] * graph.completion(v);
        acc += duals.lambda[graph.partition_of(v)];
    }
    const auto& vs = col.vertices;
    for (std::size_t e = 0; e < duals.edges.size(); ++e) {
        double mu = duals.mu[e * duals.piles + pile];
        if (mu == 0.0) continue;
        auto [a, b] = duals.edges[e];
        if (std::binary_search(vs.begin(), vs.end(), a) ||
            std::binary_search(vs.begin(), vs.end(), b))
            acc += mu;
    }
    return -acc;
}

double best_reduced_cost(const master::Column& col, const master::DualPrices& duals,
                         const ConflictGraph& graph) {
    double best = reduced_cost(col, duals, graph, 0);
    for (int c = 1; c < duals.piles; ++c) best = std::min(best, reduced_cost(col, duals, graph, c));
    return best;
}

namespace {

// exact max-weight independent set, best-first on the optimistic bound
struct MwisNode {
    double bound;
    double weight;
    Bitset chosen;
    Bitset cand;
    long seq;
};

struct MwisCmp {
    bool operator()(const MwisNode& a, const MwisNode& b) const {
        if (a.bound != b.bound) return a.bound < b.bound;
        return a.seq > b.seq;
    }
};

// weights indexed by vertex slot; only strictly positive weights matter
std::pair<double, std::vector<VertexId>> max_weight_set(const ConflictGraph& graph,
                                                        const std::vector<double>& w) {
    int cap = graph.vertex_count();
    std::vector<VertexId> order;
    for (int v = 0; v < cap; ++v)
        if (graph.alive(v) && w[v] > 0.0) order.push_back(v);
    std::sort(order.begin(), order.end(), [&](VertexId a, VertexId b) {
        if (w[a] != w[b]) return w[a] > w[b];
        return a < b;
    });
    std::vector<int> rank(cap, -1);
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);

    double best_w = 0.0;
    std::vector<VertexId> best_set;

    std::priority_queue<MwisNode, std::vector<MwisNode>, MwisCmp> pq;
    long seq = 0;
    {
        MwisNode root{0.0, 0.0, Bitset(cap), Bitset(cap), seq++};
        for (VertexId v : order) {
            root.cand.set(v);
            root.bound += w[v];
        }
        if (root.bound <= 0.0) return {0.0, {}};
        pq.push(std::move(root));
    }

    while (!pq.empty()) {
        MwisNode node = pq.top();
        pq.pop();
        if (node.bound <= best_w + 1e-12) break;

        // branch on the heaviest remaining candidate
        VertexId pick = -1;
        for (VertexId v : order)
            if (node.cand.test(v)) {
                pick = v;
                break;
            }
        if (pick < 0) {
            if (node.weight > best_w) {
                best_w = node.weight;
                best_set.clear();
                node.chosen.for_each([&](int v) { best_set.push_back(v); });
            }
            continue;
        }

        // include
        {
            MwisNode inc;
            inc.chosen = node.chosen;
            inc.chosen.set(pick);
            inc.cand = node.cand;
            inc.cand.reset(pick);
            inc.cand.and_not(graph.neighbors(pick));
            inc.weight = node.weight + w[pick];
            inc.bound = inc.weight;
            inc.cand.for_each([&](int v) { inc.bound += w[v]; });
            inc.seq = seq++;
            if (inc.weight > best_w) {
                best_w = inc.weight;
                best_set.clear();
                inc.chosen.for_each([&](int v) { best_set.push_back(v); });
            }
            if (inc.bound > best_w + 1e-12 && inc.cand.any()) pq.push(std::move(inc));
        }
        // exclude
        {
            MwisNode exc;
            exc.chosen = node.chosen;
            exc.cand = node.cand;
            exc.cand.reset(pick);
            exc.weight = node.weight;
            exc.bound = exc.weight;
            exc.cand.for_each([&](int v) { exc.bound += w[v]; });
            exc.seq = seq++;
            if (exc.bound > best_w + 1e-12) pq.push(std::move(exc));
        }
    }
    std::sort(best_set.begin(), best_set.end());
    return {best_w, best_set};
}

} // namespace

PricingResult price_exact(const master::DualPrices& duals, const ConflictGraph& graph,
                          double rc_eps, double alpha) {
    auto t0 = std::chrono::steady_clock::now();
    PricingResult res;
    res.backend = Backend::Exact;
    (void)alpha; // bias for heuristic backends only; an exact pass must stay a certificate

    int cap = graph.vertex_count();
    std::vector<double> base(cap, 0.0);
    for (VertexId v : graph.alive_vertices())
        base[v] = duals.pi[v] * graph.completion(v) + duals.lambda[graph.partition_of(v)];

    // group piles with identical mu profiles; with all-slack edge rows this
    // is a single group
    std::vector<int> profile_rep;
    for (int c = 0; c < duals.piles; ++c) {
        bool dup = false;
        for (int r : profile_rep) {
            bool same = true;
            for (std::size_t e = 0; e < duals.edges.size() && same; ++e)
                same = duals.mu[e * duals.piles + c] == duals.mu[e * duals.piles + r];
            if (same) {
                dup = true;
                break;
            }
        }
        if (!dup) profile_rep.push_back(c);
    }

    std::map<std::vector<VertexId>, double> found; // key -> reduced cost
    for (int c : profile_rep) {
        std::vector<double> w = base;
        for (std::size_t e = 0; e < duals.edges.size(); ++e) {
            double mu = duals.mu[e * duals.piles + c];
            if (mu == 0.0) continue;
            auto [a, b] = duals.edges[e];
            w[a] += mu;
            w[b] += mu;
        }
        auto [weight, set] = max_weight_set(graph, w);
        if (weight > rc_eps && !set.empty()) {
            double rc = -weight;
            auto it = found.find(set);
            if (it == found.end() || rc < it->second) found[set] = rc;
        }
    }

    res.best_reduced_cost = 0.0;
    std::vector<std::pair<double, std::vector<VertexId>>> ranked;
    for (auto& [key, rc] : found) ranked.emplace_back(rc, key);
    std::sort(ranked.begin(), ranked.end());
    for (auto& [rc, key] : ranked) {
        res.columns.push_back(master::Column{key});
        res.best_reduced_cost = std::min(res.best_reduced_cost, rc);
    }
    res.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

double QuboModel::energy(const std::vector<std::uint8_t>& x) const {
    if (static_cast<int>(x.size()) != num_binaries)
        throw std::invalid_argument("qubo energy: assignment length mismatch");
    double e = offset;
    for (int i = 0; i < num_binaries; ++i)
        if (x[i]) e += linear[i];
    for (auto [i, j, q] : quad)
        if (x[i] && x[j]) e += 2.0 * q;
    return e;
}

double auto_penalty(const VertexWeights& weights, const ConflictGraph& graph, int piles) {
    double max_abs = 0.0;
    int alive = 0;
    for (VertexId v : graph.alive_vertices()) {
        max_abs = std::max(max_abs, std::abs(weights.omega[v]));
        ++alive;
    }
    return 2.0 * (max_abs * std::min(alive, 2 * piles) + 1.0);
}

QuboModel build_qubo(const VertexWeights& weights, const ConflictGraph& graph, int piles,
                     double lambda1, double lambda2) {
    if (lambda1 <= 0.0 || lambda2 <= 0.0)
        throw std::invalid_argument("build_qubo: penalties must be positive");

    QuboModel q;
    q.lambda1 = lambda1;
    q.lambda2 = lambda2;

    std::vector<int> var_of(static_cast<std::size_t>(graph.vertex_count()) * piles, -1);
    for (VertexId v : graph.alive_vertices())
        for (int c = 0; c < piles; ++c) {
            var_of[static_cast<std::size_t>(v) * piles + c] = q.num_binaries++;
            q.var_map.emplace_back(v, c);
        }
    q.linear.assign(q.num_binaries, 0.0);

    std::map<std::pair<int, int>, double> quad;
    auto add_quad = [&](int i, int j, double v) {
        if (i > j) std::swap(i, j);
        quad[{i, j}] += v;
    };

    // H0: reward selected weight
    for (int idx = 0; idx < q.num_binaries; ++idx)
        q.linear[idx] -= weights.omega[q.var_map[idx].first];

    // H1: (sum over the partition block - 1)^2 expands to -l1 per variable,
    // +2*l1 per pair inside the block, +l1 constant
    for (int p : graph.active_partitions()) {
        std::vector<int> block;
        for (VertexId v : graph.partition_alive(p))
            for (int c = 0; c < piles; ++c)
                block.push_back(var_of[static_cast<std::size_t>(v) * piles + c]);
        for (int idx : block) q.linear[idx] -= lambda1;
        for (std::size_t i = 0; i < block.size(); ++i)
            for (std::size_t j = i + 1; j < block.size(); ++j)
                add_quad(block[i], block[j], lambda1); // Q_ij, product coeff 2*l1
        q.offset += lambda1;
    }

    // H2: same-pile conflicts
    for (auto [a, b] : graph.alive_edges())
        for (int c = 0; c < piles; ++c)
            add_quad(var_of[static_cast<std::size_t>(a) * piles + c],
                     var_of[static_cast<std::size_t>(b) * piles + c], lambda2 / 2.0);

    for (auto& [key, v] : quad) q.quad.emplace_back(key.first, key.second, v);
    return q;
}

qaia::IsingModel qubo_to_ising(const QuboModel& q) {
    qaia::IsingModel m;
    m.n = q.num_binaries;
    m.h.assign(m.n, 0.0);
    m.offset = q.offset;
    for (int i = 0; i < m.n; ++i) {
        m.offset += q.linear[i] / 2.0;
        m.h[i] += q.linear[i] / 2.0;
    }
    for (auto [i, j, qij] : q.quad) {
        // product coefficient 2*qij: x_i x_j = (1 + s_i + s_j + s_i s_j)/4
        double p4 = qij / 2.0;
        m.add_coupling(i, j, p4);
        m.h[i] += p4;
        m.h[j] += p4;
        m.offset += p4;
    }
    return m;
}

std::optional<master::Column> repair(const QuboModel& q, const std::vector<std::uint8_t>& raw,
                                     const VertexWeights& weights, const ConflictGraph& graph,
                                     const master::DualPrices* duals, double rc_eps) {
    if (static_cast<int>(raw.size()) != q.num_binaries)
        throw std::invalid_argument("repair: assignment length mismatch");

    std::vector<char> selected(graph.vertex_count(), 0);
    for (int idx = 0; idx < q.num_binaries; ++idx)
        if (raw[idx]) selected[q.var_map[idx].first] = 1;

    // conflict sweep in canonical edge order: keep the larger-omega endpoint
    for (auto [a, b] : graph.alive_edges()) {
        if (!selected[a] || !selected[b]) continue;
        double wa = weights.omega[a], wb = weights.omega[b];
        if (wa > wb)
            selected[b] = 0;
        else if (wb > wa)
            selected[a] = 0;
        else
            selected[std::max(a, b)] = 0; // tie: keep the lower id
    }

    // one vertex per partition: keep the max-omega member, tie to lower id
    for (int p : graph.active_partitions()) {
        VertexId keep = -1;
        for (VertexId v : graph.partition_alive(p)) {
            if (!selected[v]) continue;
            if (keep < 0 || weights.omega[v] > weights.omega[keep]) keep = v;
        }
        if (keep < 0) continue;
        for (VertexId v : graph.partition_alive(p))
            if (selected[v] && v != keep) selected[v] = 0;
    }

    master::Column col;
    for (int v = 0; v < graph.vertex_count(); ++v)
        if (selected[v]) col.vertices.push_back(v);
    if (col.vertices.empty()) return std::nullopt;

    if (duals && best_reduced_cost(col, *duals, graph) >= -rc_eps) return std::nullopt;
    return col;
}

PricingResult price_qaia(const master::DualPrices& duals, const ConflictGraph& graph,
                         const PricingConfig& cfg, Backend which, std::uint64_t seed) {
    auto t0 = std::chrono::steady_clock::now();
    PricingResult res;
    res.backend = which;

    VertexWeights w = vertex_weights(duals, graph);
    double l1 = cfg.lambda1 > 0.0 ? cfg.lambda1 : auto_penalty(w, graph, duals.piles);
    double l2 = cfg.lambda2 > 0.0 ? cfg.lambda2 : auto_penalty(w, graph, duals.piles);
    QuboModel qubo = build_qubo(w, graph, duals.piles, l1, l2);
    qaia::IsingModel ising = qubo_to_ising(qubo);

    qaia::QaiaConfig qcfg = cfg.qaia;
    qcfg.restarts = cfg.restarts;
    qcfg.seed = seed;

    qaia::detail::BatchOutput batch;
    try {
        batch = qaia::detail::run_batch(ising, qcfg, which == Backend::SimCim);
    } catch (const std::exception&) {
        // non-finite dynamics: report nothing, the caller falls back to exact
        res.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        return res;
    }

    double accept = cfg.rc_eps + std::max(0.0, cfg.alpha);
    std::map<std::vector<VertexId>, double> found;
    std::vector<std::uint8_t> bits(qubo.num_binaries);
    for (const auto& spins : batch.spins) {
        if (static_cast<int>(spins.size()) != qubo.num_binaries) continue; // failed restart
        for (int i = 0; i < qubo.num_binaries; ++i) bits[i] = spins[i] > 0 ? 1 : 0;
        auto col = repair(qubo, bits, w, graph, nullptr, cfg.rc_eps);
        if (!col) continue;
        double rc = best_reduced_cost(*col, duals, graph);
        if (rc >= -accept) continue;
        auto it = found.find(col->vertices);
        if (it == found.end() || rc < it->second) found[col->vertices] = rc;
    }

    std::vector<std::pair<double, std::vector<VertexId>>> ranked;
    for (auto& [key, rc] : found) ranked.emplace_back(rc, key);
    std::sort(ranked.begin(), ranked.end());
    if (static_cast<int>(ranked.size()) > cfg.max_cols) ranked.resize(cfg.max_cols);

    res.best_reduced_cost = 0.0;
    for (auto& [rc, key] : ranked) {
        res.columns.push_back(master::Column{key});
        res.best_reduced_cost = std::min(res.best_reduced_cost, rc);
    }
    res.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace pcp::pricing
