#include "pcp/bnp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <memory>
#include <queue>
#include <stdexcept>

#include "pcp/rng.hpp"

namespace pcp::bnp {

namespace {

constexpr double kMassTol = 1e-6;

struct NodeData {
    ConflictGraph graph;
    std::shared_ptr<NodeData> parent;
    std::vector<master::Column> generated; // original-vertex space
    std::vector<VertexId> fixed;
};

struct Node {
    long long id = 0;
    double bound = 0.0;
    std::shared_ptr<NodeData> data;
};

struct NodeOrder {
    bool operator()(const Node& a, const Node& b) const {
        if (a.bound != b.bound) return a.bound > b.bound; // min bound first
        return a.id > b.id;                               // then FIFO
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// maps an original-space column into the node's vertex space; nullopt when a
// member was discarded or the image stopped being independent
std::optional<master::Column> encode_column(const ConflictGraph& g, const master::Column& col) {
    std::vector<VertexId> mapped;
    for (VertexId ov : col.vertices) {
        auto rep = g.representative(ov);
        if (!rep) return std::nullopt;
        mapped.push_back(*rep);
    }
    std::sort(mapped.begin(), mapped.end());
    mapped.erase(std::unique(mapped.begin(), mapped.end()), mapped.end());
    for (std::size_t i = 0; i < mapped.size(); ++i)
        for (std::size_t j = i + 1; j < mapped.size(); ++j) {
            if (g.adjacent(mapped[i], mapped[j])) return std::nullopt;
            if (g.partition_of(mapped[i]) == g.partition_of(mapped[j])) return std::nullopt;
        }
    return master::Column{mapped};
}

master::Column decode_column(const ConflictGraph& g, const master::Column& col) {
    std::vector<VertexId> originals;
    for (VertexId v : col.vertices) g.expand(v, originals);
    std::sort(originals.begin(), originals.end());
    return master::Column{originals};
}

// exact coloring of a small "must differ" graph with at most `colors` colors;
// classes are tried in order, colors capped by used+1 to break symmetry
bool color_classes(const std::vector<std::vector<char>>& conflict, int colors,
                   std::vector<int>& assignment) {
    int k = static_cast<int>(conflict.size());
    assignment.assign(k, -1);
    std::vector<int> order(k);
    for (int i = 0; i < k; ++i) order[i] = i;

    std::function<bool(int, int)> rec = [&](int pos, int used) {
        if (pos == k) return true;
        int limit = std::min(colors, used + 1);
        for (int c = 0; c < limit; ++c) {
            bool ok = true;
            for (int j = 0; j < pos && ok; ++j)
                if (assignment[order[j]] == c && conflict[order[pos]][order[j]]) ok = false;
            if (!ok) continue;
            assignment[order[pos]] = c;
            if (rec(pos + 1, std::max(used, c + 1))) return true;
            assignment[order[pos]] = -1;
        }
        return false;
    };
    return rec(0, 0);
}

struct Solver {
    const Instance& inst;
    const BnpConfig& cfg;
    const SolveHooks* hooks;
    ConflictGraph root_graph;
    Clock::time_point t0;

    std::priority_queue<Node, std::vector<Node>, NodeOrder> open;
    long long next_id = 0;
    std::optional<Incumbent> incumbent;
    SolveStats stats;
    bool out_of_time = false;
    double interrupted_bound = 0.0;

    lp::LpSolution last_solution;
    long long pricing_calls_seeded = 0;

    Solver(const Instance& i, const BnpConfig& c, const SolveHooks* h)
        : inst(i), cfg(c), hooks(h), root_graph(build_conflict_graph(i)) {}

    bool time_up() const { return seconds_since(t0) >= cfg.time_limit_s; }

    void push_node(double bound, std::shared_ptr<NodeData> data) {
        open.push(Node{next_id++, bound, std::move(data)});
    }

    std::vector<master::Column> inherited_pool(const NodeData& node) const {
        std::vector<const std::vector<master::Column>*> chain;
        for (const NodeData* d = node.parent.get(); d; d = d->parent.get())
            chain.push_back(&d->generated);
        std::reverse(chain.begin(), chain.end()); // root first for determinism
        std::vector<master::Column> out;
        for (const auto* gen : chain) out.insert(out.end(), gen->begin(), gen->end());
        return out;
    }

    long install_columns(NodeData& node, master::RmpModel& rmp,
                         const std::vector<master::Column>& cols) {
        long added = 0;
        for (const master::Column& col : cols) {
            if (rmp.add_column(col)) {
                ++added;
                ++stats.n_columns;
                node.generated.push_back(decode_column(node.graph, col));
            }
        }
        return added;
    }

    // column generation at one node; returns the converged LP value or
    // nullopt on infeasibility / timeout
    std::optional<double> column_generation(NodeData& node, master::RmpModel& rmp) {
        for (const master::Column& col : master::initial_columns(node.graph)) rmp.add_column(col);
        for (const master::Column& col : inherited_pool(node)) {
            auto enc = encode_column(node.graph, col);
            if (enc) rmp.add_column(*enc);
        }

        lp::Basis warm;
        bool have_warm = false;
        bool counted_node = false;

        while (true) {
            auto t_lp = Clock::now();
            lp::LpSolution sol = rmp.solve(have_warm ? &warm : nullptr);
            stats.t_rmp_s += seconds_since(t_lp);

            if (sol.status == lp::SolveStatus::Infeasible) return std::nullopt;
            if (sol.status != lp::SolveStatus::Optimal)
                throw std::runtime_error("bnp: master LP did not reach an optimum");
            if (!counted_node) {
                ++stats.n_nodes;
                counted_node = true;
            }
            if (cfg.verify_lp)
                stats.n_lp_check_violations +=
                    static_cast<long long>(rmp.verify_solution(sol).size());
            warm = sol.basis;
            have_warm = true;
            last_solution = sol;

            if (time_up()) {
                out_of_time = true;
                return std::nullopt;
            }

            master::DualPrices duals = rmp.extract_duals(sol);
            long added = 0;

            if (cfg.backend != pricing::Backend::Exact) {
                std::uint64_t call_seed = mix_seed(cfg.seed, ++pricing_calls_seeded);
                auto t_pr = Clock::now();
                pricing::PricingResult hr =
                    pricing::price_qaia(duals, node.graph, cfg.pricing, cfg.backend, call_seed);
                stats.t_pricing_s += seconds_since(t_pr);
                ++stats.n_pricing_calls;
                ++stats.n_heuristic_calls;
                added += install_columns(node, rmp, hr.columns);
            }
            if (added == 0) {
                auto t_pr = Clock::now();
                pricing::PricingResult er = pricing::price_exact(
                    duals, node.graph, cfg.pricing.rc_eps, cfg.pricing.alpha);
                stats.t_pricing_s += seconds_since(t_pr);
                ++stats.n_pricing_calls;
                ++stats.n_exact_calls;
                added += install_columns(node, rmp, er.columns);
                if (added == 0) return sol.objective; // exact certificate
            }
        }
    }

    // decodes a node-space (vertex, pile) selection and re-verifies it
    // against the original instance
    Incumbent decode_selection(const NodeData& node,
                               const std::vector<std::pair<VertexId, int>>& picks,
                               double lp_value) {
        std::vector<VertexId> selection;
        std::vector<int> pile_of;
        for (auto [v, pile] : picks) {
            std::vector<VertexId> originals;
            node.graph.expand(v, originals);
            for (VertexId ov : originals) {
                selection.push_back(ov);
                pile_of.push_back(pile);
            }
        }
        std::vector<int> order(selection.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return selection[a] < selection[b]; });
        Incumbent inc;
        for (int i : order) {
            inc.selection.push_back(selection[i]);
            inc.pile_of.push_back(pile_of[i]);
        }

        std::vector<int> per_vehicle(inst.num_vehicles(), 0);
        for (VertexId v : inc.selection) ++per_vehicle[inst.vertices[v].vehicle];
        for (int n = 0; n < inst.num_vehicles(); ++n)
            if (per_vehicle[n] != 1)
                throw std::logic_error("bnp: decoded selection misses vehicle " +
                                       std::to_string(n));
        for (std::size_t i = 0; i < inc.selection.size(); ++i)
            for (std::size_t j = i + 1; j < inc.selection.size(); ++j)
                if (inc.pile_of[i] == inc.pile_of[j] &&
                    root_graph.adjacent(inc.selection[i], inc.selection[j]))
                    throw std::logic_error("bnp: decoded selection has a same-pile conflict");

        int ms = 0;
        for (VertexId v : inc.selection) ms = std::max(ms, inst.vertices[v].completion);
        if (ms < lp_value - 1e-4)
            throw std::logic_error("bnp: node LP value exceeds its own integral makespan");
        inc.makespan = ms;
        return inc;
    }

    void offer_incumbent(Incumbent inc, long long node_id) {
        if (!incumbent || inc.makespan < incumbent->makespan) {
            inc.found_at_node = node_id;
            inc.found_at_time_s = seconds_since(t0);
            incumbent = inc;
        }
    }

    struct Children {
        std::shared_ptr<NodeData> a, b;
        bool b_stillborn = false;
        int rule = 0;
    };

    struct BranchPlan {
        enum class Kind { Branched, Closed, Infeasible } kind = Kind::Infeasible;
        Children children;
        std::vector<std::pair<VertexId, int>> closed_selection;
    };

    Children make_select_discard(const NodeData& node, int partition, VertexId pick, int rule) {
        Children ch;
        ch.rule = rule;
        ch.a = std::make_shared<NodeData>();
        ch.a->graph = node.graph;
        for (VertexId w : node.graph.partition_alive(partition))
            if (w != pick) ch.a->graph.remove_vertex(w);
        ch.a->fixed = node.fixed;
        ch.a->fixed.push_back(pick);

        ch.b = std::make_shared<NodeData>();
        ch.b->graph = node.graph;
        ch.b->graph.remove_vertex(pick);
        ch.b->fixed = node.fixed;
        ch.b_stillborn = ch.b->graph.partition_alive(partition).empty();
        return ch;
    }

    Children make_pair_branch(const NodeData& node, VertexId u, VertexId v, int rule) {
        Children ch;
        ch.rule = rule;
        ch.a = std::make_shared<NodeData>(); // different-color child
        ch.a->graph = node.graph;
        ch.a->graph.add_edge(u, v);
        ch.a->fixed = node.fixed;

        ch.b = std::make_shared<NodeData>(); // same-color child
        ch.b->graph = node.graph;
        VertexId z = ch.b->graph.contract(u, v);
        // both endpoints are forced selected through z, so their former
        // partition siblings cannot be chosen anymore
        for (VertexId w : ch.b->graph.partition_alive(ch.b->graph.partition_of(z)))
            if (w != z) ch.b->graph.remove_vertex(w);
        ch.b->fixed = node.fixed;
        ch.b->fixed.push_back(z);
        return ch;
    }

    BranchPlan plan_branch(const NodeData& node, const master::RmpModel& rmp,
                           const master::RmpModel::FractionalReport& rep) {
        const ConflictGraph& g = node.graph;
        BranchPlan plan;

        // rule 1: a partition with two or more fractionally selected vertices
        int best_p = -1, best_cnt = 1;
        for (int p : g.active_partitions()) {
            int cnt = 0;
            for (VertexId v : g.partition_alive(p))
                if (rep.vertex_mass[v] > kMassTol) ++cnt;
            if (cnt > best_cnt) {
                best_cnt = cnt;
                best_p = p;
            }
        }
        if (best_p >= 0) {
            VertexId pick = -1;
            double best_mass = -1.0;
            for (VertexId v : g.partition_alive(best_p))
                if (rep.vertex_mass[v] > best_mass + 1e-12) {
                    best_mass = rep.vertex_mass[v];
                    pick = v;
                }
            plan.kind = BranchPlan::Kind::Branched;
            plan.children = make_select_discard(node, best_p, pick, 1);
            return plan;
        }

        // rule 2: fractionally co-occurring cross-partition pair
        VertexId bu = -1, bv = -1;
        double best_mass = 0.0;
        for (const auto& [key, mass] : rep.pair_mass) {
            if (mass <= kMassTol || mass >= 1.0 - kMassTol) continue;
            if (mass > best_mass + 1e-12) {
                best_mass = mass;
                bu = key.first;
                bv = key.second;
            }
        }
        if (bu >= 0) {
            if (g.partition_of(bu) == g.partition_of(bv))
                throw std::logic_error("bnp: co-occurring pair inside one partition");
            plan.kind = BranchPlan::Kind::Branched;
            plan.children = make_pair_branch(node, bu, bv, 2);
            return plan;
        }

        // Fractional solution that neither rule can split: the selection is
        // integral and only the pile assignment is smeared (the pile-indexed
        // master is symmetric across piles). Group the selected vertices into
        // always-together classes and schedule the classes exactly; when that
        // works the node is solved at its own bound. Otherwise keep branching
        // on undecided pairs or selections until the leaves are decidable.
        std::vector<VertexId> chosen;
        for (int p : g.active_partitions()) {
            VertexId hit = -1;
            for (VertexId v : g.partition_alive(p)) {
                if (rep.vertex_mass[v] <= kMassTol) continue;
                if (hit >= 0 || rep.vertex_mass[v] < 1.0 - kMassTol)
                    throw std::logic_error("bnp: fractional vertex mass escaped rule 1");
                hit = v;
            }
            if (hit < 0) throw std::logic_error("bnp: uncovered partition in a solved RMP");
            chosen.push_back(hit);
        }

        // co-occurrence classes: pair mass 1 means "always on one pile"
        int k = static_cast<int>(chosen.size());
        std::vector<int> cls(k);
        for (int i = 0; i < k; ++i) cls[i] = i;
        std::function<int(int)> find = [&](int x) {
            while (cls[x] != x) x = cls[x] = cls[cls[x]];
            return x;
        };
        auto index_of = [&](VertexId v) {
            return static_cast<int>(std::find(chosen.begin(), chosen.end(), v) - chosen.begin());
        };
        for (const auto& [key, mass] : rep.pair_mass)
            if (mass >= 1.0 - kMassTol)
                cls[find(index_of(key.first))] = find(index_of(key.second));

        std::vector<int> roots;
        std::vector<int> class_of(k);
        for (int i = 0; i < k; ++i) {
            int r = find(i);
            auto it = std::find(roots.begin(), roots.end(), r);
            if (it == roots.end()) {
                roots.push_back(r);
                class_of[i] = static_cast<int>(roots.size()) - 1;
            } else {
                class_of[i] = static_cast<int>(it - roots.begin());
            }
        }
        int nc = static_cast<int>(roots.size());
        std::vector<std::vector<char>> conflict(nc, std::vector<char>(nc, 0));
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j)
                if (class_of[i] != class_of[j] && g.adjacent(chosen[i], chosen[j]))
                    conflict[class_of[i]][class_of[j]] = conflict[class_of[j]][class_of[i]] = 1;

        std::vector<int> colors;
        if (color_classes(conflict, rmp.piles(), colors)) {
            plan.kind = BranchPlan::Kind::Closed;
            for (int i = 0; i < k; ++i)
                plan.closed_selection.emplace_back(chosen[i], colors[class_of[i]]);
            return plan;
        }

        // same-pile overlap s(u,v) over undecided (non-adjacent, cross-class)
        // chosen pairs; branch on the largest
        std::vector<double> pile_mass(static_cast<std::size_t>(g.vertex_count()) * rmp.piles(),
                                      0.0);
        for (std::size_t col = 0; col < rmp.columns().size(); ++col)
            for (int c = 0; c < rmp.piles(); ++c) {
                double z = rmp.zeta_value(last_solution, static_cast<int>(col), c);
                if (z <= kMassTol) continue;
                for (VertexId v : rmp.columns()[col].vertices)
                    pile_mass[static_cast<std::size_t>(v) * rmp.piles() + c] += z;
            }
        VertexId su = -1, sv = -1;
        double best_s = -1.0;
        for (int i = 0; i < k; ++i)
            for (int j = i + 1; j < k; ++j) {
                if (class_of[i] == class_of[j]) continue;
                if (g.adjacent(chosen[i], chosen[j])) continue;
                double s = 0.0;
                for (int c = 0; c < rmp.piles(); ++c)
                    s += std::min(
                        pile_mass[static_cast<std::size_t>(chosen[i]) * rmp.piles() + c],
                        pile_mass[static_cast<std::size_t>(chosen[j]) * rmp.piles() + c]);
                if (s > best_s + 1e-12) {
                    best_s = s;
                    su = std::min(chosen[i], chosen[j]);
                    sv = std::max(chosen[i], chosen[j]);
                }
            }
        if (su >= 0) {
            plan.kind = BranchPlan::Kind::Branched;
            plan.children = make_pair_branch(node, su, sv, 3);
            return plan;
        }

        // every chosen pair is decided; open a selection elsewhere
        for (int p : g.active_partitions()) {
            auto members = g.partition_alive(p);
            if (members.size() < 2) continue;
            VertexId pick = -1;
            for (VertexId v : members)
                if (rep.vertex_mass[v] > 1.0 - kMassTol) pick = v;
            if (pick < 0) pick = members.front();
            plan.kind = BranchPlan::Kind::Branched;
            plan.children = make_select_discard(node, p, pick, 3);
            return plan;
        }

        // fully decided and the classes need more piles than exist
        plan.kind = BranchPlan::Kind::Infeasible;
        return plan;
    }

    SolveResult run() {
        t0 = Clock::now();
        auto root = std::make_shared<NodeData>();
        root->graph = root_graph;
        push_node(0.0, root);

        while (!open.empty()) {
            if (time_up()) {
                out_of_time = true;
                interrupted_bound = open.top().bound;
                break;
            }
            Node node = open.top();
            open.pop();

            if (incumbent &&
                std::ceil(node.bound - 1e-6) >= static_cast<double>(incumbent->makespan))
                continue; // fathomed by bound

            master::RmpModel rmp(node.data->graph, inst.piles, cfg.lazy_row_threshold);
            std::optional<double> lp_value = column_generation(*node.data, rmp);
            if (out_of_time) {
                interrupted_bound = node.bound;
                break;
            }
            if (!lp_value) continue; // fathomed infeasible

            double bound = *lp_value;
            if (incumbent && std::ceil(bound - 1e-6) >= static_cast<double>(incumbent->makespan))
                continue;

            auto rep = rmp.fractional_report(last_solution);
            if (rep.integral) {
                std::vector<std::pair<VertexId, int>> picks;
                for (auto [col_idx, pile] : rep.selected)
                    for (VertexId v : rmp.columns()[col_idx].vertices)
                        picks.emplace_back(v, pile);
                offer_incumbent(decode_selection(*node.data, picks, bound), node.id);
                continue;
            }

            BranchPlan plan = plan_branch(*node.data, rmp, rep);
            if (plan.kind == BranchPlan::Kind::Infeasible) continue;
            if (plan.kind == BranchPlan::Kind::Closed) {
                offer_incumbent(decode_selection(*node.data, plan.closed_selection, bound),
                                node.id);
                continue;
            }

            Children& children = plan.children;
            children.a->parent = node.data;
            children.b->parent = node.data;
            if (hooks && hooks->on_branch) {
                BranchEvent ev;
                ev.parent = &node.data->graph;
                ev.child_a = &children.a->graph;
                ev.child_b = &children.b->graph;
                ev.rule = children.rule;
                ev.piles = inst.piles;
                hooks->on_branch(ev);
            }
            push_node(bound, children.a);
            if (!children.b_stillborn) push_node(bound, children.b);
        }

        stats.t_total_s = seconds_since(t0);
        if (out_of_time) {
            stats.status = "time-limit";
            if (incumbent) {
                double lb = static_cast<double>(incumbent->makespan);
                lb = std::min(lb, interrupted_bound);
                if (!open.empty()) lb = std::min(lb, open.top().bound); // heap min
                stats.obj = incumbent->makespan;
                stats.gap_percent = gap_percent(incumbent->makespan, lb);
            } else {
                stats.obj = -1;
                stats.gap_percent = 100.0;
            }
        } else if (incumbent) {
            stats.status = "optimal";
            stats.obj = incumbent->makespan;
            stats.gap_percent = 0.0;
        } else {
            stats.status = "infeasible";
            stats.obj = -1;
            stats.gap_percent = 0.0;
        }
        return SolveResult{incumbent, stats};
    }
};

} // namespace

double gap_percent(long long ub, double lb_global) {
    if (ub <= 0) return 0.0;
    double lb = std::ceil(lb_global - 1e-6);
    double gap = 100.0 * (static_cast<double>(ub) - lb) / static_cast<double>(ub);
    return std::clamp(gap, 0.0, 100.0);
}

SolveResult solve(const Instance& inst, const BnpConfig& cfg, const SolveHooks* hooks) {
    if (inst.num_vertices() == 0) throw std::invalid_argument("solve: empty instance");
    Solver s(inst, cfg, hooks);
    return s.run();
}

} // namespace pcp::bnp
