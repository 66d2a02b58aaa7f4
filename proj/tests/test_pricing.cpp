#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "oracles.hpp"
#include "pcp/master.hpp"
#include "pcp/pricing.hpp"
#include "pcp/rng.hpp"

using namespace pcp;
using master::Column;
using master::DualPrices;
using pricing::Backend;

namespace {

DualPrices zero_duals(const ConflictGraph& g, int piles) {
    DualPrices d;
    d.piles = piles;
    d.pi.assign(g.vertex_count(), 0.0);
    d.lambda.assign(g.partition_slots(), 0.0);
    d.edges = g.alive_edges();
    d.mu.assign(d.edges.size() * piles, 0.0);
    return d;
}

DualPrices random_duals(const ConflictGraph& g, int piles, std::uint64_t seed,
                        bool with_mu = false) {
    DualPrices d = zero_duals(g, piles);
    SplitMix64 rng(seed);
    for (VertexId v : g.alive_vertices()) d.pi[v] = -rng.next_unit();
    for (int p : g.active_partitions()) d.lambda[p] = rng.next_uniform(-2.0, 8.0);
    if (with_mu)
        for (auto& mu : d.mu)
            if (rng.next_unit() < 0.3) mu = -rng.next_unit();
    return d;
}

// true reduced cost from first principles, kept independent of the
// pricing implementation
double rc_reference(const Column& col, const DualPrices& d, const ConflictGraph& g, int pile) {
    double acc = 0.0;
    for (VertexId v : col.vertices)
        acc += d.pi[v] * g.completion(v) + d.lambda[g.partition_of(v)];
    for (std::size_t e = 0; e < d.edges.size(); ++e) {
        auto [a, b] = d.edges[e];
        bool inc = false;
        for (VertexId v : col.vertices) inc = inc || v == a || v == b;
        if (inc) acc += d.mu[e * d.piles + pile];
    }
    return -acc;
}

} // namespace

TEST_CASE("vertex weights follow omega = pi*e - lambda") {
    Instance inst = generate(10, 2, 5, 1);
    ConflictGraph g = build_conflict_graph(inst);

    DualPrices d = zero_duals(g, 5);
    for (int p = 0; p < 5; ++p) d.lambda[p] = 5.0;
    auto w = pricing::vertex_weights(d, g);
    for (VertexId v : g.alive_vertices()) CHECK(w.omega[v] == doctest::Approx(-5.0));

    DualPrices d2 = zero_duals(g, 5);
    d2.pi[0] = -0.5;
    d2.lambda[g.partition_of(0)] = -10.0;
    // force e_0 = 18 via a handmade instance
    Instance direct;
    direct.horizon = 24;
    direct.duration = 3;
    direct.piles = 1;
    direct.vertices = {{0, 0, 15, 18}};
    direct.partitions = {{0}};
    ConflictGraph g2 = build_conflict_graph(direct);
    DualPrices d3 = zero_duals(g2, 1);
    d3.pi[0] = -0.5;
    d3.lambda[0] = -10.0;
    auto w3 = pricing::vertex_weights(d3, g2);
    CHECK(w3.omega[0] == doctest::Approx(-0.5 * 18 + 10.0)); // = 1
}

TEST_CASE("super-vertices use merged lambda and contracted completion") {
    Instance inst = generate(8, 2, 2, 3);
    ConflictGraph g = build_conflict_graph(inst);
    VertexId cu = -1, cv = -1;
    for (int u = 0; u < 8 && cu < 0; ++u)
        for (int v = u + 1; v < 8; ++v)
            if (!g.adjacent(u, v)) {
                cu = u;
                cv = v;
                break;
            }
    REQUIRE(cu >= 0);
    VertexId z = g.contract(cu, cv);
    DualPrices d = zero_duals(g, 2);
    d.pi[z] = -1.0;
    d.lambda[g.partition_of(z)] = 2.0;
    auto w = pricing::vertex_weights(d, g);
    CHECK(w.omega[z] == doctest::Approx(-1.0 * g.completion(z) - 2.0));
}

TEST_CASE("sum of omegas reproduces the true reduced cost when pi and mu vanish") {
    // two disjoint single-interval vehicles: no edges, and only the
    // makespan-defining vertex can carry a nonzero pi
    Instance inst;
    inst.horizon = 24;
    inst.duration = 3;
    inst.piles = 1;
    inst.vertices = {{0, 0, 0, 3}, {1, 1, 6, 9}};
    inst.partitions = {{0}, {1}};
    ConflictGraph g = build_conflict_graph(inst);
    master::RmpModel rmp(g, 1);
    for (const Column& c : master::initial_columns(g)) rmp.add_column(c);
    auto sol = rmp.solve();
    REQUIRE(sol.status == lp::SolveStatus::Optimal);
    DualPrices d = rmp.extract_duals(sol);
    auto w = pricing::vertex_weights(d, g);
    REQUIRE(d.edges.empty()); // no mu terms at all
    for (VertexId v : g.alive_vertices()) {
        if (d.pi[v] != 0.0) continue;
        CHECK(w.omega[v] ==
              doctest::Approx(pricing::reduced_cost(Column{{v}}, d, g, 0)).epsilon(1e-12));
    }
}

TEST_CASE("reduced cost: zero duals, singleton formula, tableau cross-check") {
    Instance inst = generate(10, 2, 5, 2);
    ConflictGraph g = build_conflict_graph(inst);

    DualPrices zero = zero_duals(g, 5);
    CHECK(pricing::reduced_cost(Column{{0}}, zero, g, 0) == doctest::Approx(0.0));

    DualPrices d = random_duals(g, 5, 99);
    Column single{{3}};
    CHECK(pricing::reduced_cost(single, d, g, 0) ==
          doctest::Approx(-(d.pi[3] * g.completion(3) + d.lambda[g.partition_of(3)])));

    // cross-check against the LP's own reduced costs on a solved RMP
    master::RmpModel rmp(g, 5);
    for (const Column& c : master::initial_columns(g)) rmp.add_column(c);
    auto sol = rmp.solve();
    REQUIRE(sol.status == lp::SolveStatus::Optimal);
    DualPrices duals = rmp.extract_duals(sol);
    for (std::size_t col = 0; col < rmp.columns().size(); ++col) {
        for (int c = 0; c < 5; ++c) {
            // zeta variables of column col start after tau (variable 0)
            int var = 1 + static_cast<int>(col) * 5 + c;
            double lp_rc = sol.reduced_cost[var];
            double ours = pricing::reduced_cost(rmp.columns()[col], duals, g, c);
            CHECK(std::abs(lp_rc - ours) <= 1e-6 * (1.0 + std::abs(lp_rc)));
        }
    }
}

TEST_CASE("exact pricing matches subset enumeration on random duals") {
    SplitMix64 rng(31);
    for (int trial = 0; trial < 30; ++trial) {
        Instance inst = generate(12, 2, 2, 1000 + trial);
        ConflictGraph g = build_conflict_graph(inst);
        DualPrices d = random_duals(g, 2, 555 + trial, trial % 2 == 1);

        // oracle weight: pi*e + lambda + incident mu for each pile profile
        double best_oracle = 0.0;
        for (int c = 0; c < 2; ++c) {
            std::vector<double> w(g.vertex_count(), 0.0);
            for (VertexId v : g.alive_vertices())
                w[v] = d.pi[v] * g.completion(v) + d.lambda[g.partition_of(v)];
            for (std::size_t e = 0; e < d.edges.size(); ++e) {
                auto [a, b] = d.edges[e];
                w[a] += d.mu[e * 2 + c];
                w[b] += d.mu[e * 2 + c];
            }
            best_oracle = std::max(best_oracle, oracle::mwis_brute(g, w).first);
        }

        pricing::PricingResult res = pricing::price_exact(d, g, 1e-6);
        if (best_oracle > 1e-6) {
            REQUIRE_FALSE(res.columns.empty());
            CHECK(res.best_reduced_cost == doctest::Approx(-best_oracle).epsilon(1e-9));
            for (const Column& col : res.columns) {
                double rc = pricing::best_reduced_cost(col, d, g);
                CHECK(rc < -1e-6);
                double ref = std::min(rc_reference(col, d, g, 0), rc_reference(col, d, g, 1));
                CHECK(rc == doctest::Approx(ref).epsilon(1e-9).scale(
                                std::max(1.0, std::abs(rc))));
            }
        } else {
            CHECK(res.columns.empty());
        }
    }
}

TEST_CASE("exact pricing on a path graph picks the endpoints") {
    Instance inst;
    inst.horizon = 24;
    inst.duration = 3;
    inst.piles = 1;
    // u [0,3), v [2,5), w [4,7): path u-v-w across three vehicles
    inst.vertices = {{0, 0, 0, 3}, {1, 1, 2, 5}, {2, 2, 4, 7}};
    inst.partitions = {{0}, {1}, {2}};
    ConflictGraph g = build_conflict_graph(inst);
    REQUIRE(g.adjacent(0, 1));
    REQUIRE(g.adjacent(1, 2));
    REQUIRE_FALSE(g.adjacent(0, 2));

    DualPrices d = zero_duals(g, 1);
    d.lambda = {3.0, 1.0, 3.0}; // favors {u, w}
    pricing::PricingResult res = pricing::price_exact(d, g, 1e-6);
    REQUIRE_FALSE(res.columns.empty());
    CHECK(res.columns.front().vertices == std::vector<VertexId>{0, 2});

    // all-unfavorable duals price nothing
    DualPrices bad = zero_duals(g, 1);
    bad.lambda = {-1.0, -1.0, -1.0};
    CHECK(pricing::price_exact(bad, g, 1e-6).columns.empty());
}

TEST_CASE("qubo energies match hand expansion on spec-sized examples") {
    // one vertex, one pile, omega = 2, lambda1 = 10
    Instance inst;
    inst.horizon = 24;
    inst.duration = 3;
    inst.piles = 1;
    inst.vertices = {{0, 0, 5, 8}};
    inst.partitions = {{0}};
    ConflictGraph g = build_conflict_graph(inst);
    pricing::VertexWeights w;
    w.omega.assign(1, 2.0);
    pricing::QuboModel q = pricing::build_qubo(w, g, 1, 10.0, 10.0);
    CHECK(q.num_binaries == 1);
    CHECK(q.energy({1}) == doctest::Approx(-2.0));
    CHECK(q.energy({0}) == doctest::Approx(10.0));

    // edge (u,v), one pile, both selected: conflict penalty only
    Instance inst2;
    inst2.horizon = 24;
    inst2.duration = 3;
    inst2.piles = 1;
    inst2.vertices = {{0, 0, 0, 3}, {1, 1, 1, 4}};
    inst2.partitions = {{0}, {1}};
    ConflictGraph g2 = build_conflict_graph(inst2);
    pricing::VertexWeights w2;
    w2.omega.assign(2, 0.0);
    pricing::QuboModel q2 = pricing::build_qubo(w2, g2, 1, 10.0, 10.0);
    // both selected: H1 = 0, H2 = 10
    CHECK(q2.energy({1, 1}) == doctest::Approx(10.0));

    // empty conflict graph with zero weights: a feasible one-hot has H = 0
    Instance inst3;
    inst3.horizon = 24;
    inst3.duration = 3;
    inst3.piles = 2;
    inst3.vertices = {{0, 0, 0, 3}, {1, 1, 10, 13}};
    inst3.partitions = {{0}, {1}};
    ConflictGraph g3 = build_conflict_graph(inst3);
    pricing::VertexWeights w3;
    w3.omega.assign(2, 0.0);
    pricing::QuboModel q3 = pricing::build_qubo(w3, g3, 2, 7.0, 7.0);
    CHECK(q3.energy({1, 0, 0, 1}) == doctest::Approx(0.0));

    CHECK_THROWS_AS(pricing::build_qubo(w3, g3, 2, 0.0, 7.0), std::invalid_argument);
}

TEST_CASE("qubo to ising: single product term and exhaustive equality") {
    // single quadratic term q * x_i x_j
    pricing::QuboModel q;
    q.num_binaries = 2;
    q.var_map = {{0, 0}, {1, 0}};
    q.linear.assign(2, 0.0);
    q.quad.emplace_back(0, 1, 3.0 / 2.0); // product coefficient 3
    qaia::IsingModel ising = pricing::qubo_to_ising(q);
    REQUIRE(ising.couplings.size() == 1);
    CHECK(std::get<2>(ising.couplings[0]) == doctest::Approx(3.0 / 4.0));
    CHECK(ising.h[0] == doctest::Approx(3.0 / 4.0));
    CHECK(ising.h[1] == doctest::Approx(3.0 / 4.0));
    CHECK(ising.offset == doctest::Approx(3.0 / 4.0));
    for (int mask = 0; mask < 4; ++mask) {
        std::vector<std::uint8_t> x{static_cast<std::uint8_t>(mask & 1),
                                    static_cast<std::uint8_t>((mask >> 1) & 1)};
        std::vector<int> s{x[0] ? 1 : -1, x[1] ? 1 : -1};
        CHECK(q.energy(x) == doctest::Approx(qaia::energy(ising, s)).epsilon(1e-12));
    }

    // all-zero qubo maps to the all-zero ising
    pricing::QuboModel z;
    z.num_binaries = 3;
    z.var_map = {{0, 0}, {1, 0}, {2, 0}};
    z.linear.assign(3, 0.0);
    qaia::IsingModel zi = pricing::qubo_to_ising(z);
    CHECK(zi.couplings.empty());
    CHECK(zi.offset == doctest::Approx(0.0));
    for (double h : zi.h) CHECK(h == doctest::Approx(0.0));

    // random 8-variable pricing qubo: all 256 assignments agree to 1e-12
    Instance inst = generate(4, 2, 2, 11);
    ConflictGraph g = build_conflict_graph(inst);
    DualPrices d = random_duals(g, 2, 12345);
    auto w = pricing::vertex_weights(d, g);
    pricing::QuboModel rq = pricing::build_qubo(w, g, 2, 9.0, 13.0);
    qaia::IsingModel ri = pricing::qubo_to_ising(rq);
    REQUIRE(rq.num_binaries == 8);
    for (int mask = 0; mask < 256; ++mask) {
        std::vector<std::uint8_t> x(8);
        std::vector<int> s(8);
        for (int i = 0; i < 8; ++i) {
            x[i] = (mask >> i) & 1;
            s[i] = x[i] ? 1 : -1;
        }
        CHECK(std::abs(rq.energy(x) - qaia::energy(ri, s)) <= 1e-12 *
                                                                  std::max(1.0, std::abs(rq.energy(x))));
    }
}

TEST_CASE("repair: fixed point, weight rule, tie rule, totality") {
    Instance inst;
    inst.horizon = 24;
    inst.duration = 3;
    inst.piles = 1;
    inst.vertices = {{0, 0, 0, 3}, {1, 1, 2, 5}, {2, 2, 10, 13}};
    inst.partitions = {{0}, {1}, {2}};
    ConflictGraph g = build_conflict_graph(inst);

    pricing::VertexWeights w;
    w.omega = {3.0, 1.0, 2.0};
    pricing::QuboModel q = pricing::build_qubo(w, g, 1, 50.0, 50.0);

    // already feasible: {0, 2} unchanged
    auto col = pricing::repair(q, {1, 0, 1}, w, g, nullptr, 1e-6);
    REQUIRE(col.has_value());
    CHECK(col->vertices == std::vector<VertexId>{0, 2});

    // conflict (0,1): omega favors 0
    auto col2 = pricing::repair(q, {1, 1, 0}, w, g, nullptr, 1e-6);
    REQUIRE(col2.has_value());
    CHECK(col2->vertices == std::vector<VertexId>{0});

    // equal weights tie: lower id kept
    pricing::VertexWeights weq;
    weq.omega = {2.0, 2.0, 2.0};
    auto col3 = pricing::repair(q, {1, 1, 1}, weq, g, nullptr, 1e-6);
    REQUIRE(col3.has_value());
    CHECK(col3->vertices == std::vector<VertexId>{0, 2});

    // empty selection
    CHECK_FALSE(pricing::repair(q, {0, 0, 0}, w, g, nullptr, 1e-6).has_value());
}

TEST_CASE("repair fuzz: arbitrary bits always produce a clean column or nothing") {
    SplitMix64 rng(9090);
    for (int trial = 0; trial < 60; ++trial) {
        Instance inst = generate(8 + 2 * static_cast<int>(rng.next_below(3)), 2,
                                 1 + static_cast<int>(rng.next_below(3)), 40 + trial);
        ConflictGraph g = build_conflict_graph(inst);
        DualPrices d = random_duals(g, inst.piles, 7000 + trial);
        auto w = pricing::vertex_weights(d, g);
        double pen = pricing::auto_penalty(w, g, inst.piles);
        pricing::QuboModel q = pricing::build_qubo(w, g, inst.piles, pen, pen);
        for (int rep = 0; rep < 40; ++rep) {
            std::vector<std::uint8_t> bits(q.num_binaries);
            for (auto& b : bits) b = rng.next_below(2);
            auto col = pricing::repair(q, bits, w, g, nullptr, 1e-6);
            if (!col) continue;
            // invariant-clean: alive, independent, <= 1 per partition
            for (std::size_t i = 0; i < col->vertices.size(); ++i) {
                CHECK(g.alive(col->vertices[i]));
                for (std::size_t j = i + 1; j < col->vertices.size(); ++j) {
                    CHECK_FALSE(g.adjacent(col->vertices[i], col->vertices[j]));
                    CHECK(g.partition_of(col->vertices[i]) !=
                          g.partition_of(col->vertices[j]));
                }
            }
        }
    }
}

TEST_CASE("auto penalties make every qubo minimizer decodable") {
    // feasible miniatures with |V| <= 2C so the auto penalty dominates
    SplitMix64 rng(4242);
    int checked = 0;
    for (int trial = 0; trial < 60 && checked < 8; ++trial) {
        Instance inst = generate(3, 3, 3, 500 + trial);
        if (!oracle::optimal_makespan(inst)) continue; // need a feasible schedule
        ConflictGraph g = build_conflict_graph(inst);
        DualPrices d = random_duals(g, 3, 600 + trial);
        auto w = pricing::vertex_weights(d, g);
        double pen = pricing::auto_penalty(w, g, 3);
        pricing::QuboModel q = pricing::build_qubo(w, g, 3, pen, pen);
        REQUIRE(q.num_binaries == 9);

        double best = 1e100;
        std::vector<int> minimizers;
        for (int mask = 0; mask < (1 << 9); ++mask) {
            std::vector<std::uint8_t> x(9);
            for (int i = 0; i < 9; ++i) x[i] = (mask >> i) & 1;
            double e = q.energy(x);
            if (e < best - 1e-9) {
                best = e;
                minimizers = {mask};
            } else if (e <= best + 1e-9) {
                minimizers.push_back(mask);
            }
        }
        for (int mask : minimizers) {
            // decode: no same-pile conflict, at most one (v,c) per partition
            std::vector<int> pile_of(g.vertex_count(), -1);
            std::vector<int> per_part(g.partition_slots(), 0);
            for (int i = 0; i < 9; ++i) {
                if (!((mask >> i) & 1)) continue;
                auto [v, c] = q.var_map[i];
                CHECK(pile_of[v] == -1); // one pile per vertex
                pile_of[v] = c;
            }
            for (int v = 0; v < g.vertex_count(); ++v)
                if (pile_of[v] >= 0) ++per_part[g.partition_of(v)];
            for (int p : g.active_partitions()) CHECK(per_part[p] <= 1);
            for (auto [a, b] : g.alive_edges())
                if (pile_of[a] >= 0 && pile_of[a] == pile_of[b]) CHECK(false);
        }
        ++checked;
    }
    CHECK(checked >= 5);
}

TEST_CASE("qaia pricing recovers the exact optimum on a tiny instance") {
    // duals of an early column-generation state: the pool holds only the
    // first candidate of each vehicle, so strongly improving columns exist
    Instance inst = generate(12, 2, 2, 2000);
    ConflictGraph g = build_conflict_graph(inst);
    master::RmpModel rmp(g, 2);
    for (int p = 0; p < inst.num_vehicles(); ++p)
        rmp.add_column(Column{{inst.partitions[p][0]}});
    auto sol = rmp.solve();
    REQUIRE(sol.status == lp::SolveStatus::Optimal);
    DualPrices d = rmp.extract_duals(sol);

    pricing::PricingResult exact = pricing::price_exact(d, g, 1e-6);
    REQUIRE_FALSE(exact.columns.empty());

    pricing::PricingConfig cfg;
    cfg.restarts = 32;
    int agree_bsb = 0, agree_simcim = 0;
    for (int seed = 0; seed < 50; ++seed) {
        pricing::PricingResult qa =
            pricing::price_qaia(d, g, cfg, Backend::Bsb, 1000 + seed);
        for (const Column& col : qa.columns)
            CHECK(pricing::best_reduced_cost(col, d, g) < -1e-6);
        if (!qa.columns.empty() &&
            std::abs(qa.best_reduced_cost - exact.best_reduced_cost) <= 1e-6)
            ++agree_bsb;
        pricing::PricingResult qs =
            pricing::price_qaia(d, g, cfg, Backend::SimCim, 6000 + seed);
        if (!qs.columns.empty() &&
            std::abs(qs.best_reduced_cost - exact.best_reduced_cost) <= 1e-6)
            ++agree_simcim;
    }
    CHECK(agree_bsb >= 45);    // >= 90 percent of 50 seeded runs
    CHECK(agree_simcim >= 45);
}

TEST_CASE("qaia pricing returns nothing when no improving column exists") {
    Instance inst = generate(10, 2, 5, 1);
    ConflictGraph g = build_conflict_graph(inst);
    DualPrices d = zero_duals(g, 5);
    pricing::PricingConfig cfg;
    cfg.restarts = 8;
    pricing::PricingResult res = pricing::price_qaia(d, g, cfg, Backend::SimCim, 4);
    CHECK(res.columns.empty());
}
