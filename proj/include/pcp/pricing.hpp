#ifndef PCP_PRICING_HPP
#define PCP_PRICING_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pcp/instance.hpp"
#include "pcp/master.hpp"
#include "pcp/qaia.hpp"

namespace pcp::pricing {

enum class Backend { Exact, Bsb, SimCim };

std::string backend_name(Backend b);
std::optional<Backend> backend_from_name(const std::string& name);

// omega_v = pi_v * e_v - lambda_{p(v)}, recomputed from scratch per call.
// Super-vertices pick up the merged partition's lambda and their contracted
// completion time through the graph view.
struct VertexWeights {
    std::vector<double> omega; // per vertex slot, 0 for dead
};

VertexWeights vertex_weights(const master::DualPrices& duals, const ConflictGraph& graph);

// Exact LP reduced cost of zeta_{S,c}:
//   -( sum_{v in S} pi_v e_v + sum_{n hit} lambda_n
//      + sum_{(u,v) in E: u in S or v in S} mu_{(u,v),c} )
double reduced_cost(const master::Column& col, const master::DualPrices& duals,
                    const ConflictGraph& graph, int pile);
// min over piles
double best_reduced_cost(const master::Column& col, const master::DualPrices& duals,
                         const ConflictGraph& graph);

struct PricingResult {
    std::vector<master::Column> columns;
    double best_reduced_cost = 0.0;
    Backend backend = Backend::Exact;
    double wall_time_s = 0.0;
};

struct PricingConfig {
    Backend backend = Backend::Exact;
    int restarts = 32;
    int max_cols = 10;
    double alpha = 0.0;   // pile-use bias, kept out of the exact certificate
    double rc_eps = 1e-6;
    double lambda1 = 0.0; // 0 -> auto
    double lambda2 = 0.0; // 0 -> auto
    qaia::QaiaConfig qaia;
};

// Exhaustive max-weight independent-set pricing, one candidate per distinct
// pile dual-profile. An empty result certifies that no column with reduced
// cost < -rc_eps exists.
PricingResult price_exact(const master::DualPrices& duals, const ConflictGraph& graph,
                          double rc_eps, double alpha = 0.0);

// QUBO over binaries x_{v,c} (alive v, pile c):
//   H0 = -sum omega_v x_{v,c}
//   H1 = lambda1 * sum_p (sum_{v in P_p, c} x_{v,c} - 1)^2
//   H2 = lambda2 * sum_c sum_{(u,v) in E} x_{u,c} x_{v,c}
// energy(x) = x^T Q x + l^T x + offset with Q symmetric, zero diagonal.
struct QuboModel {
    int num_binaries = 0;
    std::vector<std::pair<VertexId, int>> var_map; // index -> (vertex, pile)
    std::vector<std::tuple<int, int, double>> quad; // (i, j, Q_ij), i < j
    std::vector<double> linear;
    double offset = 0.0;
    double lambda1 = 0.0, lambda2 = 0.0;

    double energy(const std::vector<std::uint8_t>& x) const;
};

QuboModel build_qubo(const VertexWeights& weights, const ConflictGraph& graph, int piles,
                     double lambda1, double lambda2);

// penalty large enough that feasible assignments dominate:
// 2 * (max|omega| * min(|alive V|, 2C) + 1)
double auto_penalty(const VertexWeights& weights, const ConflictGraph& graph, int piles);

// x = (1 + sigma)/2 substitution; energies agree exactly on all assignments
qaia::IsingModel qubo_to_ising(const QuboModel& q);

// Greedy repair of a raw binary assignment: aggregate piles, drop the
// smaller-omega endpoint of each selected conflict edge (tie: keep lower id),
// keep only the max-omega vertex per partition, then accept the column only
// if duals are given and its best reduced cost beats -rc_eps (no filter when
// duals is null). Total for arbitrary input.
std::optional<master::Column> repair(const QuboModel& q, const std::vector<std::uint8_t>& raw,
                                     const VertexWeights& weights, const ConflictGraph& graph,
                                     const master::DualPrices* duals, double rc_eps);

// QUBO + QAIA pricing: R restarts, one repair per restart, dedup, filter by
// reduced cost, best max_cols returned. Empty results are not a proof of
// optimality; callers must fall back to price_exact.
PricingResult price_qaia(const master::DualPrices& duals, const ConflictGraph& graph,
                         const PricingConfig& cfg, Backend which, std::uint64_t seed);

} // namespace pcp::pricing

#endif
