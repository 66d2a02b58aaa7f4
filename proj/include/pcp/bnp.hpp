#ifndef PCP_BNP_HPP
#define PCP_BNP_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pcp/instance.hpp"
#include "pcp/pricing.hpp"

namespace pcp::bnp {

struct BnpConfig {
    pricing::Backend backend = pricing::Backend::Exact;
    double time_limit_s = 3600.0;
    std::uint64_t seed = 0;
    pricing::PricingConfig pricing;
    bool verify_lp = false; // per-solve dual/slackness checks, counted in stats
    long lazy_row_threshold = 50000;
};

struct Incumbent {
    std::vector<VertexId> selection; // original vertices, sorted
    std::vector<int> pile_of;        // aligned with selection
    int makespan = -1;
    long long found_at_node = -1;
    double found_at_time_s = 0.0;
};

struct SolveStats {
    long long obj = -1;
    double gap_percent = 0.0;
    double t_total_s = 0.0, t_rmp_s = 0.0, t_pricing_s = 0.0;
    long long n_pricing_calls = 0; // N_p
    long long n_columns = 0;       // N_c, distinct columns added by pricing
    long long n_nodes = 0;         // N_n, nodes whose RMP reached an optimum
    long long n_heuristic_calls = 0, n_exact_calls = 0;
    long long n_lp_check_violations = 0;
    std::string status; // optimal | time-limit | infeasible
};

struct BranchEvent {
    const ConflictGraph* parent = nullptr;
    const ConflictGraph* child_a = nullptr; // select / different-color child
    const ConflictGraph* child_b = nullptr; // discard / same-color child
    int rule = 0;
    int piles = 0;
};

struct SolveHooks {
    std::function<void(const BranchEvent&)> on_branch;
};

struct SolveResult {
    std::optional<Incumbent> incumbent;
    SolveStats stats;
};

// Best-first branch-and-price over the partition coloring formulation.
// Column generation runs heuristic-first when a QAIA backend is selected and
// always certifies LP optimality with the exact pricer before bounding.
SolveResult solve(const Instance& inst, const BnpConfig& cfg, const SolveHooks* hooks = nullptr);

// reporting convention: ceil(LB - 1e-6) against the integer incumbent,
// clamped to [0, 100]
double gap_percent(long long ub, double lb_global);

} // namespace pcp::bnp

#endif
