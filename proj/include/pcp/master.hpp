#ifndef PCP_MASTER_HPP
#define PCP_MASTER_HPP

#include <map>
#include <string>
#include <vector>

#include "pcp/instance.hpp"
#include "pcp/lp.hpp"

namespace pcp::master {

// An independent set of interval vertices, the unit priced into the RMP.
// Vertices are kept sorted; the sorted vector doubles as the dedup key.
struct Column {
    std::vector<VertexId> vertices;

    void normalize() { std::sort(vertices.begin(), vertices.end()); }
    bool operator==(const Column& o) const { return vertices == o.vertices; }
    bool operator<(const Column& o) const { return vertices < o.vertices; }
};

// Duals of the three RMP row families. pi and mu come from <= rows of a
// minimization and are nonpositive; lambda (equality rows) is free. mu is
// stored edge-major: mu[e * piles + c], zero for rows not materialized.
struct DualPrices {
    std::vector<double> pi;     // per vertex slot
    std::vector<double> lambda; // per partition slot
    std::vector<std::pair<VertexId, VertexId>> edges;
    std::vector<double> mu;
    int piles = 1;
};

// Restricted master over the current column pool:
//   min tau
//   s.t. sum_{S ni v, c} e_v zeta_{S,c} <= tau            (per alive vertex)
//        sum_{S cap P_n != 0, c} zeta_{S,c}  = 1          (per active partition)
//        sum_{S: u in S or v in S} zeta_{S,c} <= 1        (per edge, per pile)
// Each pooled column owns C consecutive zeta variables.
class RmpModel {
public:
    RmpModel(const ConflictGraph& graph, int piles, long lazy_row_threshold = 50000);

    // false if the key is already pooled; throws on invariant violations
    bool add_column(const Column& col);

    lp::LpSolution solve(const lp::Basis* warm = nullptr);

    DualPrices extract_duals(const lp::LpSolution& sol) const;

    struct FractionalReport {
        std::vector<double> vertex_mass;                       // per vertex slot
        std::map<std::pair<VertexId, VertexId>, double> pair_mass;
        bool integral = false;
        // (column index, pile) of variables at value one, when integral
        std::vector<std::pair<int, int>> selected;
    };
    FractionalReport fractional_report(const lp::LpSolution& sol) const;

    // dual-sign, complementary-slackness, primal-feasibility and strong
    // duality checks; returns human-readable violations (empty when clean)
    std::vector<std::string> verify_solution(const lp::LpSolution& sol) const;

    const std::vector<Column>& columns() const { return columns_; }
    double zeta_value(const lp::LpSolution& sol, int col, int pile) const {
        return sol.primal[col_var_base_[col] + pile];
    }
    const std::vector<std::pair<VertexId, VertexId>>& edges() const { return edges_; }
    int piles() const { return piles_; }
    long long columns_added() const { return n_added_; }
    int lp_rows() const { return lp_.num_rows(); }
    bool lazy_rows() const { return lazy_rows_; }
    std::string dump() const { return lp::dump_lp_string(lp_); }

private:
    void column_entries(const Column& col, int pile,
                        std::vector<std::pair<int, double>>& out) const;
    bool validate_column(const Column& col, std::string& why) const;
    int edge_row(int e, int c) const { return edge_rows_[static_cast<std::size_t>(e) * piles_ + c]; }

    const ConflictGraph& graph_;
    int piles_;
    lp::LpProblem lp_;
    int tau_var_ = -1;
    std::vector<int> vertex_row_;    // per vertex slot, -1 for dead
    std::vector<int> partition_row_; // per partition slot, -1 inactive
    std::vector<std::pair<VertexId, VertexId>> edges_;
    std::vector<int> edge_rows_;     // e * piles + c -> lp row, -1 when lazy and absent
    bool lazy_rows_ = false;
    std::vector<Column> columns_;
    std::map<std::vector<VertexId>, int> key_to_col_;
    std::vector<int> col_var_base_;
    long long n_added_ = 0;
};

// one singleton column per alive vertex; keeps the first RMP feasible
std::vector<Column> initial_columns(const ConflictGraph& graph);

} // namespace pcp::master

#endif
