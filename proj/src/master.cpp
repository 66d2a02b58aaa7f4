#include "pcp/master.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pcp::master {

namespace {
constexpr double kIntTol = 1e-6;
constexpr double kCheckTol = 1e-6;
} // namespace

RmpModel::RmpModel(const ConflictGraph& graph, int piles, long lazy_row_threshold)
    : graph_(graph), piles_(piles) {
    if (piles <= 0) throw std::invalid_argument("rmp: piles must be positive");

    tau_var_ = lp_.add_variable(0.0, lp::kInfinity, 1.0);

    vertex_row_.assign(graph.vertex_count(), -1);
    for (VertexId v : graph.alive_vertices()) {
        // e_v * sum zeta - tau <= 0
        vertex_row_[v] = lp_.add_row(lp::RowSense::LessEqual, 0.0, {{tau_var_, -1.0}});
    }

    partition_row_.assign(graph.partition_slots(), -1);
    for (int p : graph.active_partitions()) {
        if (graph.partition_alive(p).empty())
            throw std::invalid_argument("rmp: active partition with no alive vertex");
        partition_row_[p] = lp_.add_row(lp::RowSense::Equal, 1.0, {});
    }

    edges_ = graph.alive_edges();
    long full = static_cast<long>(edges_.size()) * piles_;
    lazy_rows_ = full > lazy_row_threshold;
    edge_rows_.assign(static_cast<std::size_t>(edges_.size()) * piles_, -1);
    if (!lazy_rows_) {
        for (std::size_t e = 0; e < edges_.size(); ++e)
            for (int c = 0; c < piles_; ++c)
                edge_rows_[e * piles_ + c] = lp_.add_row(lp::RowSense::LessEqual, 1.0, {});
    }
}

bool RmpModel::validate_column(const Column& col, std::string& why) const {
    if (col.vertices.empty()) {
        why = "empty column";
        return false;
    }
    if (!std::is_sorted(col.vertices.begin(), col.vertices.end())) {
        why = "column vertices not sorted";
        return false;
    }
    std::vector<int> parts;
    for (std::size_t i = 0; i < col.vertices.size(); ++i) {
        VertexId v = col.vertices[i];
        if (v < 0 || v >= graph_.vertex_count() || !graph_.alive(v)) {
            why = "column references dead vertex " + std::to_string(v);
            return false;
        }
        if (i > 0 && col.vertices[i] == col.vertices[i - 1]) {
            why = "duplicate vertex in column";
            return false;
        }
        parts.push_back(graph_.partition_of(v));
        for (std::size_t j = i + 1; j < col.vertices.size(); ++j)
            if (graph_.adjacent(v, col.vertices[j])) {
                why = "column is not an independent set: edge (" + std::to_string(v) + "," +
                      std::to_string(col.vertices[j]) + ")";
                return false;
            }
    }
    std::sort(parts.begin(), parts.end());
    if (std::adjacent_find(parts.begin(), parts.end()) != parts.end()) {
        why = "column has two vertices in one partition";
        return false;
    }
    return true;
}

void RmpModel::column_entries(const Column& col, int pile,
                              std::vector<std::pair<int, double>>& out) const {
    out.clear();
    for (VertexId v : col.vertices) {
        out.emplace_back(vertex_row_[v], static_cast<double>(graph_.completion(v)));
        out.emplace_back(partition_row_[graph_.partition_of(v)], 1.0);
    }
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        auto [a, b] = edges_[e];
        bool touch = std::binary_search(col.vertices.begin(), col.vertices.end(), a) ||
                     std::binary_search(col.vertices.begin(), col.vertices.end(), b);
        if (!touch) continue;
        int row = edge_row(static_cast<int>(e), pile);
        if (row >= 0) out.emplace_back(row, 1.0);
    }
}

bool RmpModel::add_column(const Column& col) {
    std::string why;
    if (!validate_column(col, why)) throw std::logic_error("rmp add_column: " + why);
    if (key_to_col_.count(col.vertices)) return false;

    int id = static_cast<int>(columns_.size());
    columns_.push_back(col);
    key_to_col_.emplace(col.vertices, id);
    col_var_base_.push_back(lp_.num_vars());

    std::vector<std::pair<int, double>> entries;
    for (int c = 0; c < piles_; ++c) {
        column_entries(col, c, entries);
        lp_.add_column(0.0, lp::kInfinity, 0.0, entries);
    }
    ++n_added_;
    return true;
}

lp::LpSolution RmpModel::solve(const lp::Basis* warm) {
    if (columns_.empty())
        throw std::invalid_argument("rmp: solve with empty column pool");
    // partition coverage guard: every active partition must appear in a column
    {
        std::vector<char> covered(graph_.partition_slots(), 0);
        for (const Column& col : columns_)
            for (VertexId v : col.vertices) covered[graph_.partition_of(v)] = 1;
        for (int p : graph_.active_partitions())
            if (!covered[p])
                throw std::invalid_argument(
                    "rmp: master infeasible by construction, partition " + std::to_string(p) +
                    " uncovered by the pool");
    }

    lp::LpSolution sol = lp::solve_lp(lp_, warm);
    if (!lazy_rows_) return sol;

    // row generation for the edge-pile family: add violated rows, re-solve warm
    while (sol.status == lp::SolveStatus::Optimal) {
        std::vector<double> mass(static_cast<std::size_t>(graph_.vertex_count()) * piles_, 0.0);
        for (std::size_t col = 0; col < columns_.size(); ++col)
            for (int c = 0; c < piles_; ++c) {
                double z = sol.primal[col_var_base_[col] + c];
                if (z <= 1e-12) continue;
                for (VertexId v : columns_[col].vertices)
                    mass[static_cast<std::size_t>(v) * piles_ + c] += z;
            }
        std::vector<std::pair<int, int>> violated;
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            auto [a, b] = edges_[e];
            for (int c = 0; c < piles_; ++c) {
                if (edge_row(static_cast<int>(e), c) >= 0) continue;
                double act = mass[static_cast<std::size_t>(a) * piles_ + c] +
                             mass[static_cast<std::size_t>(b) * piles_ + c];
                if (act > 1.0 + lp::kFeasTol) violated.emplace_back(static_cast<int>(e), c);
            }
        }
        if (violated.empty()) break;
        for (auto [e, c] : violated) {
            std::vector<std::pair<int, double>> coeffs;
            auto [a, b] = edges_[e];
            for (std::size_t col = 0; col < columns_.size(); ++col) {
                const auto& vs = columns_[col].vertices;
                if (std::binary_search(vs.begin(), vs.end(), a) ||
                    std::binary_search(vs.begin(), vs.end(), b))
                    coeffs.emplace_back(col_var_base_[col] + c, 1.0);
            }
            edge_rows_[static_cast<std::size_t>(e) * piles_ + c] =
                lp_.add_row(lp::RowSense::LessEqual, 1.0, coeffs);
        }
        sol = lp::solve_lp(lp_, &sol.basis);
    }
    return sol;
}

DualPrices RmpModel::extract_duals(const lp::LpSolution& sol) const {
    if (sol.status != lp::SolveStatus::Optimal)
        throw std::invalid_argument("extract_duals: solution not optimal");
    DualPrices d;
    d.piles = piles_;
    d.edges = edges_;
    d.pi.assign(graph_.vertex_count(), 0.0);
    d.lambda.assign(graph_.partition_slots(), 0.0);
    d.mu.assign(static_cast<std::size_t>(edges_.size()) * piles_, 0.0);

    for (int v = 0; v < graph_.vertex_count(); ++v) {
        if (vertex_row_[v] < 0) continue;
        double y = sol.row_dual[vertex_row_[v]];
        if (y > 1e-6) throw std::logic_error("extract_duals: positive pi on a <= row");
        d.pi[v] = std::min(y, 0.0);
    }
    for (int p = 0; p < graph_.partition_slots(); ++p) {
        if (partition_row_[p] < 0) continue;
        d.lambda[p] = sol.row_dual[partition_row_[p]];
    }
    for (std::size_t e = 0; e < edges_.size(); ++e)
        for (int c = 0; c < piles_; ++c) {
            int row = edge_row(static_cast<int>(e), c);
            if (row < 0) continue;
            double y = sol.row_dual[row];
            if (y > 1e-6) throw std::logic_error("extract_duals: positive mu on a <= row");
            d.mu[e * piles_ + c] = std::min(y, 0.0);
        }
    return d;
}

RmpModel::FractionalReport RmpModel::fractional_report(const lp::LpSolution& sol) const {
    FractionalReport rep;
    rep.vertex_mass.assign(graph_.vertex_count(), 0.0);
    rep.integral = true;
    for (std::size_t col = 0; col < columns_.size(); ++col) {
        for (int c = 0; c < piles_; ++c) {
            double z = sol.primal[col_var_base_[col] + c];
            if (z > kIntTol && z < 1.0 - kIntTol) rep.integral = false;
            if (z <= kIntTol) continue;
            if (z >= 1.0 - kIntTol) rep.selected.emplace_back(static_cast<int>(col), c);
            const auto& vs = columns_[col].vertices;
            for (std::size_t i = 0; i < vs.size(); ++i) {
                rep.vertex_mass[vs[i]] += z;
                for (std::size_t j = i + 1; j < vs.size(); ++j)
                    rep.pair_mass[{vs[i], vs[j]}] += z;
            }
        }
    }
    if (!rep.integral) rep.selected.clear();
    return rep;
}

std::vector<std::string> RmpModel::verify_solution(const lp::LpSolution& sol) const {
    std::vector<std::string> bad;
    if (sol.status != lp::SolveStatus::Optimal) {
        bad.push_back("solution not optimal");
        return bad;
    }
    auto note = [&](const std::string& s) { bad.push_back(s); };

    for (int r = 0; r < lp_.num_rows(); ++r) {
        double y = sol.row_dual[r];
        double act = sol.row_activity[r];
        double rhs = lp_.row_rhs(r);
        double slack = rhs - act;
        switch (lp_.row_sense(r)) {
        case lp::RowSense::LessEqual:
            if (act > rhs + kCheckTol) note("primal violation on <= row " + std::to_string(r));
            if (y > kCheckTol) note("dual sign violation on <= row " + std::to_string(r));
            break;
        case lp::RowSense::GreaterEqual:
            if (act < rhs - kCheckTol) note("primal violation on >= row " + std::to_string(r));
            if (y < -kCheckTol) note("dual sign violation on >= row " + std::to_string(r));
            break;
        case lp::RowSense::Equal:
            if (std::abs(slack) > kCheckTol) note("primal violation on = row " + std::to_string(r));
            break;
        }
        double scale = std::max({1.0, std::abs(y), std::abs(slack)});
        if (lp_.row_sense(r) != lp::RowSense::Equal && std::abs(y * slack) > kCheckTol * scale)
            note("complementary slackness violation on row " + std::to_string(r));
    }

    // strong duality with bound contributions of nonbasic structural variables
    double dual_obj = 0.0;
    for (int r = 0; r < lp_.num_rows(); ++r) dual_obj += sol.row_dual[r] * lp_.row_rhs(r);
    for (int j = 0; j < lp_.num_vars(); ++j) {
        if (sol.basis.structural[j] == lp::VarStatus::Basic) continue;
        dual_obj += sol.reduced_cost[j] * sol.primal[j];
    }
    if (std::abs(sol.objective - dual_obj) > 1e-6 * (1.0 + std::abs(sol.objective)))
        note("strong duality gap " + std::to_string(sol.objective - dual_obj));

    return bad;
}

std::vector<Column> initial_columns(const ConflictGraph& graph) {
    std::vector<Column> cols;
    for (VertexId v : graph.alive_vertices()) cols.push_back(Column{{v}});
    return cols;
}

} // namespace pcp::master
