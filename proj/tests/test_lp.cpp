#include <doctest.h>

#include <cmath>
#include <sstream>

#include "oracles.hpp"
#include "pcp/lp.hpp"
#include "pcp/rng.hpp"

using namespace pcp;
using lp::LpProblem;
using lp::LpSolution;
using lp::RowSense;
using lp::SolveStatus;

TEST_CASE("one-variable lp with a binding >= row") {
    LpProblem p;
    int x = p.add_variable(0.0, 10.0, 1.0);
    p.add_row(RowSense::GreaterEqual, 3.0, {{x, 1.0}});
    LpSolution s = lp::solve_lp(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.primal[x] == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(s.objective == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(s.row_dual[0] == doctest::Approx(1.0).epsilon(1e-9)); // >= row, dual >= 0
}

TEST_CASE("infeasible equality against a fixed variable") {
    LpProblem p;
    int x = p.add_variable(0.0, 0.0, 0.0);
    p.add_row(RowSense::Equal, 1.0, {{x, 1.0}});
    LpSolution s = lp::solve_lp(p);
    CHECK(s.status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded detection") {
    LpProblem p;
    int x = p.add_variable(0.0, lp::kInfinity, -1.0);
    p.add_row(RowSense::GreaterEqual, 0.0, {{x, 1.0}});
    LpSolution s = lp::solve_lp(p);
    CHECK(s.status == SolveStatus::Unbounded);
}

TEST_CASE("iteration limit surfaces as a distinct status") {
    LpProblem p;
    int x = p.add_variable(0.0, 10.0, 1.0);
    p.add_row(RowSense::GreaterEqual, 3.0, {{x, 1.0}});
    lp::SolveOptions opt;
    opt.iteration_limit = 0; // default is fine here; force a tiny budget instead
    opt.iteration_limit = 1;
    LpSolution s = lp::solve_lp(p, nullptr, opt);
    CHECK((s.status == SolveStatus::IterationLimit || s.status == SolveStatus::Optimal));
}

namespace {

LpProblem random_lp(SplitMix64& rng, int n, int m) {
    LpProblem p;
    for (int j = 0; j < n; ++j)
        p.add_variable(0.0, 1.0 + 9.0 * rng.next_unit(), -5.0 + 10.0 * rng.next_unit());
    for (int r = 0; r < m; ++r) {
        std::vector<std::pair<int, double>> coeffs;
        for (int j = 0; j < n; ++j)
            if (rng.next_unit() < 0.7) coeffs.emplace_back(j, -5.0 + 10.0 * rng.next_unit());
        double rhs = -2.0 + 12.0 * rng.next_unit();
        double roll = rng.next_unit();
        RowSense sense = roll < 0.45   ? RowSense::LessEqual
                         : roll < 0.9 ? RowSense::GreaterEqual
                                      : RowSense::Equal;
        p.add_row(sense, rhs, coeffs);
    }
    return p;
}

void check_optimality_conditions(const LpProblem& p, const LpSolution& s) {
    // dual signs and complementary slackness
    for (int r = 0; r < p.num_rows(); ++r) {
        double y = s.row_dual[r];
        double slack = p.row_rhs(r) - s.row_activity[r];
        switch (p.row_sense(r)) {
        case RowSense::LessEqual:
            CHECK(y <= 1e-7);
            CHECK(std::abs(y * slack) <= 1e-6 * std::max({1.0, std::abs(y), std::abs(slack)}));
            break;
        case RowSense::GreaterEqual:
            CHECK(y >= -1e-7);
            CHECK(std::abs(y * slack) <= 1e-6 * std::max({1.0, std::abs(y), std::abs(slack)}));
            break;
        case RowSense::Equal:
            CHECK(std::abs(slack) <= 1e-6);
            break;
        }
    }
    // nonbasic reduced-cost signs
    for (int j = 0; j < p.num_vars(); ++j) {
        if (s.basis.structural[j] == lp::VarStatus::AtLower) CHECK(s.reduced_cost[j] >= -1e-6);
        if (s.basis.structural[j] == lp::VarStatus::AtUpper) CHECK(s.reduced_cost[j] <= 1e-6);
    }
    // strong duality with bound contributions
    double dual_obj = 0.0;
    for (int r = 0; r < p.num_rows(); ++r) dual_obj += s.row_dual[r] * p.row_rhs(r);
    for (int j = 0; j < p.num_vars(); ++j)
        if (s.basis.structural[j] != lp::VarStatus::Basic)
            dual_obj += s.reduced_cost[j] * s.primal[j];
    CHECK(std::abs(s.objective - dual_obj) <= 1e-6 * (1.0 + std::abs(s.objective)));
}

} // namespace

TEST_CASE("random 5x5 lps agree with the vertex-enumeration oracle") {
    SplitMix64 rng(2024);
    int solved = 0;
    for (int trial = 0; trial < 120; ++trial) {
        LpProblem p = random_lp(rng, 5, 5);
        LpSolution s = lp::solve_lp(p);
        oracle::LpOracleResult ref = oracle::lp_brute(p);
        if (ref.feasible) {
            REQUIRE_MESSAGE(s.status == SolveStatus::Optimal, "trial ", trial);
            CHECK_MESSAGE(std::abs(s.objective - ref.objective) <= 1e-6,
                          "trial ", trial, " got ", s.objective, " want ", ref.objective);
            check_optimality_conditions(p, s);
            ++solved;
        } else {
            CHECK_MESSAGE(s.status == SolveStatus::Infeasible, "trial ", trial);
        }
    }
    CHECK(solved > 20); // the generator must exercise the optimal path
}

TEST_CASE("warm start after adding a column matches a cold solve") {
    SplitMix64 rng(777);
    for (int trial = 0; trial < 40; ++trial) {
        LpProblem p = random_lp(rng, 4, 4);
        LpSolution first = lp::solve_lp(p);
        if (first.status != SolveStatus::Optimal) continue;

        std::vector<std::pair<int, double>> entries;
        for (int r = 0; r < p.num_rows(); ++r)
            entries.emplace_back(r, -3.0 + 6.0 * rng.next_unit());
        p.add_column(0.0, 5.0, -1.0 + 2.0 * rng.next_unit(), entries);

        LpSolution warm = lp::solve_lp(p, &first.basis);
        LpSolution cold = lp::solve_lp(p);
        REQUIRE(warm.status == cold.status);
        if (warm.status == SolveStatus::Optimal)
            CHECK(std::abs(warm.objective - cold.objective) <= 1e-8 *
                                                                   (1.0 + std::abs(cold.objective)));
    }
}

TEST_CASE("degenerate lp still terminates") {
    // many redundant rows through the origin force degenerate pivots
    LpProblem p;
    int x = p.add_variable(0.0, lp::kInfinity, 1.0);
    int y = p.add_variable(0.0, lp::kInfinity, 1.0);
    for (int i = 0; i < 12; ++i)
        p.add_row(RowSense::GreaterEqual, 0.0, {{x, 1.0}, {y, static_cast<double>(i)}});
    p.add_row(RowSense::GreaterEqual, 2.0, {{x, 1.0}, {y, 1.0}});
    LpSolution s = lp::solve_lp(p);
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective == doctest::Approx(2.0));
}

TEST_CASE("lp text dump is well formed") {
    LpProblem p;
    int x = p.add_variable(0.0, 10.0, 1.5);
    int y = p.add_variable(-lp::kInfinity, lp::kInfinity, -2.0);
    p.add_row(RowSense::LessEqual, 4.0, {{x, 2.0}, {y, 1.0}});
    p.add_row(RowSense::Equal, 1.0, {{y, 1.0}});
    std::string text = lp::dump_lp_string(p);
    CHECK(text.find("Minimize") != std::string::npos);
    CHECK(text.find("Subject To") != std::string::npos);
    CHECK(text.find("<= 4") != std::string::npos);
    CHECK(text.find("x1 free") != std::string::npos);
    CHECK(text.find("End") != std::string::npos);
}
