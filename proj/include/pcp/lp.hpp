#ifndef PCP_LP_HPP
#define PCP_LP_HPP

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace pcp::lp {

enum class RowSense { LessEqual, Equal, GreaterEqual };
enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

// nonbasic-free variables sit at value 0
enum class VarStatus : unsigned char { Basic, AtLower, AtUpper, Free };

inline constexpr double kInfinity = 1e30;
inline constexpr double kFeasTol = 1e-7;
inline constexpr double kDualTol = 1e-7;
inline constexpr double kPivotTol = 1e-9;

// Sparse minimization LP: structural variables with bounds, rows with a
// sense and right-hand side. Columns may be appended after rows exist,
// which is how the master problem grows during column generation.
class LpProblem {
public:
    int add_variable(double lb, double ub, double obj);
    // variable with row coefficients, for post-construction column additions
    int add_column(double lb, double ub, double obj,
                   const std::vector<std::pair<int, double>>& entries);
    int add_row(RowSense sense, double rhs, const std::vector<std::pair<int, double>>& coeffs);

    int num_vars() const { return static_cast<int>(obj_.size()); }
    int num_rows() const { return static_cast<int>(rhs_.size()); }

    double objective_coeff(int j) const { return obj_[j]; }
    double lower(int j) const { return lb_[j]; }
    double upper(int j) const { return ub_[j]; }
    RowSense row_sense(int r) const { return sense_[r]; }
    double row_rhs(int r) const { return rhs_[r]; }
    const std::vector<std::pair<int, double>>& column(int j) const { return cols_[j]; }

private:
    std::vector<double> obj_, lb_, ub_;
    std::vector<std::vector<std::pair<int, double>>> cols_; // (row, coeff)
    std::vector<RowSense> sense_;
    std::vector<double> rhs_;
};

struct Basis {
    std::vector<VarStatus> structural;
    std::vector<VarStatus> logical; // one per row
    bool valid() const { return !structural.empty() || !logical.empty(); }
};

struct LpSolution {
    SolveStatus status = SolveStatus::Infeasible;
    double objective = 0.0;
    std::vector<double> primal;       // structural values
    std::vector<double> row_dual;     // y, one per row
    std::vector<double> row_activity; // a.x per row
    std::vector<double> reduced_cost; // structural reduced costs
    Basis basis;
    long iterations = 0;
};

struct SolveOptions {
    long iteration_limit = 0; // 0 -> 10 * (rows + cols)
};

LpSolution solve_lp(const LpProblem& p, const Basis* warm_start = nullptr,
                    const SolveOptions& options = {});

// human-readable LP-format dump for cross-checking against external solvers
void dump_lp(const LpProblem& p, std::ostream& os);
std::string dump_lp_string(const LpProblem& p);

} // namespace pcp::lp

#endif
