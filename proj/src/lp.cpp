#include "pcp/lp.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace pcp::lp {

int LpProblem::add_variable(double lb, double ub, double obj) {
    if (lb > ub) throw std::invalid_argument("add_variable: lower bound above upper bound");
    obj_.push_back(obj);
    lb_.push_back(lb);
    ub_.push_back(ub);
    cols_.emplace_back();
    return num_vars() - 1;
}

int LpProblem::add_column(double lb, double ub, double obj,
                          const std::vector<std::pair<int, double>>& entries) {
    int j = add_variable(lb, ub, obj);
    for (auto [r, v] : entries) {
        if (r < 0 || r >= num_rows()) throw std::invalid_argument("add_column: bad row index");
        if (v != 0.0) cols_[j].emplace_back(r, v);
    }
    return j;
}

int LpProblem::add_row(RowSense sense, double rhs,
                       const std::vector<std::pair<int, double>>& coeffs) {
    int r = num_rows();
    sense_.push_back(sense);
    rhs_.push_back(rhs);
    for (auto [j, v] : coeffs) {
        if (j < 0 || j >= num_vars()) throw std::invalid_argument("add_row: undeclared variable");
        if (v != 0.0) cols_[j].emplace_back(r, v);
    }
    return r;
}

namespace {

constexpr int kRefactorInterval = 100;
constexpr int kDegenerateStreakLimit = 64;

// Bounded-variable revised simplex. The basis is factored through the
// "structural block": with k structural variables basic, the m-k basic
// logicals each cover their own row, so every FTRAN/BTRAN reduces to a
// dense k x k system on the uncovered rows. The inverse of that block is
// maintained by rank-one updates and refactored every 100 pivots.
class Simplex {
public:
    Simplex(const LpProblem& p, const Basis* warm, const SolveOptions& opt)
        : p_(p), n_(p.num_vars()), m_(p.num_rows()) {
        iter_limit_ = opt.iteration_limit > 0
                          ? opt.iteration_limit
                          : 10L * (static_cast<long>(n_) + static_cast<long>(m_));
        init_bounds();
        load_basis(warm);
    }

    LpSolution run();

private:
    enum class StepResult { Pivoted, NoEntering, Unbounded };

    const LpProblem& p_;
    int n_, m_;
    long iter_limit_;
    long iterations_ = 0;

    std::vector<double> lb_, ub_, cost_; // size n + m, logical cost 0
    std::vector<VarStatus> status_;
    std::vector<double> xval_;
    std::vector<double> btilde_; // rhs minus nonbasic contributions

    std::vector<int> sb_vars_;  // basic structural vars
    std::vector<int> sb_pos_;   // var -> position in sb_vars_, -1 otherwise
    std::vector<int> u_rows_;   // uncovered rows (no basic logical)
    std::vector<int> u_pos_;    // row -> position in u_rows_, -1 otherwise
    std::vector<double> minv_;  // k x k row-major, rows = sb space, cols = u space
    int k_ = 0;

    bool phase1_ = false;
    bool bland_ = false;
    int degen_streak_ = 0;
    int pivots_since_refactor_ = 0;
    int price_cursor_ = 0;
    bool basis_reset_done_ = false;

    // scratch
    std::vector<double> dense_col_, acc_, wlog_, y_;
    std::vector<double> ws_;

    int nv() const { return n_ + m_; }
    bool is_logical(int j) const { return j >= n_; }
    int logical_row(int j) const { return j - n_; }
    bool is_fixed(int j) const { return lb_[j] == ub_[j]; }

    template <typename Fn>
    void for_col(int j, Fn&& fn) const {
        if (is_logical(j)) {
            fn(logical_row(j), 1.0);
        } else {
            for (auto [r, v] : p_.column(j)) fn(r, v);
        }
    }

    void init_bounds();
    void load_basis(const Basis* warm);
    void reset_logical_basis();
    bool refactor();
    void rebuild_btilde();
    void compute_basic_values();

    double phase_cost(int j) const {
        if (!phase1_) return cost_[j];
        if (status_[j] != VarStatus::Basic) return 0.0;
        if (xval_[j] < lb_[j] - kFeasTol) return -1.0;
        if (xval_[j] > ub_[j] + kFeasTol) return 1.0;
        return 0.0;
    }

    void btran();                 // fills y_ with duals of phase costs
    double reduced_cost(int j) const;
    int price();                  // entering var or -1
    void compute_direction(int q); // fills ws_, wlog_ for basics
    StepResult step();

    double infeasibility() const;
    void adjust_btilde(int j, double delta);

    void minv_col_replace(int s, const std::vector<double>& d);
    void minv_grow(const std::vector<double>& u, const std::vector<double>& v, double s_val);
    void minv_shrink(int sb_position, int u_position);
    void minv_row_replace(int p, const std::vector<double>& g);

    LpSolution extract(SolveStatus st);
};

void Simplex::init_bounds() {
    lb_.resize(nv());
    ub_.resize(nv());
    cost_.assign(nv(), 0.0);
    for (int j = 0; j < n_; ++j) {
        lb_[j] = p_.lower(j);
        ub_[j] = p_.upper(j);
        cost_[j] = p_.objective_coeff(j);
    }
    for (int r = 0; r < m_; ++r) {
        switch (p_.row_sense(r)) {
        case RowSense::LessEqual:
            lb_[n_ + r] = 0.0;
            ub_[n_ + r] = kInfinity;
            break;
        case RowSense::Equal:
            lb_[n_ + r] = 0.0;
            ub_[n_ + r] = 0.0;
            break;
        case RowSense::GreaterEqual:
            lb_[n_ + r] = -kInfinity;
            ub_[n_ + r] = 0.0;
            break;
        }
    }
}

VarStatus default_status(double lb, double ub) {
    if (lb > -kInfinity) return VarStatus::AtLower;
    if (ub < kInfinity) return VarStatus::AtUpper;
    return VarStatus::Free;
}

void Simplex::load_basis(const Basis* warm) {
    status_.assign(nv(), VarStatus::AtLower);
    sb_pos_.assign(nv(), -1);
    u_pos_.assign(m_, -1);
    xval_.assign(nv(), 0.0);

    bool ok = false;
    if (warm && warm->valid() &&
        static_cast<int>(warm->structural.size()) <= n_ &&
        static_cast<int>(warm->logical.size()) == m_) {
        int basics = 0;
        for (int j = 0; j < nv(); ++j) {
            VarStatus st;
            if (j < n_) {
                st = j < static_cast<int>(warm->structural.size()) ? warm->structural[j]
                                                                   : default_status(lb_[j], ub_[j]);
            } else {
                st = warm->logical[logical_row(j)];
            }
            if (st == VarStatus::Basic) ++basics;
            status_[j] = st;
        }
        ok = basics == m_;
    }
    if (!ok) {
        for (int j = 0; j < n_; ++j) status_[j] = default_status(lb_[j], ub_[j]);
        for (int r = 0; r < m_; ++r) status_[n_ + r] = VarStatus::Basic;
    }

    sb_vars_.clear();
    u_rows_.clear();
    for (int j = 0; j < n_; ++j)
        if (status_[j] == VarStatus::Basic) {
            sb_pos_[j] = static_cast<int>(sb_vars_.size());
            sb_vars_.push_back(j);
        }
    for (int r = 0; r < m_; ++r)
        if (status_[n_ + r] != VarStatus::Basic) {
            u_pos_[r] = static_cast<int>(u_rows_.size());
            u_rows_.push_back(r);
        }
    k_ = static_cast<int>(sb_vars_.size());

    if (static_cast<int>(u_rows_.size()) != k_ || !refactor()) {
        reset_logical_basis();
        refactor();
    }

    for (int j = 0; j < nv(); ++j) {
        if (status_[j] == VarStatus::Basic) continue;
        switch (status_[j]) {
        case VarStatus::AtLower: xval_[j] = lb_[j] > -kInfinity ? lb_[j] : 0.0; break;
        case VarStatus::AtUpper: xval_[j] = ub_[j] < kInfinity ? ub_[j] : 0.0; break;
        default: xval_[j] = 0.0; break;
        }
    }
    rebuild_btilde();
    compute_basic_values();
}

void Simplex::reset_logical_basis() {
    for (int j = 0; j < n_; ++j) status_[j] = default_status(lb_[j], ub_[j]);
    for (int r = 0; r < m_; ++r) status_[n_ + r] = VarStatus::Basic;
    sb_vars_.clear();
    u_rows_.clear();
    sb_pos_.assign(nv(), -1);
    u_pos_.assign(m_, -1);
    k_ = 0;
    for (int j = 0; j < nv(); ++j) {
        if (status_[j] == VarStatus::Basic) continue;
        xval_[j] = status_[j] == VarStatus::AtLower   ? (lb_[j] > -kInfinity ? lb_[j] : 0.0)
                   : status_[j] == VarStatus::AtUpper ? (ub_[j] < kInfinity ? ub_[j] : 0.0)
                                                      : 0.0;
    }
}

bool Simplex::refactor() {
    pivots_since_refactor_ = 0;
    int k = k_;
    minv_.assign(static_cast<std::size_t>(k) * k, 0.0);
    if (k == 0) return true;

    // dense block M, then Gauss-Jordan inversion with partial pivoting
    std::vector<double> mat(static_cast<std::size_t>(k) * k, 0.0);
    for (int j = 0; j < k; ++j)
        for_col(sb_vars_[j], [&](int r, double v) {
            int i = u_pos_[r];
            if (i >= 0) mat[static_cast<std::size_t>(i) * k + j] = v;
        });

    for (int i = 0; i < k; ++i) minv_[static_cast<std::size_t>(i) * k + i] = 1.0;
    // invert mat^T conceptually: we want minv such that xs = minv * rhs_U solves M*xs = rhs_U,
    // i.e. minv = M^-1 with rows in sb space. Run elimination on mat while applying to minv.
    for (int col = 0; col < k; ++col) {
        int piv = -1;
        double best = 1e-11;
        for (int row = col; row < k; ++row) {
            double a = std::abs(mat[static_cast<std::size_t>(row) * k + col]);
            if (a > best) {
                best = a;
                piv = row;
            }
        }
        if (piv < 0) return false;
        if (piv != col) {
            for (int j = 0; j < k; ++j) {
                std::swap(mat[static_cast<std::size_t>(piv) * k + j],
                          mat[static_cast<std::size_t>(col) * k + j]);
                std::swap(minv_[static_cast<std::size_t>(piv) * k + j],
                          minv_[static_cast<std::size_t>(col) * k + j]);
            }
        }
        double d = mat[static_cast<std::size_t>(col) * k + col];
        double inv = 1.0 / d;
        for (int j = 0; j < k; ++j) {
            mat[static_cast<std::size_t>(col) * k + j] *= inv;
            minv_[static_cast<std::size_t>(col) * k + j] *= inv;
        }
        for (int row = 0; row < k; ++row) {
            if (row == col) continue;
            double f = mat[static_cast<std::size_t>(row) * k + col];
            if (f == 0.0) continue;
            for (int j = 0; j < k; ++j) {
                mat[static_cast<std::size_t>(row) * k + j] -=
                    f * mat[static_cast<std::size_t>(col) * k + j];
                minv_[static_cast<std::size_t>(row) * k + j] -=
                    f * minv_[static_cast<std::size_t>(col) * k + j];
            }
        }
    }
    // after elimination rows of minv_ are aligned with M columns: minv_[row j][col i]
    // maps rhs in u space to sb space, but elimination produced M^-1 with rows in
    // the pivoted order of U. The Gauss-Jordan above reduces M to I in place, so
    // minv_ now holds M^-1 where output index j corresponds to M's column j (sb
    // position) and input index corresponds to U position. This matches the
    // convention used everywhere else.
    return true;
}

void Simplex::rebuild_btilde() {
    btilde_.assign(m_, 0.0);
    for (int r = 0; r < m_; ++r) btilde_[r] = p_.row_rhs(r);
    for (int j = 0; j < nv(); ++j) {
        if (status_[j] == VarStatus::Basic || xval_[j] == 0.0) continue;
        double v = xval_[j];
        for_col(j, [&](int r, double a) { btilde_[r] -= a * v; });
    }
}

void Simplex::compute_basic_values() {
    // solve B * x_B = btilde via the structural block
    ws_.assign(k_, 0.0);
    for (int j = 0; j < k_; ++j) {
        double s = 0.0;
        const double* row = minv_.data() + static_cast<std::size_t>(j) * k_;
        for (int i = 0; i < k_; ++i) s += row[i] * btilde_[u_rows_[i]];
        ws_[j] = s;
    }
    acc_.assign(m_, 0.0);
    for (int j = 0; j < k_; ++j) {
        double v = ws_[j];
        if (v == 0.0) continue;
        for_col(sb_vars_[j], [&](int r, double a) { acc_[r] += a * v; });
    }
    for (int j = 0; j < k_; ++j) xval_[sb_vars_[j]] = ws_[j];
    for (int r = 0; r < m_; ++r)
        if (u_pos_[r] < 0) xval_[n_ + r] = btilde_[r] - acc_[r];
}

void Simplex::btran() {
    y_.assign(m_, 0.0);
    for (int r = 0; r < m_; ++r)
        if (u_pos_[r] < 0) y_[r] = phase_cost(n_ + r);

    if (k_ == 0) return;
    std::vector<double> rhs(k_, 0.0);
    for (int j = 0; j < k_; ++j) {
        double s = phase_cost(sb_vars_[j]);
        for_col(sb_vars_[j], [&](int r, double a) {
            if (u_pos_[r] < 0) s -= y_[r] * a;
        });
        rhs[j] = s;
    }
    // solve M^T z = rhs -> z = (M^-1)^T rhs, z indexed by u positions
    for (int i = 0; i < k_; ++i) {
        double s = 0.0;
        for (int j = 0; j < k_; ++j) s += minv_[static_cast<std::size_t>(j) * k_ + i] * rhs[j];
        y_[u_rows_[i]] = s;
    }
}

double Simplex::reduced_cost(int j) const {
    double d = phase1_ ? 0.0 : cost_[j];
    if (is_logical(j)) return d - y_[logical_row(j)];
    for (auto [r, v] : p_.column(j)) d -= y_[r] * v;
    return d;
}

int Simplex::price() {
    const int total = nv();
    if (bland_) {
        for (int j = 0; j < total; ++j) {
            if (status_[j] == VarStatus::Basic || is_fixed(j)) continue;
            double d = reduced_cost(j);
            if (status_[j] == VarStatus::AtLower && d < -kDualTol) return j;
            if (status_[j] == VarStatus::AtUpper && d > kDualTol) return j;
            if (status_[j] == VarStatus::Free && std::abs(d) > kDualTol) return j;
        }
        return -1;
    }
    const int block = std::max(256, total / 64);
    int scanned = 0;
    int best = -1;
    double best_score = kDualTol;
    while (scanned < total) {
        int stop = std::min(price_cursor_ + block, total);
        for (int j = price_cursor_; j < stop; ++j) {
            if (status_[j] == VarStatus::Basic || is_fixed(j)) continue;
            double d = reduced_cost(j);
            double score = 0.0;
            if (status_[j] == VarStatus::AtLower)
                score = -d;
            else if (status_[j] == VarStatus::AtUpper)
                score = d;
            else if (status_[j] == VarStatus::Free)
                score = std::abs(d);
            if (score > best_score) {
                best_score = score;
                best = j;
            }
        }
        scanned += stop - price_cursor_;
        price_cursor_ = stop == total ? 0 : stop;
        if (best >= 0) return best;
    }
    return -1;
}

void Simplex::compute_direction(int q) {
    dense_col_.assign(m_, 0.0);
    for_col(q, [&](int r, double v) { dense_col_[r] = v; });

    ws_.assign(k_, 0.0);
    for (int j = 0; j < k_; ++j) {
        double s = 0.0;
        const double* row = minv_.data() + static_cast<std::size_t>(j) * k_;
        for (int i = 0; i < k_; ++i) s += row[i] * dense_col_[u_rows_[i]];
        ws_[j] = s;
    }
    acc_.assign(m_, 0.0);
    for (int j = 0; j < k_; ++j) {
        double v = ws_[j];
        if (v == 0.0) continue;
        for_col(sb_vars_[j], [&](int r, double a) { acc_[r] += a * v; });
    }
    wlog_.assign(m_, 0.0);
    for (int r = 0; r < m_; ++r)
        if (u_pos_[r] < 0) wlog_[r] = dense_col_[r] - acc_[r];
}

double Simplex::infeasibility() const {
    double s = 0.0;
    for (int j = 0; j < nv(); ++j) {
        if (status_[j] != VarStatus::Basic) continue;
        if (xval_[j] < lb_[j] - kFeasTol) s += lb_[j] - xval_[j];
        if (xval_[j] > ub_[j] + kFeasTol) s += xval_[j] - ub_[j];
    }
    return s;
}

void Simplex::adjust_btilde(int j, double delta) {
    if (delta == 0.0) return;
    for_col(j, [&](int r, double a) { btilde_[r] += a * delta; });
}

void Simplex::minv_col_replace(int s, const std::vector<double>& d) {
    double piv = d[s];
    double inv = 1.0 / piv;
    double* rs = minv_.data() + static_cast<std::size_t>(s) * k_;
    for (int j = 0; j < k_; ++j) {
        if (j == s) continue;
        double f = d[j] * inv;
        if (f == 0.0) continue;
        double* rj = minv_.data() + static_cast<std::size_t>(j) * k_;
        for (int i = 0; i < k_; ++i) rj[i] -= f * rs[i];
    }
    for (int i = 0; i < k_; ++i) rs[i] *= inv;
}

void Simplex::minv_grow(const std::vector<double>& u, const std::vector<double>& v, double s_val) {
    int k = k_;
    int kk = k + 1;
    std::vector<double> next(static_cast<std::size_t>(kk) * kk, 0.0);
    double inv = 1.0 / s_val;
    for (int j = 0; j < k; ++j) {
        const double* old = minv_.data() + static_cast<std::size_t>(j) * k;
        double* row = next.data() + static_cast<std::size_t>(j) * kk;
        double uj = u[j] * inv;
        for (int i = 0; i < k; ++i) row[i] = old[i] + uj * v[i];
        row[k] = -uj;
    }
    double* last = next.data() + static_cast<std::size_t>(k) * kk;
    for (int i = 0; i < k; ++i) last[i] = -v[i] * inv;
    last[k] = inv;
    minv_.swap(next);
    k_ = kk;
}

void Simplex::minv_shrink(int sb_position, int u_position) {
    int k = k_;
    double piv = minv_[static_cast<std::size_t>(sb_position) * k + u_position];
    double inv = 1.0 / piv;
    // remove the correction, then drop row sb_position and column u_position
    std::vector<double> colp(k), rows(k);
    for (int j = 0; j < k; ++j) colp[j] = minv_[static_cast<std::size_t>(j) * k + u_position];
    for (int i = 0; i < k; ++i) rows[i] = minv_[static_cast<std::size_t>(sb_position) * k + i];

    int kk = k - 1;
    std::vector<double> next(static_cast<std::size_t>(kk) * kk, 0.0);
    for (int j = 0, jj = 0; j < k; ++j) {
        if (j == sb_position) continue;
        const double* old = minv_.data() + static_cast<std::size_t>(j) * k;
        double* row = next.data() + static_cast<std::size_t>(jj) * kk;
        double f = colp[j] * inv;
        for (int i = 0, ii = 0; i < k; ++i) {
            if (i == u_position) continue;
            row[ii] = old[i] - f * rows[i];
            ++ii;
        }
        ++jj;
    }
    minv_.swap(next);
    k_ = kk;
}

void Simplex::minv_row_replace(int p, const std::vector<double>& g) {
    double piv = g[p];
    double inv = 1.0 / piv;
    for (int j = 0; j < k_; ++j) {
        double* row = minv_.data() + static_cast<std::size_t>(j) * k_;
        double cp = row[p] * inv;
        for (int i = 0; i < k_; ++i) {
            if (i == p) continue;
            row[i] -= g[i] * cp;
        }
        row[p] = cp;
    }
}

Simplex::StepResult Simplex::step() {
    btran();
    int q = price();
    if (q < 0) return StepResult::NoEntering;

    int dir; // +1 entering increases, -1 entering decreases
    {
        double d = reduced_cost(q);
        if (status_[q] == VarStatus::AtLower)
            dir = 1;
        else if (status_[q] == VarStatus::AtUpper)
            dir = -1;
        else
            dir = d > 0 ? -1 : 1;
    }

    compute_direction(q);

    // ratio test: basic i moves by -t*dir*w_i
    double t_limit = kInfinity;
    int leave = -1;       // variable index
    double leave_w = 0.0; // its direction component
    double best_abs_w = 0.0;

    auto consider = [&](int var, double w) {
        double e = dir * w;
        if (std::abs(e) < kPivotTol) return;
        double x = xval_[var];
        double lo = lb_[var], hi = ub_[var];
        double t;
        if (phase1_ && x < lo - kFeasTol) {
            // infeasible below: breakpoint only when rising to its lower bound
            if (e >= 0.0) return;
            t = (lo - x) / (-e);
        } else if (phase1_ && x > hi + kFeasTol) {
            if (e <= 0.0) return;
            t = (x - hi) / e;
        } else if (e > 0.0) {
            if (lo <= -kInfinity) return;
            t = (x - lo) / e;
        } else {
            if (hi >= kInfinity) return;
            t = (hi - x) / (-e);
        }
        if (t < 0.0) t = 0.0;
        bool better;
        if (bland_) {
            better = t < t_limit - 1e-12 || (t <= t_limit + 1e-12 && (leave < 0 || var < leave));
        } else {
            better = t < t_limit - 1e-12 ||
                     (t <= t_limit + 1e-12 && std::abs(e) > best_abs_w);
        }
        if (better) {
            t_limit = std::min(t, t_limit);
            leave = var;
            leave_w = w;
            best_abs_w = std::abs(e);
        }
    };

    for (int j = 0; j < k_; ++j) consider(sb_vars_[j], ws_[j]);
    for (int r = 0; r < m_; ++r)
        if (u_pos_[r] < 0) consider(n_ + r, wlog_[r]);

    // entering variable may flip to its opposite bound
    double flip_t = kInfinity;
    if (lb_[q] > -kInfinity && ub_[q] < kInfinity) flip_t = ub_[q] - lb_[q];

    if (flip_t < t_limit) {
        double old = xval_[q];
        xval_[q] = dir > 0 ? ub_[q] : lb_[q];
        status_[q] = dir > 0 ? VarStatus::AtUpper : VarStatus::AtLower;
        adjust_btilde(q, -(xval_[q] - old));
        compute_basic_values();
        ++iterations_;
        return StepResult::Pivoted;
    }

    if (leave < 0) {
        if (!phase1_) return StepResult::Unbounded;
        throw std::runtime_error("lp: phase-1 ratio test found no breakpoint");
    }

    double t = t_limit;
    if (t > 1e-11)
        degen_streak_ = 0;
    else
        ++degen_streak_;
    if (degen_streak_ > kDegenerateStreakLimit) bland_ = true;
    if (bland_ && t > 1e-11) {
        bland_ = false;
        degen_streak_ = 0;
    }

    // where the leaving variable lands
    double e_leave = dir * leave_w;
    double leave_target;
    if (phase1_ && xval_[leave] < lb_[leave] - kFeasTol)
        leave_target = lb_[leave];
    else if (phase1_ && xval_[leave] > ub_[leave] + kFeasTol)
        leave_target = ub_[leave];
    else
        leave_target = e_leave > 0.0 ? lb_[leave] : ub_[leave];

    // basis bookkeeping + block-inverse update
    bool q_struct = !is_logical(q);
    bool l_struct = !is_logical(leave);
    double enter_start = xval_[q];

    if (q_struct && l_struct) {
        int s = sb_pos_[leave];
        minv_col_replace(s, ws_);
        sb_pos_[leave] = -1;
        sb_vars_[s] = q;
        sb_pos_[q] = s;
    } else if (q_struct && !l_struct) {
        int r = logical_row(leave);
        // grow: row r joins U, q joins sb
        std::vector<double> v(k_, 0.0);
        // v = c^T Minv where c = row r over sb columns
        for (int j = 0; j < k_; ++j) {
            double cj = 0.0;
            for_col(sb_vars_[j], [&](int rr, double a) {
                if (rr == r) cj = a;
            });
            if (cj == 0.0) continue;
            for (int i = 0; i < k_; ++i)
                v[i] += cj * minv_[static_cast<std::size_t>(j) * k_ + i];
        }
        double s_val = wlog_[r]; // Schur complement = direction component
        minv_grow(ws_, v, s_val);
        sb_pos_[q] = static_cast<int>(sb_vars_.size());
        sb_vars_.push_back(q);
        u_pos_[r] = static_cast<int>(u_rows_.size());
        u_rows_.push_back(r);
    } else if (!q_struct && l_struct) {
        int r = logical_row(q);
        int p = u_pos_[r];
        int s = sb_pos_[leave];
        minv_shrink(s, p);
        // compact the index lists to mirror the dropped row/column
        sb_pos_[leave] = -1;
        sb_vars_.erase(sb_vars_.begin() + s);
        for (int j = s; j < static_cast<int>(sb_vars_.size()); ++j) sb_pos_[sb_vars_[j]] = j;
        u_pos_[r] = -1;
        u_rows_.erase(u_rows_.begin() + p);
        for (int i = p; i < static_cast<int>(u_rows_.size()); ++i) u_pos_[u_rows_[i]] = i;
    } else {
        int r_in = logical_row(q);   // becomes covered
        int r_out = logical_row(leave); // becomes uncovered
        int p = u_pos_[r_in];
        std::vector<double> g(k_, 0.0);
        for (int j = 0; j < k_; ++j) {
            double cj = 0.0;
            for_col(sb_vars_[j], [&](int rr, double a) {
                if (rr == r_out) cj = a;
            });
            if (cj == 0.0) continue;
            for (int i = 0; i < k_; ++i)
                g[i] += cj * minv_[static_cast<std::size_t>(j) * k_ + i];
        }
        minv_row_replace(p, g);
        u_pos_[r_in] = -1;
        u_rows_[p] = r_out;
        u_pos_[r_out] = p;
    }

    status_[q] = VarStatus::Basic;
    status_[leave] = leave_target == lb_[leave] ? VarStatus::AtLower : VarStatus::AtUpper;
    if (lb_[leave] <= -kInfinity && ub_[leave] >= kInfinity) status_[leave] = VarStatus::Free;

    adjust_btilde(q, enter_start);      // q no longer contributes as nonbasic
    xval_[leave] = leave_target;
    adjust_btilde(leave, -leave_target);

    if (++pivots_since_refactor_ >= kRefactorInterval) {
        if (!refactor()) {
            if (basis_reset_done_) throw std::runtime_error("lp: basis singular after reset");
            basis_reset_done_ = true;
            reset_logical_basis();
            refactor();
            rebuild_btilde();
        }
    }
    compute_basic_values();
    ++iterations_;
    (void)t;
    (void)enter_start;
    return StepResult::Pivoted;
}

LpSolution Simplex::run() {
    // phase 1: drive basic bound violations to zero with composite costs
    phase1_ = infeasibility() > kFeasTol;
    while (phase1_) {
        if (iterations_ >= iter_limit_) return extract(SolveStatus::IterationLimit);
        StepResult res = step();
        if (res == StepResult::NoEntering) {
            if (infeasibility() > 1e-6) return extract(SolveStatus::Infeasible);
            phase1_ = false;
        } else if (infeasibility() <= kFeasTol) {
            phase1_ = false;
        }
    }

    while (true) {
        if (iterations_ >= iter_limit_) return extract(SolveStatus::IterationLimit);
        StepResult res = step();
        if (res == StepResult::NoEntering) return extract(SolveStatus::Optimal);
        if (res == StepResult::Unbounded) return extract(SolveStatus::Unbounded);
        if (infeasibility() > kFeasTol) {
            // numerical drift pushed a basic out of bounds; repair via phase 1
            phase1_ = true;
            while (phase1_) {
                if (iterations_ >= iter_limit_) return extract(SolveStatus::IterationLimit);
                StepResult r2 = step();
                if (r2 == StepResult::NoEntering) {
                    if (infeasibility() > 1e-6) return extract(SolveStatus::Infeasible);
                    phase1_ = false;
                } else if (infeasibility() <= kFeasTol) {
                    phase1_ = false;
                }
            }
        }
    }
}

LpSolution Simplex::extract(SolveStatus st) {
    LpSolution sol;
    sol.status = st;
    sol.iterations = iterations_;
    sol.basis.structural.assign(status_.begin(), status_.begin() + n_);
    sol.basis.logical.assign(status_.begin() + n_, status_.end());
    sol.primal.assign(xval_.begin(), xval_.begin() + n_);
    sol.row_activity.assign(m_, 0.0);
    for (int r = 0; r < m_; ++r) sol.row_activity[r] = p_.row_rhs(r) - xval_[n_ + r];
    double obj = 0.0;
    for (int j = 0; j < n_; ++j) obj += cost_[j] * xval_[j];
    sol.objective = obj;

    phase1_ = false;
    btran();
    sol.row_dual = y_;
    sol.reduced_cost.resize(n_);
    for (int j = 0; j < n_; ++j) sol.reduced_cost[j] = reduced_cost(j);
    return sol;
}

} // namespace

LpSolution solve_lp(const LpProblem& p, const Basis* warm_start, const SolveOptions& options) {
    Simplex s(p, warm_start, options);
    return s.run();
}

void dump_lp(const LpProblem& p, std::ostream& os) {
    os << "Minimize\n obj:";
    bool first = true;
    for (int j = 0; j < p.num_vars(); ++j) {
        double c = p.objective_coeff(j);
        if (c == 0.0) continue;
        os << (c < 0 ? " - " : (first ? " " : " + ")) << std::abs(c) << " x" << j;
        first = false;
    }
    if (first) os << " 0 x0";
    os << "\nSubject To\n";
    for (int r = 0; r < p.num_rows(); ++r) {
        os << " r" << r << ":";
        bool f2 = true;
        for (int j = 0; j < p.num_vars(); ++j)
            for (auto [rr, v] : p.column(j)) {
                if (rr != r || v == 0.0) continue;
                os << (v < 0 ? " - " : (f2 ? " " : " + ")) << std::abs(v) << " x" << j;
                f2 = false;
            }
        if (f2) os << " 0 x0";
        switch (p.row_sense(r)) {
        case RowSense::LessEqual: os << " <= "; break;
        case RowSense::Equal: os << " = "; break;
        case RowSense::GreaterEqual: os << " >= "; break;
        }
        os << p.row_rhs(r) << "\n";
    }
    os << "Bounds\n";
    for (int j = 0; j < p.num_vars(); ++j) {
        double lo = p.lower(j), hi = p.upper(j);
        if (lo <= -kInfinity && hi >= kInfinity)
            os << " x" << j << " free\n";
        else if (hi >= kInfinity)
            os << " x" << j << " >= " << lo << "\n";
        else if (lo <= -kInfinity)
            os << " x" << j << " <= " << hi << "\n";
        else
            os << " " << lo << " <= x" << j << " <= " << hi << "\n";
    }
    os << "End\n";
}

std::string dump_lp_string(const LpProblem& p) {
    std::ostringstream ss;
    dump_lp(p, ss);
    return ss.str();
}

} // namespace pcp::lp
