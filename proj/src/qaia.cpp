#include "pcp/qaia.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>
#include <tuple>

#include "pcp/rng.hpp"

namespace pcp::qaia {

void IsingModel::add_coupling(int i, int j, double value) {
    if (i == j) throw std::invalid_argument("ising: diagonal coupling");
    if (i > j) std::swap(i, j);
    couplings.emplace_back(i, j, value);
}

double energy(const IsingModel& m, const std::vector<int>& spins) {
    if (static_cast<int>(spins.size()) != m.n)
        throw std::invalid_argument("energy: spin vector length mismatch");
    for (int s : spins)
        if (s != 1 && s != -1) throw std::invalid_argument("energy: spins must be +-1");
    double e = m.offset;
    for (auto [i, j, v] : m.couplings) e += v * spins[i] * spins[j];
    for (int i = 0; i < m.n; ++i) e += m.h[i] * spins[i];
    return e;
}

namespace detail {

bool bsb_check_bounds = false;

namespace {

struct Csr {
    std::vector<int> start;
    std::vector<int> col;
    std::vector<double> val;
};

Csr build_csr(const IsingModel& m) {
    std::vector<int> deg(m.n, 0);
    for (auto [i, j, v] : m.couplings) {
        (void)v;
        ++deg[i];
        ++deg[j];
    }
    Csr csr;
    csr.start.assign(m.n + 1, 0);
    for (int i = 0; i < m.n; ++i) csr.start[i + 1] = csr.start[i] + deg[i];
    csr.col.resize(csr.start[m.n]);
    csr.val.resize(csr.start[m.n]);
    std::vector<int> cur(csr.start.begin(), csr.start.end() - 1);
    for (auto [i, j, v] : m.couplings) {
        csr.col[cur[i]] = j;
        csr.val[cur[i]++] = v;
        csr.col[cur[j]] = i;
        csr.val[cur[j]++] = v;
    }
    return csr;
}

// Acklam's rational approximation of the inverse normal CDF; plenty of
// accuracy for injected noise
double inverse_normal(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double lo = 0.02425;
    if (p < lo) {
        double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > 1.0 - lo) {
        double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    double q = p - 0.5;
    double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// counter-based standard normal: one splitmix64 finalizer per draw, so the
// per-restart noise stream is a pure function of (seed, step, spin) and stays
// identical for any thread layout
inline double counter_normal(std::uint64_t seed, std::uint64_t counter) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (counter + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    z ^= z >> 31;
    double u = (static_cast<double>(z >> 11) + 0.5) * 0x1.0p-53; // (0,1)
    return inverse_normal(u);
}

double auto_xi(const IsingModel& m) {
    // 0.5 / (sqrt(n) * std of nonzero couplings); falls back to the RMS when
    // all couplings are equal, and to 0.1 when there are none.
    double sum = 0.0, sumsq = 0.0;
    long cnt = 0;
    for (auto [i, j, v] : m.couplings) {
        (void)i;
        (void)j;
        if (v == 0.0) continue;
        sum += v;
        sumsq += v * v;
        ++cnt;
    }
    if (cnt == 0 || m.n == 0) return 0.1;
    double mean = sum / cnt;
    double var = std::max(0.0, sumsq / cnt - mean * mean);
    double spread = std::sqrt(var);
    if (spread < 1e-12) spread = std::sqrt(sumsq / cnt);
    if (spread < 1e-12) return 0.1;
    return 0.5 / (std::sqrt(static_cast<double>(m.n)) * spread);
}

// one contiguous block of restarts advanced in lockstep; layout x[i*r + rr]
void run_block_bsb(const IsingModel& m, const Csr& csr, const QaiaConfig& cfg, double dt,
                   double xi, std::uint64_t first_seed, int count,
                   std::vector<std::vector<int>>& spins_out, int out_offset) {
    const int n = m.n;
    const int r = count;
    const double a0 = 1.0;
    std::vector<double> x(static_cast<std::size_t>(n) * r), y(static_cast<std::size_t>(n) * r);
    std::vector<double> f(static_cast<std::size_t>(n) * r);

    for (int rr = 0; rr < r; ++rr) {
        SplitMix64 rng(first_seed + rr);
        for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i) * r + rr] = rng.next_uniform(-0.1, 0.1);
        for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i) * r + rr] = rng.next_uniform(-0.1, 0.1);
    }

    for (int t = 1; t <= cfg.steps; ++t) {
        double a = cfg.steps > 1 ? a0 * static_cast<double>(t - 1) / (cfg.steps - 1) : 0.0;
        double stiff = a0 - a;
        for (int i = 0; i < n; ++i) {
            double* fi = f.data() + static_cast<std::size_t>(i) * r;
            for (int rr = 0; rr < r; ++rr) fi[rr] = 0.0;
            for (int kk = csr.start[i]; kk < csr.start[i + 1]; ++kk) {
                double v = csr.val[kk];
                const double* xj = x.data() + static_cast<std::size_t>(csr.col[kk]) * r;
                for (int rr = 0; rr < r; ++rr) fi[rr] += v * xj[rr];
            }
        }
        for (int i = 0; i < n; ++i) {
            double hi = m.h[i];
            double* xi_ = x.data() + static_cast<std::size_t>(i) * r;
            double* yi = y.data() + static_cast<std::size_t>(i) * r;
            const double* fi = f.data() + static_cast<std::size_t>(i) * r;
            for (int rr = 0; rr < r; ++rr) {
                yi[rr] += dt * (-stiff * xi_[rr] + xi * (-fi[rr] - hi));
                xi_[rr] += dt * a0 * yi[rr];
                if (xi_[rr] > 1.0) {
                    xi_[rr] = 1.0;
                    yi[rr] = 0.0;
                } else if (xi_[rr] < -1.0) {
                    xi_[rr] = -1.0;
                    yi[rr] = 0.0;
                }
            }
        }
        if (bsb_check_bounds) {
            for (double v : x)
                if (std::abs(v) > 1.0) throw std::logic_error("bsb: wall breached");
        }
    }

    for (int rr = 0; rr < r; ++rr) {
        bool finite = true;
        std::vector<int> s(n);
        for (int i = 0; i < n; ++i) {
            double v = x[static_cast<std::size_t>(i) * r + rr];
            if (!std::isfinite(v)) {
                finite = false;
                break;
            }
            s[i] = v < 0.0 ? -1 : 1; // sign(0) = +1
        }
        spins_out[out_offset + rr] = finite ? std::move(s) : std::vector<int>();
    }
}

void run_block_simcim(const IsingModel& m, const Csr& csr, const QaiaConfig& cfg, double dt,
                      double xi, std::uint64_t first_seed, int count,
                      std::vector<std::vector<int>>& spins_out, int out_offset) {
    const int n = m.n;
    const int r = count;
    std::vector<double> c(static_cast<std::size_t>(n) * r, 0.0);
    std::vector<double> f(static_cast<std::size_t>(n) * r);

    for (int t = 1; t <= cfg.steps; ++t) {
        double frac = cfg.steps > 1 ? static_cast<double>(t - 1) / (cfg.steps - 1) : 0.0;
        double p = cfg.pump_start + (cfg.pump_end - cfg.pump_start) * frac;
        for (int i = 0; i < n; ++i) {
            double* fi = f.data() + static_cast<std::size_t>(i) * r;
            for (int rr = 0; rr < r; ++rr) fi[rr] = 0.0;
            for (int kk = csr.start[i]; kk < csr.start[i + 1]; ++kk) {
                double v = csr.val[kk];
                const double* cj = c.data() + static_cast<std::size_t>(csr.col[kk]) * r;
                for (int rr = 0; rr < r; ++rr) fi[rr] += v * cj[rr];
            }
        }
        std::uint64_t step_base = static_cast<std::uint64_t>(t) * static_cast<std::uint64_t>(n);
        for (int i = 0; i < n; ++i) {
            double hi = m.h[i];
            double* ci = c.data() + static_cast<std::size_t>(i) * r;
            const double* fi = f.data() + static_cast<std::size_t>(i) * r;
            std::uint64_t counter = step_base + static_cast<std::uint64_t>(i);
            for (int rr = 0; rr < r; ++rr) {
                double nz = cfg.noise > 0.0
                                ? cfg.noise * counter_normal(first_seed + rr, counter)
                                : 0.0;
                double v = ci[rr] + dt * (p * ci[rr] + xi * (-fi[rr] - hi)) + nz;
                ci[rr] = std::clamp(v, -1.0, 1.0);
            }
        }
    }

    for (int rr = 0; rr < r; ++rr) {
        bool finite = true;
        std::vector<int> s(n);
        for (int i = 0; i < n; ++i) {
            double v = c[static_cast<std::size_t>(i) * r + rr];
            if (!std::isfinite(v)) {
                finite = false;
                break;
            }
            s[i] = v < 0.0 ? -1 : 1;
        }
        spins_out[out_offset + rr] = finite ? std::move(s) : std::vector<int>();
    }
}

} // namespace

BatchOutput run_batch(const IsingModel& m, const QaiaConfig& cfg, bool simcim) {
    if (cfg.steps < 1 || cfg.restarts < 1)
        throw std::invalid_argument("qaia: steps and restarts must be >= 1");
    if (static_cast<int>(m.h.size()) != m.n)
        throw std::invalid_argument("qaia: field vector length mismatch");

    Csr csr = build_csr(m);
    double dt = cfg.dt > 0.0 ? cfg.dt : (simcim ? 0.05 : 0.25);
    double xi = cfg.xi > 0.0 ? cfg.xi : auto_xi(m);

    BatchOutput out;
    out.spins.resize(cfg.restarts);
    out.energies.assign(cfg.restarts, std::numeric_limits<double>::quiet_NaN());
    if (m.n == 0) {
        for (int rr = 0; rr < cfg.restarts; ++rr) {
            out.spins[rr] = {};
            out.energies[rr] = m.offset;
        }
        return out;
    }

    int threads = cfg.threads > 0 ? cfg.threads
                                  : static_cast<int>(std::thread::hardware_concurrency());
    threads = std::clamp(threads, 1, cfg.restarts);

    auto work = [&](int lo, int hi) {
        if (simcim)
            run_block_simcim(m, csr, cfg, dt, xi, cfg.seed + lo, hi - lo, out.spins, lo);
        else
            run_block_bsb(m, csr, cfg, dt, xi, cfg.seed + lo, hi - lo, out.spins, lo);
    };

    if (threads == 1) {
        work(0, cfg.restarts);
    } else {
        std::vector<std::thread> pool;
        int chunk = (cfg.restarts + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            int lo = t * chunk;
            int hi = std::min(cfg.restarts, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back(work, lo, hi);
        }
        for (auto& th : pool) th.join();
    }

    for (int rr = 0; rr < cfg.restarts; ++rr)
        if (!out.spins[rr].empty() || m.n == 0)
            out.energies[rr] = energy(m, out.spins[rr]);
    return out;
}

} // namespace detail

namespace {

SpinResult reduce_batch(const IsingModel& m, const detail::BatchOutput& batch, double wall_s) {
    SpinResult res;
    res.restart_energies = batch.energies;
    res.wall_time_s = wall_s;
    bool found = false;
    for (std::size_t rr = 0; rr < batch.spins.size(); ++rr) {
        if (batch.spins[rr].empty() && m.n > 0) continue; // non-finite restart
        double e = batch.energies[rr];
        if (!found || e < res.best_energy) {
            found = true;
            res.best_energy = e;
            res.best_spins = batch.spins[rr];
        }
    }
    if (!found) throw std::runtime_error("qaia: all restarts produced non-finite states");
    return res;
}

SpinResult solve_backend(const IsingModel& m, const QaiaConfig& cfg, bool simcim) {
    auto t0 = std::chrono::steady_clock::now();
    detail::BatchOutput batch = detail::run_batch(m, cfg, simcim);
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return reduce_batch(m, batch, wall);
}

} // namespace

SpinResult solve_bsb(const IsingModel& m, const QaiaConfig& cfg) {
    return solve_backend(m, cfg, false);
}

SpinResult solve_simcim(const IsingModel& m, const QaiaConfig& cfg) {
    return solve_backend(m, cfg, true);
}

SpinResult brute_force_ground(const IsingModel& m) {
    if (m.n > 20) throw std::invalid_argument("brute_force_ground: refusing n > 20");
    auto t0 = std::chrono::steady_clock::now();
    SpinResult res;
    std::vector<int> spins(m.n, -1);
    std::vector<int> best;
    double best_e = std::numeric_limits<double>::infinity();
    const std::uint64_t total = 1ULL << m.n;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        for (int i = 0; i < m.n; ++i) spins[i] = (mask >> i) & 1ULL ? 1 : -1;
        double e = energy(m, spins);
        if (e < best_e) {
            best_e = e;
            best = spins;
        } else if (e == best_e && !best.empty()) {
            if (std::lexicographical_compare(spins.begin(), spins.end(), best.begin(), best.end()))
                best = spins;
        }
    }
    if (m.n == 0) {
        best = {};
        best_e = m.offset;
    }
    res.best_spins = best;
    res.best_energy = best_e;
    res.restart_energies = {best_e};
    res.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

} // namespace pcp::qaia
