#ifndef PCP_QAIA_HPP
#define PCP_QAIA_HPP

#include <cstdint>
#include <tuple>
#include <vector>

namespace pcp::qaia {

// Ising model with energy  H(s) = 1/2 * s^T J s + h^T s + offset  over
// spins in {-1,+1}. Couplings are kept as symmetric upper-triangle entries
// (i < j); the diagonal is zero by construction.
struct IsingModel {
    int n = 0;
    std::vector<std::tuple<int, int, double>> couplings; // (i, j, J_ij), i < j
    std::vector<double> h;
    double offset = 0.0;

    void add_coupling(int i, int j, double value);
};

struct QaiaConfig {
    int steps = 1000;
    double dt = 0.0;        // 0 -> backend default (0.25 bsb, 0.05 simcim)
    int restarts = 32;
    std::uint64_t seed = 0;
    double xi = 0.0;        // coupling scale, 0 -> 0.5/(sqrt(n)*std(J))
    double noise = 0.01;    // simcim amplitude
    double pump_start = -1.0;
    double pump_end = 1.0;
    int threads = 0;        // 0 -> hardware concurrency
};

struct SpinResult {
    std::vector<int> best_spins; // +1/-1
    double best_energy = 0.0;
    std::vector<double> restart_energies;
    double wall_time_s = 0.0;
};

double energy(const IsingModel& m, const std::vector<int>& spins);

// Ballistic simulated bifurcation: position/momentum dynamics with a linear
// pump ramp and inelastic walls at |x| = 1.
SpinResult solve_bsb(const IsingModel& m, const QaiaConfig& cfg);

// Simulated coherent Ising machine: pumped amplitude dynamics with Gaussian
// noise, clamped to [-1, 1].
SpinResult solve_simcim(const IsingModel& m, const QaiaConfig& cfg);

// Exhaustive ground state for n <= 20; ties broken by the lexicographically
// smallest spin vector (-1 before +1).
SpinResult brute_force_ground(const IsingModel& m);

namespace detail {

// Runs all restarts of one backend and keeps every final spin vector, which
// pricing needs to repair each restart separately. Restart r uses the RNG
// stream seeded with cfg.seed + r, so results do not depend on threading.
struct BatchOutput {
    std::vector<std::vector<int>> spins;  // per restart, empty if non-finite
    std::vector<double> energies;         // recomputed, NaN if non-finite
};

BatchOutput run_batch(const IsingModel& m, const QaiaConfig& cfg, bool simcim);

// test hook: asserts the inelastic walls keep |x| <= 1 after every step
extern bool bsb_check_bounds;

} // namespace detail

} // namespace pcp::qaia

#endif
