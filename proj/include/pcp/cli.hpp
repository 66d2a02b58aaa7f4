#ifndef PCP_CLI_HPP
#define PCP_CLI_HPP

#include <optional>
#include <string>
#include <vector>

#include "pcp/bnp.hpp"
#include "pcp/config.hpp"
#include "pcp/instance.hpp"

namespace pcp::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitInternal = 4;

inline constexpr const char* kCsvSchema = "schema=1";
inline constexpr const char* kCsvHeader =
    "instance,V,E,N,obj,gap_percent,t_total_s,t_rmp_s,t_pricing_s,n_p,n_c,n_n,backend,seed,"
    "status";

// one CSV line per (instance, backend) run
struct RunRecord {
    std::string instance_name;
    int V = 0, E = 0, N = 0;
    long long obj = -1;
    double gap_percent = 0.0;
    double t_total_s = 0.0, t_rmp_s = 0.0, t_pricing_s = 0.0;
    long long n_p = 0, n_c = 0, n_n = 0;
    std::string backend;
    long long seed = 0;
    std::string status;

    std::string to_csv() const;
    static std::optional<RunRecord> from_csv(const std::string& line);
};

// config keys -> solver configuration (defaults applied here)
bnp::BnpConfig make_bnp_config(const Config& cfg);

RunRecord run_solve(const Instance& inst, const std::string& name, const Config& cfg);

// entry point used by the pcp binary; returns a process exit code
int run_cli(int argc, const char* const* argv);

} // namespace pcp::cli

#endif
