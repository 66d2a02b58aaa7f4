#include "pcp/cli.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

namespace fs = std::filesystem;

namespace pcp::cli {

namespace {

std::string fmt(double v, int digits) {
    std::ostringstream ss;
    ss.setf(std::ios::fixed);
    ss.precision(digits);
    ss << v;
    return ss.str();
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    return out;
}

} // namespace

std::string RunRecord::to_csv() const {
    std::ostringstream ss;
    ss << instance_name << ',' << V << ',' << E << ',' << N << ',' << obj << ','
       << fmt(gap_percent, 2) << ',' << fmt(t_total_s, 3) << ',' << fmt(t_rmp_s, 3) << ','
       << fmt(t_pricing_s, 3) << ',' << n_p << ',' << n_c << ',' << n_n << ',' << backend << ','
       << seed << ',' << status;
    return ss.str();
}

std::optional<RunRecord> RunRecord::from_csv(const std::string& line) {
    std::vector<std::string> f = split(line, ',');
    if (f.size() != 15) return std::nullopt;
    RunRecord r;
    try {
        r.instance_name = f[0];
        r.V = std::stoi(f[1]);
        r.E = std::stoi(f[2]);
        r.N = std::stoi(f[3]);
        r.obj = std::stoll(f[4]);
        r.gap_percent = std::stod(f[5]);
        r.t_total_s = std::stod(f[6]);
        r.t_rmp_s = std::stod(f[7]);
        r.t_pricing_s = std::stod(f[8]);
        r.n_p = std::stoll(f[9]);
        r.n_c = std::stoll(f[10]);
        r.n_n = std::stoll(f[11]);
        r.backend = f[12];
        r.seed = std::stoll(f[13]);
        r.status = f[14];
    } catch (const std::exception&) {
        return std::nullopt;
    }
    if (r.backend.empty() || r.status.empty()) return std::nullopt;
    return r;
}

bnp::BnpConfig make_bnp_config(const Config& cfg) {
    bnp::BnpConfig b;
    auto backend = pricing::backend_from_name(cfg.get_string("pricing.backend", "exact"));
    if (!backend)
        throw std::invalid_argument("unknown pricing backend: " +
                                    cfg.get_string("pricing.backend", ""));
    b.backend = *backend;
    b.time_limit_s = cfg.get_double("bnp.time_limit", 3600.0);
    b.seed = static_cast<std::uint64_t>(cfg.get_int("bnp.seed", 0)) ^
             static_cast<std::uint64_t>(cfg.get_int("qaia.seed", 0));
    b.verify_lp = cfg.get_int("lp.verify", 0) != 0;
    b.lazy_row_threshold = static_cast<long>(cfg.get_int("master.lazy_row_threshold", 50000));

    b.pricing.backend = b.backend;
    b.pricing.restarts = static_cast<int>(cfg.get_int("pricing.restarts", 32));
    b.pricing.max_cols = static_cast<int>(cfg.get_int("pricing.max_cols", 10));
    b.pricing.alpha = cfg.get_double("pricing.alpha", 0.0);
    b.pricing.rc_eps = cfg.get_double("pricing.rc_eps", 1e-6);
    b.pricing.lambda1 = cfg.get_double("qubo.lambda1", 0.0);
    b.pricing.lambda2 = cfg.get_double("qubo.lambda2", 0.0);

    b.pricing.qaia.steps = static_cast<int>(cfg.get_int("qaia.steps", 1000));
    b.pricing.qaia.dt = cfg.get_double("qaia.dt", 0.0);
    b.pricing.qaia.xi = cfg.get_double("qaia.xi", 0.0);
    b.pricing.qaia.noise = cfg.get_double("qaia.noise", 0.01);
    b.pricing.qaia.pump_start = cfg.get_double("qaia.pump_start", -1.0);
    b.pricing.qaia.pump_end = cfg.get_double("qaia.pump_end", 1.0);
    b.pricing.qaia.threads = static_cast<int>(cfg.get_int("qaia.threads", 0));
    return b;
}

RunRecord run_solve(const Instance& inst, const std::string& name, const Config& cfg) {
    bnp::BnpConfig bc = make_bnp_config(cfg);
    bnp::SolveResult res = bnp::solve(inst, bc);

    RunRecord r;
    r.instance_name = name;
    r.V = inst.num_vertices();
    r.E = build_conflict_graph(inst).alive_edge_count();
    r.N = inst.num_vehicles();
    r.obj = res.stats.obj;
    r.gap_percent = res.stats.gap_percent;
    r.t_total_s = res.stats.t_total_s;
    r.t_rmp_s = res.stats.t_rmp_s;
    r.t_pricing_s = res.stats.t_pricing_s;
    r.n_p = res.stats.n_pricing_calls;
    r.n_c = res.stats.n_columns;
    r.n_n = res.stats.n_nodes;
    r.backend = pricing::backend_name(bc.backend);
    r.seed = cfg.get_int("bnp.seed", 0);
    r.status = res.stats.status;
    return r;
}

namespace {

void append_csv_row(const std::string& path, const RunRecord& rec) {
    bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
    if (!fresh) {
        std::ifstream in(path);
        std::string first;
        std::getline(in, first);
        if (first != kCsvSchema)
            throw std::runtime_error("csv file has unknown schema line: " + path);
    }
    std::ofstream out(path, std::ios::app);
    if (!out) throw std::runtime_error("cannot open csv for append: " + path);
    if (fresh) out << kCsvSchema << '\n' << kCsvHeader << '\n';
    out << rec.to_csv() << '\n';
    out.flush();
}

struct SolveArgs {
    std::string instance_path;
    std::string csv_path;
    bool print_schedule = false;
};

int cmd_solve(const SolveArgs& args, const Config& cfg) {
    if (!fs::exists(args.instance_path))
        throw std::invalid_argument("no such instance file: " + args.instance_path);
    Instance inst = read_instance(args.instance_path);
    std::string name = fs::path(args.instance_path).stem().string();

    bnp::BnpConfig bc = make_bnp_config(cfg);
    bnp::SolveResult res = bnp::solve(inst, bc);

    RunRecord rec;
    rec.instance_name = name;
    rec.V = inst.num_vertices();
    rec.E = build_conflict_graph(inst).alive_edge_count();
    rec.N = inst.num_vehicles();
    rec.obj = res.stats.obj;
    rec.gap_percent = res.stats.gap_percent;
    rec.t_total_s = res.stats.t_total_s;
    rec.t_rmp_s = res.stats.t_rmp_s;
    rec.t_pricing_s = res.stats.t_pricing_s;
    rec.n_p = res.stats.n_pricing_calls;
    rec.n_c = res.stats.n_columns;
    rec.n_n = res.stats.n_nodes;
    rec.backend = pricing::backend_name(bc.backend);
    rec.seed = cfg.get_int("bnp.seed", 0);
    rec.status = res.stats.status;

    std::cout << "instance   " << name << "\n"
              << "V/E/N      " << rec.V << '/' << rec.E << '/' << rec.N << "\n"
              << "backend    " << rec.backend << "\n"
              << "status     " << rec.status << "\n"
              << "obj        " << rec.obj << "\n"
              << "gap%       " << fmt(rec.gap_percent, 2) << "\n"
              << "t_total    " << fmt(rec.t_total_s, 3) << " s (rmp " << fmt(rec.t_rmp_s, 3)
              << ", pricing " << fmt(rec.t_pricing_s, 3) << ")\n"
              << "N_p/N_c/N_n " << rec.n_p << '/' << rec.n_c << '/' << rec.n_n << "\n";
    if (res.incumbent && args.print_schedule) {
        for (std::size_t i = 0; i < res.incumbent->selection.size(); ++i) {
            VertexId v = res.incumbent->selection[i];
            const Interval& iv = inst.vertices[v];
            std::cout << "vehicle " << iv.vehicle << " -> interval " << v << " [" << iv.start
                      << ',' << iv.completion << ") pile " << res.incumbent->pile_of[i] << "\n";
        }
    }
    if (!args.csv_path.empty()) append_csv_row(args.csv_path, rec);

    if (res.stats.status == "infeasible") return kExitInfeasible;
    return kExitOk;
}

struct GenerateArgs {
    int vertices = 0, k = 0, piles = 0;
    std::string seeds = "1";
    std::string out_dir = ".";
    int horizon = 24, duration = 3;
    bool force = false;
};

int cmd_generate(const GenerateArgs& args) {
    std::vector<long long> seeds;
    for (const std::string& s : split(args.seeds, ','))
        if (!s.empty()) seeds.push_back(std::stoll(s));
    if (seeds.empty()) throw CLI::ValidationError("--seeds", "no seeds given");

    fs::create_directories(args.out_dir);
    for (long long seed : seeds) {
        Instance inst =
            generate(args.vertices, args.k, args.piles, seed, args.horizon, args.duration);
        std::string name = instance_name(args.vertices, args.piles, args.k, seed);
        fs::path path = fs::path(args.out_dir) / (name + ".pcp");
        if (fs::exists(path) && !args.force)
            throw std::invalid_argument("refusing to overwrite " + path.string() +
                                        " (use --force)");
        write_instance(inst, path.string());
        std::cout << path.string() << "\n";
    }
    return kExitOk;
}

struct BenchArgs {
    std::string manifest;
    std::string csv_path;
    int jobs = 1;
};

struct BenchEntry {
    std::string path;
    std::string backend;
    long long seed = 0;
};

int cmd_bench(const BenchArgs& args, const Config& base_cfg) {
    std::ifstream in(args.manifest);
    if (!in) throw std::runtime_error("cannot open manifest: " + args.manifest);
    std::vector<BenchEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        std::string trimmed = line;
        auto pos = trimmed.find_first_not_of(" \t");
        if (pos == std::string::npos || trimmed[pos] == '#') continue;
        std::istringstream ss(trimmed);
        BenchEntry e;
        if (!(ss >> e.path >> e.backend >> e.seed))
            throw std::runtime_error("malformed manifest line: " + line);
        entries.push_back(e);
    }

    // header goes out first so an interrupted run still leaves a valid file
    {
        bool fresh = !fs::exists(args.csv_path) || fs::file_size(args.csv_path) == 0;
        std::ofstream out(args.csv_path, std::ios::app);
        if (!out) throw std::runtime_error("cannot open csv: " + args.csv_path);
        if (fresh) {
            out << kCsvSchema << '\n' << kCsvHeader << '\n';
            out.flush();
        }
    }

    std::mutex io_mutex;
    std::vector<RunRecord> records(entries.size());
    std::atomic<std::size_t> cursor{0};

    auto worker = [&]() {
        while (true) {
            std::size_t idx = cursor.fetch_add(1);
            if (idx >= entries.size()) return;
            const BenchEntry& e = entries[idx];
            RunRecord rec;
            rec.instance_name = fs::path(e.path).stem().string();
            rec.backend = e.backend;
            rec.seed = e.seed;
            try {
                Instance inst = read_instance(e.path);
                Config cfg = base_cfg;
                cfg.set("pricing.backend", e.backend);
                cfg.set("bnp.seed", std::to_string(e.seed));
                rec = run_solve(inst, rec.instance_name, cfg);
            } catch (const std::exception& ex) {
                rec.status = "error";
                rec.obj = -1;
                rec.gap_percent = 100.0;
                std::lock_guard<std::mutex> lk(io_mutex);
                std::cerr << "bench: " << e.path << " (" << e.backend << "): " << ex.what()
                          << "\n";
            }
            records[idx] = rec;
            std::lock_guard<std::mutex> lk(io_mutex);
            std::ofstream out(args.csv_path, std::ios::app);
            out << rec.to_csv() << '\n';
            out.flush();
            std::cout << rec.instance_name << ' ' << rec.backend << " s" << rec.seed << ": "
                      << rec.status << " obj=" << rec.obj << " gap=" << fmt(rec.gap_percent, 2)
                      << " t=" << fmt(rec.t_total_s, 3) << "s\n";
        }
    };

    int jobs = std::max(1, args.jobs);
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // aggregates per (V, backend)
    std::map<std::pair<int, std::string>, std::vector<const RunRecord*>> groups;
    for (const RunRecord& r : records)
        if (r.status != "error") groups[{r.V, r.backend}].push_back(&r);
    std::cout << "\nV backend mean_gap mean_t_total n\n";
    for (const auto& [key, rows] : groups) {
        double gap = 0.0, tt = 0.0;
        for (const RunRecord* r : rows) {
            gap += r->gap_percent;
            tt += r->t_total_s;
        }
        gap /= static_cast<double>(rows.size());
        tt /= static_cast<double>(rows.size());
        std::cout << key.first << ' ' << key.second << ' ' << fmt(gap, 2) << ' ' << fmt(tt, 3)
                  << ' ' << rows.size() << "\n";
    }
    return kExitOk;
}

struct ReportArgs {
    std::string csv_path;
    std::string out_dir;
};

int cmd_report(const ReportArgs& args) {
    std::ifstream in(args.csv_path);
    if (!in) throw std::runtime_error("cannot open csv: " + args.csv_path);
    std::string line;
    if (!std::getline(in, line) || line != kCsvSchema)
        throw std::runtime_error("unknown csv schema (expected '" + std::string(kCsvSchema) +
                                 "')");
    std::getline(in, line); // header

    std::map<std::pair<int, std::string>, std::pair<double, int>> gap_acc, time_acc;
    std::set<std::string> backends_seen;
    std::set<int> sizes;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto rec = RunRecord::from_csv(line);
        if (!rec) {
            std::cerr << "report: skipping malformed row: " << line << "\n";
            continue;
        }
        auto key = std::make_pair(rec->V, rec->backend);
        gap_acc[key].first += rec->gap_percent;
        gap_acc[key].second += 1;
        time_acc[key].first += rec->t_total_s;
        time_acc[key].second += 1;
        backends_seen.insert(rec->backend);
        sizes.insert(rec->V);
    }

    // canonical backend order, extras alphabetical
    std::vector<std::string> backends;
    for (const char* b : {"exact", "bsb", "simcim"})
        if (backends_seen.count(b)) backends.push_back(b);
    for (const std::string& b : backends_seen)
        if (std::find(backends.begin(), backends.end(), b) == backends.end())
            backends.push_back(b);

    fs::create_directories(args.out_dir);
    auto emit = [&](const std::string& file,
                    const std::map<std::pair<int, std::string>, std::pair<double, int>>& acc,
                    int digits) {
        std::ofstream out(fs::path(args.out_dir) / file);
        out << "V";
        for (const std::string& b : backends) out << '\t' << b;
        out << '\n';
        for (int v : sizes) {
            out << v;
            for (const std::string& b : backends) {
                auto it = acc.find({v, b});
                out << '\t';
                if (it != acc.end()) out << fmt(it->second.first / it->second.second, digits);
            }
            out << '\n';
        }
    };
    emit("gap_vs_v.tsv", gap_acc, 2);
    emit("time_vs_v.tsv", time_acc, 3);
    std::cout << (fs::path(args.out_dir) / "gap_vs_v.tsv").string() << "\n"
              << (fs::path(args.out_dir) / "time_vs_v.tsv").string() << "\n";
    return kExitOk;
}

} // namespace

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"branch-and-price solver for partition-coloring EV charging schedules"};
    app.require_subcommand(1);

    // shared config plumbing: --config-file first, then --config overrides,
    // then explicit flags
    std::string config_file;
    std::vector<std::string> config_kv;

    auto add_config_flags = [&](CLI::App* sub) {
        sub->add_option("--config-file", config_file, "flat key = value config file");
        sub->add_option("--config", config_kv, "config override key=value (repeatable)");
    };

    GenerateArgs gen;
    CLI::App* sub_gen = app.add_subcommand("generate", "write random instances");
    sub_gen->add_option("--vertices", gen.vertices, "total interval count")->required();
    sub_gen->add_option("--k", gen.k, "candidate intervals per vehicle")->required();
    sub_gen->add_option("--piles", gen.piles, "charging piles")->required();
    sub_gen->add_option("--seeds", gen.seeds, "comma-separated seed list")->required();
    sub_gen->add_option("--out-dir", gen.out_dir, "output directory");
    sub_gen->add_option("--horizon", gen.horizon, "scheduling horizon T");
    sub_gen->add_option("--duration", gen.duration, "charging duration d");
    sub_gen->add_flag("--force", gen.force, "overwrite existing files");

    SolveArgs sol;
    std::string backend_flag = "exact";
    double time_limit_flag = 3600.0;
    long long seed_flag = 0;
    CLI::App* sub_solve = app.add_subcommand("solve", "solve one instance");
    sub_solve->add_option("--instance", sol.instance_path, "instance file")->required();
    auto* opt_backend =
        sub_solve->add_option("--pricing", backend_flag, "pricing backend: exact|bsb|simcim");
    auto* opt_tl = sub_solve->add_option("--time-limit", time_limit_flag, "seconds");
    auto* opt_seed = sub_solve->add_option("--seed", seed_flag, "run seed");
    sub_solve->add_option("--csv", sol.csv_path, "append a run record to this CSV");
    sub_solve->add_flag("--print-schedule", sol.print_schedule, "print the incumbent schedule");
    add_config_flags(sub_solve);

    BenchArgs bench;
    double bench_tl = 3600.0;
    CLI::App* sub_bench = app.add_subcommand("bench", "run a manifest of (instance,backend,seed)");
    sub_bench->add_option("--manifest", bench.manifest, "manifest file")->required();
    sub_bench->add_option("--csv", bench.csv_path, "output CSV")->required();
    sub_bench->add_option("--jobs", bench.jobs, "parallel solves");
    auto* opt_btl = sub_bench->add_option("--time-limit", bench_tl, "seconds per run");
    add_config_flags(sub_bench);

    ReportArgs rep;
    CLI::App* sub_report = app.add_subcommand("report", "emit plot-ready TSV series from a CSV");
    sub_report->add_option("--csv", rep.csv_path, "input CSV")->required();
    sub_report->add_option("--out-dir", rep.out_dir, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        Config cfg;
        if (!config_file.empty()) cfg.load_file(config_file);
        for (const std::string& kv : config_kv) cfg.parse_line(kv);

        if (sub_gen->parsed()) return cmd_generate(gen);
        if (sub_solve->parsed()) {
            if (opt_backend->count()) cfg.set("pricing.backend", backend_flag);
            if (opt_tl->count()) cfg.set("bnp.time_limit", fmt(time_limit_flag, 6));
            if (opt_seed->count()) cfg.set("bnp.seed", std::to_string(seed_flag));
            return cmd_solve(sol, cfg);
        }
        if (sub_bench->parsed()) {
            if (opt_btl->count()) cfg.set("bnp.time_limit", fmt(bench_tl, 6));
            return cmd_bench(bench, cfg);
        }
        if (sub_report->parsed()) return cmd_report(rep);
        return kExitUsage;
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}

} // namespace pcp::cli
