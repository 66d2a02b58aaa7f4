#include "pcp/instance.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pcp/rng.hpp"

namespace pcp {

bool Instance::operator==(const Instance& o) const {
    if (horizon != o.horizon || duration != o.duration || piles != o.piles || seed != o.seed)
        return false;
    if (partitions != o.partitions) return false;
    if (vertices.size() != o.vertices.size()) return false;
    for (std::size_t i = 0; i < vertices.size(); ++i) {
        const Interval& a = vertices[i];
        const Interval& b = o.vertices[i];
        if (a.vertex_id != b.vertex_id || a.vehicle != b.vehicle || a.start != b.start ||
            a.completion != b.completion)
            return false;
    }
    return true;
}

Instance generate(int num_vertices, int k_per_vehicle, int piles, long long seed, int horizon,
                  int duration) {
    if (num_vertices <= 0 || k_per_vehicle <= 0)
        throw std::invalid_argument("generate: vertex and interval counts must be positive");
    if (num_vertices % k_per_vehicle != 0)
        throw std::invalid_argument("generate: k_per_vehicle must divide num_vertices");
    if (duration <= 0 || duration >= horizon)
        throw std::invalid_argument("generate: need horizon > duration > 0");
    if (piles <= 0) throw std::invalid_argument("generate: piles must be positive");

    Instance inst;
    inst.horizon = horizon;
    inst.duration = duration;
    inst.piles = piles;
    inst.seed = seed;

    int vehicles = num_vertices / k_per_vehicle;
    inst.partitions.resize(vehicles);

    SplitMix64 rng(static_cast<std::uint64_t>(seed));
    int span = horizon - duration + 1; // starts in {0..T-d}
    for (int n = 0; n < vehicles; ++n) {
        for (int k = 0; k < k_per_vehicle; ++k) {
            Interval iv;
            iv.vertex_id = n * k_per_vehicle + k;
            iv.vehicle = n;
            iv.start = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(span)));
            iv.completion = iv.start + duration;
            inst.vertices.push_back(iv);
            inst.partitions[n].push_back(iv.vertex_id);
        }
    }
    return inst;
}

ConflictGraph::ConflictGraph(const Instance& inst) {
    int n = inst.num_vertices();
    capacity_ = 2 * n + 1; // room for super-vertices from contractions
    vertices_.resize(n);
    adj_.assign(n, Bitset(capacity_));
    for (int v = 0; v < n; ++v) {
        vertices_[v].completion = inst.vertices[v].completion;
        vertices_[v].partition = inst.vertices[v].vehicle;
    }
    partition_members_.resize(inst.num_vehicles());
    partition_active_.assign(inst.num_vehicles(), 1);
    for (int p = 0; p < inst.num_vehicles(); ++p)
        partition_members_[p] = inst.partitions[p];
}

void ConflictGraph::ensure_capacity(int n) {
    if (n <= capacity_) return;
    int cap = std::max(n, capacity_ * 2);
    for (auto& row : adj_) {
        Bitset grown(cap);
        row.for_each([&](int i) { grown.set(i); });
        row = grown;
    }
    capacity_ = cap;
}

std::vector<VertexId> ConflictGraph::alive_vertices() const {
    std::vector<VertexId> out;
    for (int v = 0; v < vertex_count(); ++v)
        if (vertices_[v].alive) out.push_back(v);
    return out;
}

std::vector<std::pair<VertexId, VertexId>> ConflictGraph::alive_edges() const {
    std::vector<std::pair<VertexId, VertexId>> out;
    for (int u = 0; u < vertex_count(); ++u) {
        if (!vertices_[u].alive) continue;
        adj_[u].for_each([&](int v) {
            if (v > u && v < vertex_count() && vertices_[v].alive) out.emplace_back(u, v);
        });
    }
    return out;
}

int ConflictGraph::alive_edge_count() const { return static_cast<int>(alive_edges().size()); }

std::vector<VertexId> ConflictGraph::partition_alive(int p) const {
    std::vector<VertexId> out;
    for (VertexId v : partition_members_[p])
        if (vertices_[v].alive) out.push_back(v);
    std::sort(out.begin(), out.end()); // merged partitions append out of order
    return out;
}

std::vector<int> ConflictGraph::active_partitions() const {
    std::vector<int> out;
    for (int p = 0; p < partition_slots(); ++p)
        if (partition_active_[p]) out.push_back(p);
    return out;
}

void ConflictGraph::add_edge(VertexId u, VertexId v) {
    if (u == v) throw std::invalid_argument("add_edge: self loop");
    if (!vertices_[u].alive || !vertices_[v].alive)
        throw std::invalid_argument("add_edge: dead endpoint");
    adj_[u].set(v);
    adj_[v].set(u);
}

void ConflictGraph::remove_vertex(VertexId v) {
    if (!vertices_[v].alive) return;
    vertices_[v].alive = false;
    adj_[v].for_each([&](int u) { adj_[u].reset(v); });
    adj_[v].clear();
}

VertexId ConflictGraph::contract(VertexId u, VertexId v) {
    if (!vertices_[u].alive || !vertices_[v].alive)
        throw std::invalid_argument("contract: dead endpoint");
    if (adjacent(u, v)) throw std::invalid_argument("contract: endpoints are adjacent");

    VertexId z = vertex_count();
    ensure_capacity(z + 1);

    VertexData zd;
    zd.completion = std::max(vertices_[u].completion, vertices_[v].completion);
    zd.from_u = u;
    zd.from_v = v;

    int pu = vertices_[u].partition;
    int pv = vertices_[v].partition;
    int target = std::min(pu, pv);
    int defunct = std::max(pu, pv);
    zd.partition = target;

    Bitset zrow(capacity_);
    adj_[u].for_each([&](int w) { zrow.set(w); });
    adj_[v].for_each([&](int w) { zrow.set(w); });
    zrow.reset(u);
    zrow.reset(v);

    vertices_.push_back(zd);
    adj_.push_back(Bitset(capacity_));
    adj_[z] = zrow;
    zrow.for_each([&](int w) { adj_[w].set(z); });

    remove_vertex(u);
    remove_vertex(v);
    vertices_[u].merged_into = z;
    vertices_[v].merged_into = z;

    if (pu != pv) {
        auto& tgt = partition_members_[target];
        for (VertexId w : partition_members_[defunct]) tgt.push_back(w);
        partition_members_[defunct].clear();
        partition_active_[defunct] = 0;
    }
    partition_members_[target].push_back(z);
    return z;
}

std::optional<VertexId> ConflictGraph::representative(VertexId v) const {
    VertexId cur = v;
    while (!vertices_[cur].alive) {
        if (vertices_[cur].merged_into < 0) return std::nullopt;
        cur = vertices_[cur].merged_into;
    }
    return cur;
}

void ConflictGraph::expand(VertexId v, std::vector<VertexId>& out) const {
    const VertexData& d = vertices_[v];
    if (d.from_u < 0) {
        out.push_back(v);
        return;
    }
    expand(d.from_u, out);
    expand(d.from_v, out);
}

ConflictGraph build_conflict_graph(const Instance& inst) {
    ConflictGraph g(inst);
    int n = inst.num_vertices();
    for (int u = 0; u < n; ++u) {
        for (int v = u + 1; v < n; ++v) {
            const Interval& a = inst.vertices[u];
            const Interval& b = inst.vertices[v];
            bool same_vehicle = a.vehicle == b.vehicle;
            bool overlap = std::abs(a.start - b.start) < inst.duration;
            if (same_vehicle || overlap) g.add_edge(u, v);
        }
    }
    return g;
}

void write_instance(const Instance& inst, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "pcp " << inst.num_vertices() << ' ' << inst.num_vehicles() << ' ' << inst.piles << ' '
        << inst.horizon << ' ' << inst.duration << ' ' << inst.seed << '\n';
    out << "# intervals [start, start+d); starts drawn as splitmix64(seed) % (T-d+1)\n";
    for (const Interval& iv : inst.vertices)
        out << "v " << iv.vertex_id << ' ' << iv.vehicle << ' ' << iv.start << ' ' << iv.completion
            << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

Instance read_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open instance file: " + path);

    auto fail = [&](const std::string& msg) -> std::runtime_error {
        return std::runtime_error(path + ": " + msg);
    };

    Instance inst;
    int nv = -1, nn = -1;
    std::string line;
    bool header_seen = false;
    std::vector<bool> seen;

    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (!header_seen) {
            if (tag != "pcp") throw fail("malformed header, expected 'pcp'");
            ss >> nv >> nn >> inst.piles >> inst.horizon >> inst.duration >> inst.seed;
            if (!ss) throw fail("malformed header fields");
            if (nv <= 0 || nn <= 0 || inst.piles <= 0) throw fail("non-positive header counts");
            if (inst.duration <= 0 || inst.duration >= inst.horizon)
                throw fail("header violates horizon > duration > 0");
            inst.vertices.resize(nv);
            inst.partitions.resize(nn);
            seen.assign(nv, false);
            header_seen = true;
            continue;
        }
        if (tag != "v") throw fail("unexpected line tag: " + tag);
        Interval iv;
        ss >> iv.vertex_id >> iv.vehicle >> iv.start >> iv.completion;
        if (!ss) throw fail("malformed vertex line: " + line);
        if (iv.vertex_id < 0 || iv.vertex_id >= nv) throw fail("vertex id out of range");
        if (seen[iv.vertex_id]) throw fail("duplicate vertex id");
        if (iv.vehicle < 0 || iv.vehicle >= nn) throw fail("partition index out of range");
        if (iv.start < 0 || iv.start > inst.horizon - inst.duration)
            throw fail("start outside [0, T-d]");
        if (iv.completion != iv.start + inst.duration)
            throw fail("completion != start + duration");
        seen[iv.vertex_id] = true;
        inst.vertices[iv.vertex_id] = iv;
        inst.partitions[iv.vehicle].push_back(iv.vertex_id);
    }
    if (!header_seen) throw fail("missing header");
    for (int v = 0; v < nv; ++v)
        if (!seen[v]) throw fail("missing vertex line for id " + std::to_string(v));
    for (int p = 0; p < nn; ++p) {
        if (inst.partitions[p].empty()) throw fail("empty partition " + std::to_string(p));
        std::sort(inst.partitions[p].begin(), inst.partitions[p].end());
    }
    return inst;
}

std::string instance_name(int num_vertices, int piles, int k_per_vehicle, long long seed) {
    std::ostringstream ss;
    ss << 'v' << num_vertices << 'c' << piles << 'k' << k_per_vehicle << 's' << seed;
    return ss.str();
}

int makespan(const Instance& inst, const std::set<VertexId>& selected) {
    if (selected.empty()) throw std::invalid_argument("makespan: empty selection");
    int best = 0;
    for (VertexId v : selected) {
        if (v < 0 || v >= inst.num_vertices())
            throw std::invalid_argument("makespan: vertex id out of range");
        best = std::max(best, inst.vertices[v].completion);
    }
    return best;
}

} // namespace pcp
