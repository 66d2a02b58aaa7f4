#ifndef PCP_INSTANCE_HPP
#define PCP_INSTANCE_HPP

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "pcp/bitset.hpp"

namespace pcp {

using VertexId = int;

// One candidate charging interval [start, start+duration).
struct Interval {
    VertexId vertex_id = 0;
    int vehicle = 0;    // partition index
    int start = 0;
    int completion = 0; // start + duration
};

struct Instance {
    int horizon = 24;
    int duration = 3;
    int piles = 1;
    std::vector<Interval> vertices;          // ordered by vertex_id
    std::vector<std::vector<VertexId>> partitions;
    long long seed = 0;

    int num_vertices() const { return static_cast<int>(vertices.size()); }
    int num_vehicles() const { return static_cast<int>(partitions.size()); }

    bool operator==(const Instance& o) const;
};

// Conflict graph over interval vertices, plus the mutable state branching
// needs: edge additions, vertex removals and Zykov-style contractions into
// super-vertices. Instances built by build_conflict_graph are treated as
// immutable; branch-and-price mutates per-node copies only.
class ConflictGraph {
public:
    ConflictGraph() = default;
    explicit ConflictGraph(const Instance& inst);

    int vertex_count() const { return static_cast<int>(vertices_.size()); }
    bool alive(VertexId v) const { return vertices_[v].alive; }
    int completion(VertexId v) const { return vertices_[v].completion; }
    int partition_of(VertexId v) const { return vertices_[v].partition; }
    std::optional<VertexId> merged_into(VertexId v) const {
        return vertices_[v].merged_into < 0 ? std::nullopt
                                            : std::optional<VertexId>(vertices_[v].merged_into);
    }

    bool adjacent(VertexId u, VertexId v) const { return adj_[u].test(v); }
    const Bitset& neighbors(VertexId v) const { return adj_[v]; }

    std::vector<VertexId> alive_vertices() const;
    // unordered pairs (u < v) over alive vertices, each counted once
    std::vector<std::pair<VertexId, VertexId>> alive_edges() const;
    int alive_edge_count() const;

    int partition_slots() const { return static_cast<int>(partition_members_.size()); }
    bool partition_active(int p) const { return partition_active_[p]; }
    // alive members of partition p
    std::vector<VertexId> partition_alive(int p) const;
    std::vector<int> active_partitions() const;

    // --- branching mutations (per-node copies only) ---
    void add_edge(VertexId u, VertexId v);
    void remove_vertex(VertexId v);
    // Contracts u and v into a fresh super-vertex z with N(z)=N(u) u N(v),
    // e_z = max(e_u, e_v), and merges their partitions into min(p(u),p(v)).
    VertexId contract(VertexId u, VertexId v);

    // pair (u,v) a super-vertex was built from; (-1,-1) for plain vertices
    std::pair<VertexId, VertexId> merged_pair(VertexId z) const {
        return {vertices_[z].from_u, vertices_[z].from_v};
    }

    // Maps a vertex to its current representative: follows contraction
    // chains; nullopt if the chain hits a removed vertex.
    std::optional<VertexId> representative(VertexId v) const;

    // Appends the original (non-super) vertices a node vertex stands for.
    void expand(VertexId v, std::vector<VertexId>& out) const;

private:
    struct VertexData {
        int completion = 0;
        int partition = 0;
        bool alive = true;
        VertexId merged_into = -1;
        VertexId from_u = -1, from_v = -1;
    };

    void ensure_capacity(int n);

    std::vector<VertexData> vertices_;
    std::vector<Bitset> adj_;
    std::vector<std::vector<VertexId>> partition_members_;
    std::vector<char> partition_active_;
    int capacity_ = 0;
};

// Generates a random instance: num_vertices/k_per_vehicle vehicles, each with
// k_per_vehicle integer start times drawn uniformly from {0..horizon-duration}
// using a splitmix64 stream seeded with `seed`. Identical arguments give a
// bit-identical instance.
Instance generate(int num_vertices, int k_per_vehicle, int piles, long long seed,
                  int horizon = 24, int duration = 3);

// Edge iff same partition, or the half-open intervals overlap
// (|start_u - start_v| < duration).
ConflictGraph build_conflict_graph(const Instance& inst);

void write_instance(const Instance& inst, const std::string& path);
Instance read_instance(const std::string& path);

// canonical file stem "v{V}c{C}k{K}s{S}"
std::string instance_name(int num_vertices, int piles, int k_per_vehicle, long long seed);

// max completion time over a non-empty selection
int makespan(const Instance& inst, const std::set<VertexId>& selected);

} // namespace pcp

#endif
