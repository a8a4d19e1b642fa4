#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cafl/linalg.hpp"

namespace cafl {

/// Static network layout plus per-round regeneration parameters.
struct TopologyConfig {
    int n = 70;                      // total clients
    int c = 7;                       // cluster count
    std::vector<int> cluster_sizes;  // size c, sums to n
    int k_min = 6;                   // inclusive regular-degree range
    int k_max = 9;
    double p_fail = 0.1;             // fraction of edges deleted per round
    bool balanced_mode = false;      // deletions preserve in_i == out_i
    std::uint64_t seed = 12345;

    void validate() const;  // throws ConfigError on inconsistency
};

/// One cluster's directed graph for one round. Vertices are stored as global
/// client ids; edges use local indices into `vertices` and are kept sorted
/// lexicographically (canonical form, so seeded runs serialize identically).
/// Invariants: no self-loops, no duplicate edges, every out-degree >= 1.
struct ClusterDigraph {
    int cluster_id = 0;
    long round = 0;
    std::vector<int> vertices;
    std::vector<std::pair<int, int>> edges;

    int size() const { return static_cast<int>(vertices.size()); }
    std::vector<int> out_degrees() const;
    std::vector<int> in_degrees() const;
    void validate() const;  // throws InvariantViolation
};

/// Degree statistics that drive the spectral bounds.
struct DegreeSummary {
    int n_l = 0;
    int d_out_min = 0;
    int d_out_max = 0;
    int d_in_max = 0;
    double alpha = 0.0;        // d_out_min / n_l
    double eps = 0.0;          // (d_out_max - d_out_min) / d_out_min
    double varphi = 0.0;       // (d_in_max - d_out_min) / d_out_min
    double alpha_minus = 0.0;  // 1/alpha - 1
    double eps_net = 0.0;      // varphi + eps/alpha
    bool degree_balanced = false;  // in_i == out_i at every vertex
};

struct DeletionOutcome {
    int requested = 0;
    int removed = 0;
    int shortfall = 0;  // requested - removed
};

/// k-regular digraph on n_l vertices: a directed circulant (each vertex links
/// to its next k successors) under a seeded random vertex relabeling. Both
/// in- and out-degrees equal k. Requires 1 <= k <= n_l - 1.
ClusterDigraph make_relabeled_circulant(int n_l, int k, int first_global_id,
                                        int cluster_id, long round,
                                        std::uint64_t seed);

/// Draws k uniformly from cfg's range, then builds the relabeled circulant.
ClusterDigraph generate_regular_cluster(const TopologyConfig& cfg, int cluster_id,
                                        long round);

/// Removes floor(p_fail * |E|) edges. Plain mode draws uniformly among edges
/// whose source keeps out-degree >= 1 after removal. Balanced mode removes
/// whole simple directed cycles so every vertex keeps in-degree == out-degree;
/// cycle length never exceeds the remaining budget and never leaves exactly
/// one edge of budget (a single edge is never a cycle). Blocked removals are
/// reported as shortfall, never forced.
std::pair<ClusterDigraph, DeletionOutcome> delete_edges(const ClusterDigraph& g,
                                                        double p_fail,
                                                        bool balanced_mode,
                                                        std::uint64_t seed);

DegreeSummary degree_summary(const ClusterDigraph& g);

/// Column-stochastic mixing matrix: entry (i, j) = 1/out_degree(j) iff edge
/// j -> i exists, in local indices. Throws if any out-degree is 0.
Mat equal_neighbor_matrix(const ClusterDigraph& g);

/// All clusters for one round: per-cluster degree draw, relabeling, and edge
/// deletion, each from its own (seed, round, cluster) stream.
std::vector<ClusterDigraph> assemble_network(const TopologyConfig& cfg, long round);

/// True iff every vertex is reachable from vertex 0 in both edge directions.
bool strongly_connected(const ClusterDigraph& g);

/// Text format: header `cluster <id> round <t> n <n_l>`, then one `i j` line
/// per edge in global ids.
void write_edge_list(std::ostream& out, const ClusterDigraph& g);

/// Parses the format above; `source_name` labels errors. Throws ConfigError
/// with a 1-based line number on any malformed content.
ClusterDigraph read_edge_list(std::istream& in, const std::string& source_name);

}  // namespace cafl
