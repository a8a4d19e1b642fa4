#include "cafl/topology.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include "cafl/errors.hpp"
#include "cafl/rng.hpp"

namespace cafl {

void TopologyConfig::validate() const {
    if (n < 2) throw ConfigError("topology", 0, "n must be >= 2");
    if (c < 1) throw ConfigError("topology", 0, "cluster count must be >= 1");
    if (static_cast<int>(cluster_sizes.size()) != c) {
        throw ConfigError("topology", 0, "cluster_sizes must list exactly c entries");
    }
    int total = 0;
    int min_size = n;
    for (int s : cluster_sizes) {
        if (s < 2) throw ConfigError("topology", 0, "every cluster needs >= 2 clients");
        total += s;
        min_size = std::min(min_size, s);
    }
    if (total != n) throw ConfigError("topology", 0, "cluster_sizes must sum to n");
    if (k_min < 1 || k_min > k_max) {
        throw ConfigError("topology", 0, "need 1 <= k_min <= k_max");
    }
    if (k_max > min_size - 1) {
        throw ConfigError("topology", 0, "k_max must be <= smallest cluster size - 1");
    }
    if (!(p_fail >= 0.0 && p_fail < 1.0)) {
        throw ConfigError("topology", 0, "p_fail must lie in [0, 1)");
    }
}

std::vector<int> ClusterDigraph::out_degrees() const {
    std::vector<int> d(vertices.size(), 0);
    for (const auto& [u, v] : edges) {
        (void)v;
        ++d[u];
    }
    return d;
}

std::vector<int> ClusterDigraph::in_degrees() const {
    std::vector<int> d(vertices.size(), 0);
    for (const auto& [u, v] : edges) {
        (void)u;
        ++d[v];
    }
    return d;
}

void ClusterDigraph::validate() const {
    const int s = size();
    if (s < 2) throw InvariantViolation("cluster must have >= 2 vertices");
    for (std::size_t i = 1; i < edges.size(); ++i) {
        if (!(edges[i - 1] < edges[i])) {
            throw InvariantViolation("edges must be sorted and unique");
        }
    }
    for (const auto& [u, v] : edges) {
        if (u < 0 || u >= s || v < 0 || v >= s) {
            throw InvariantViolation("edge endpoint out of range");
        }
        if (u == v) throw InvariantViolation("self-loops are not allowed");
    }
    for (int d : out_degrees()) {
        if (d < 1) throw InvariantViolation("every vertex needs out-degree >= 1");
    }
}

ClusterDigraph make_relabeled_circulant(int n_l, int k, int first_global_id,
                                        int cluster_id, long round,
                                        std::uint64_t seed) {
    if (n_l < 2 || k < 1 || k > n_l - 1) {
        throw InvariantViolation("circulant requires 1 <= k <= n_l - 1");
    }
    RngStream rs(seed, StreamKind::topology_relabel,
                 static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(cluster_id));
    std::vector<int> perm(n_l);
    std::iota(perm.begin(), perm.end(), 0);
    for (int i = 0; i < n_l - 1; ++i) {
        const int j = i + static_cast<int>(rs.next_below(static_cast<std::uint64_t>(n_l - i)));
        std::swap(perm[i], perm[j]);
    }
    ClusterDigraph g;
    g.cluster_id = cluster_id;
    g.round = round;
    g.vertices.resize(n_l);
    for (int i = 0; i < n_l; ++i) g.vertices[i] = first_global_id + i;
    g.edges.reserve(static_cast<std::size_t>(n_l) * k);
    for (int i = 0; i < n_l; ++i) {
        for (int j = 1; j <= k; ++j) {
            g.edges.emplace_back(perm[i], perm[(i + j) % n_l]);
        }
    }
    std::sort(g.edges.begin(), g.edges.end());
    g.validate();
    return g;
}

ClusterDigraph generate_regular_cluster(const TopologyConfig& cfg, int cluster_id,
                                        long round) {
    cfg.validate();
    int first = 0;
    for (int l = 0; l < cluster_id; ++l) first += cfg.cluster_sizes[l];
    RngStream shape(cfg.seed, StreamKind::topology_shape,
                    static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(cluster_id));
    const int span = cfg.k_max - cfg.k_min + 1;
    const int k = cfg.k_min + static_cast<int>(shape.next_below(static_cast<std::uint64_t>(span)));
    return make_relabeled_circulant(cfg.cluster_sizes[cluster_id], k, first, cluster_id,
                                    round, cfg.seed);
}

namespace {

// Adjacency in sorted-vector form; rebuilt edge list stays canonical.
std::vector<std::vector<int>> adjacency(const ClusterDigraph& g) {
    std::vector<std::vector<int>> adj(g.vertices.size());
    for (const auto& [u, v] : g.edges) adj[u].push_back(v);
    return adj;  // sorted because edges are sorted
}

void remove_arc(std::vector<std::vector<int>>& adj, int u, int v) {
    auto& row = adj[u];
    const auto it = std::find(row.begin(), row.end(), v);
    if (it == row.end()) throw InvariantViolation("removing a missing edge");
    row.erase(it);
}

int plain_deletion(std::vector<std::vector<int>>& adj, int target, RngStream& rs) {
    int removed = 0;
    while (removed < target) {
        // Eligible edges: source keeps out-degree >= 1 after removal.
        std::vector<std::pair<int, int>> eligible;
        for (int u = 0; u < static_cast<int>(adj.size()); ++u) {
            if (adj[u].size() < 2) continue;
            for (int v : adj[u]) eligible.emplace_back(u, v);
        }
        if (eligible.empty()) break;
        const auto pick = eligible[rs.next_below(eligible.size())];
        remove_arc(adj, pick.first, pick.second);
        ++removed;
    }
    return removed;
}

int balanced_deletion(std::vector<std::vector<int>>& adj, int target, RngStream& rs) {
    const int n = static_cast<int>(adj.size());
    int removed = 0;
    // Each accepted cycle keeps in==out balance at every vertex; bounded
    // random-walk attempts, shortfall on exhaustion.
    const int max_attempts = 400 + 100 * target;
    for (int attempt = 0; attempt < max_attempts && removed < target; ++attempt) {
        const int remaining = target - removed;
        if (remaining < 2) break;  // a simple directed cycle has >= 2 edges
        std::vector<int> path;
        std::vector<int> pos(n, -1);
        int cur = static_cast<int>(rs.next_below(static_cast<std::uint64_t>(n)));
        path.push_back(cur);
        pos[cur] = 0;
        std::vector<int> cycle;
        for (int step = 0; step < 3 * n; ++step) {
            const auto& nbrs = adj[cur];
            if (nbrs.empty()) break;
            const int nxt = nbrs[rs.next_below(nbrs.size())];
            if (pos[nxt] >= 0) {
                cycle.assign(path.begin() + pos[nxt], path.end());
                break;
            }
            path.push_back(nxt);
            pos[nxt] = static_cast<int>(path.size()) - 1;
            cur = nxt;
        }
        if (cycle.empty()) continue;
        const int len = static_cast<int>(cycle.size());
        if (len > remaining) continue;
        if (remaining - len == 1) continue;  // would strand a 1-edge budget
        bool ok = true;
        for (int v : cycle) {
            if (adj[v].size() < 2) {
                ok = false;
                break;
            }
        }
        if (!ok) continue;
        for (int i = 0; i < len; ++i) {
            remove_arc(adj, cycle[i], cycle[(i + 1) % len]);
        }
        removed += len;
    }
    return removed;
}

}  // namespace

std::pair<ClusterDigraph, DeletionOutcome> delete_edges(const ClusterDigraph& g,
                                                        double p_fail,
                                                        bool balanced_mode,
                                                        std::uint64_t seed) {
    g.validate();
    if (!(p_fail >= 0.0 && p_fail < 1.0)) {
        throw InvariantViolation("p_fail must lie in [0, 1)");
    }
    DeletionOutcome outcome;
    outcome.requested = static_cast<int>(p_fail * static_cast<double>(g.edges.size()));
    ClusterDigraph out = g;
    if (outcome.requested == 0) return {out, outcome};

    RngStream rs(seed, StreamKind::topology_delete,
                 static_cast<std::uint64_t>(g.round), static_cast<std::uint64_t>(g.cluster_id));
    auto adj = adjacency(g);
    outcome.removed = balanced_mode ? balanced_deletion(adj, outcome.requested, rs)
                                    : plain_deletion(adj, outcome.requested, rs);
    outcome.shortfall = outcome.requested - outcome.removed;

    out.edges.clear();
    for (int u = 0; u < static_cast<int>(adj.size()); ++u) {
        for (int v : adj[u]) out.edges.emplace_back(u, v);
    }
    std::sort(out.edges.begin(), out.edges.end());
    out.validate();
    return {out, outcome};
}

DegreeSummary degree_summary(const ClusterDigraph& g) {
    g.validate();
    const auto douts = g.out_degrees();
    const auto dins = g.in_degrees();
    DegreeSummary ds;
    ds.n_l = g.size();
    ds.d_out_min = *std::min_element(douts.begin(), douts.end());
    ds.d_out_max = *std::max_element(douts.begin(), douts.end());
    ds.d_in_max = *std::max_element(dins.begin(), dins.end());
    ds.degree_balanced = true;
    for (int i = 0; i < ds.n_l; ++i) {
        if (douts[i] != dins[i]) {
            ds.degree_balanced = false;
            break;
        }
    }
    ds.alpha = static_cast<double>(ds.d_out_min) / ds.n_l;
    ds.eps = static_cast<double>(ds.d_out_max - ds.d_out_min) / ds.d_out_min;
    // max in-degree >= average degree >= min out-degree, so varphi >= 0.
    if (ds.d_in_max < ds.d_out_min) {
        throw InvariantViolation("degree accounting broke: d_in_max < d_out_min");
    }
    ds.varphi = static_cast<double>(ds.d_in_max - ds.d_out_min) / ds.d_out_min;
    ds.alpha_minus = 1.0 / ds.alpha - 1.0;
    ds.eps_net = ds.varphi + ds.eps / ds.alpha;
    return ds;
}

Mat equal_neighbor_matrix(const ClusterDigraph& g) {
    g.validate();
    const int s = g.size();
    const auto douts = g.out_degrees();
    Mat a(s, s);
    for (const auto& [u, v] : g.edges) {
        a(v, u) = 1.0 / static_cast<double>(douts[u]);
    }
    return a;
}

std::vector<ClusterDigraph> assemble_network(const TopologyConfig& cfg, long round) {
    cfg.validate();
    std::vector<ClusterDigraph> clusters;
    clusters.reserve(cfg.c);
    for (int l = 0; l < cfg.c; ++l) {
        ClusterDigraph g = generate_regular_cluster(cfg, l, round);
        auto [pruned, outcome] = delete_edges(g, cfg.p_fail, cfg.balanced_mode, cfg.seed);
        (void)outcome;  // shortfall is observable via degree summaries
        clusters.push_back(std::move(pruned));
    }
    return clusters;
}

bool strongly_connected(const ClusterDigraph& g) {
    g.validate();
    const int s = g.size();
    std::vector<std::vector<int>> fwd(s), rev(s);
    for (const auto& [u, v] : g.edges) {
        fwd[u].push_back(v);
        rev[v].push_back(u);
    }
    const auto reaches_all = [s](const std::vector<std::vector<int>>& adj) {
        std::vector<char> seen(s, 0);
        std::vector<int> stack{0};
        seen[0] = 1;
        int count = 1;
        while (!stack.empty()) {
            const int u = stack.back();
            stack.pop_back();
            for (int v : adj[u]) {
                if (!seen[v]) {
                    seen[v] = 1;
                    ++count;
                    stack.push_back(v);
                }
            }
        }
        return count == s;
    };
    return reaches_all(fwd) && reaches_all(rev);
}

void write_edge_list(std::ostream& out, const ClusterDigraph& g) {
    g.validate();
    out << "cluster " << g.cluster_id << " round " << g.round << " n " << g.size() << "\n";
    for (const auto& [u, v] : g.edges) {
        out << g.vertices[u] << " " << g.vertices[v] << "\n";
    }
}

ClusterDigraph read_edge_list(std::istream& in, const std::string& source_name) {
    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw ConfigError(source_name, 1, "empty edge-list file");
    ++line_no;
    std::istringstream header(line);
    std::string w_cluster, w_round, w_n;
    ClusterDigraph g;
    int n_l = 0;
    if (!(header >> w_cluster >> g.cluster_id >> w_round >> g.round >> w_n >> n_l) ||
        w_cluster != "cluster" || w_round != "round" || w_n != "n") {
        throw ConfigError(source_name, line_no,
                          "expected header `cluster <id> round <t> n <n_l>`");
    }
    if (n_l < 2) throw ConfigError(source_name, line_no, "cluster size must be >= 2");

    std::vector<std::pair<int, int>> global_edges;
    std::set<std::pair<int, int>> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream row(line);
        int a = 0, b = 0;
        std::string extra;
        if (!(row >> a >> b) || (row >> extra)) {
            throw ConfigError(source_name, line_no, "expected `i j` edge line");
        }
        if (a == b) {
            throw ConfigError(source_name, line_no,
                              "self-loop on vertex " + std::to_string(a));
        }
        if (!seen.insert({a, b}).second) {
            throw ConfigError(source_name, line_no, "duplicate edge");
        }
        global_edges.emplace_back(a, b);
    }
    if (global_edges.empty()) throw ConfigError(source_name, line_no, "no edges listed");

    // Vertex set = sorted distinct endpoints; must match the declared size.
    std::vector<int> ids;
    ids.reserve(global_edges.size() * 2);
    for (const auto& [a, b] : global_edges) {
        ids.push_back(a);
        ids.push_back(b);
    }
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    if (static_cast<int>(ids.size()) != n_l) {
        throw ConfigError(source_name, 1,
                          "header declares n=" + std::to_string(n_l) + " but edges touch " +
                              std::to_string(ids.size()) + " vertices");
    }
    g.vertices = ids;
    const auto local_of = [&ids, &source_name](int id) {
        const auto it = std::lower_bound(ids.begin(), ids.end(), id);
        if (it == ids.end() || *it != id) {
            throw ConfigError(source_name, 0, "unknown vertex id " + std::to_string(id));
        }
        return static_cast<int>(it - ids.begin());
    };
    g.edges.reserve(global_edges.size());
    for (const auto& [a, b] : global_edges) {
        g.edges.emplace_back(local_of(a), local_of(b));
    }
    std::sort(g.edges.begin(), g.edges.end());
    try {
        g.validate();
    } catch (const InvariantViolation& e) {
        throw ConfigError(source_name, 0, e.what());
    }
    return g;
}

}  // namespace cafl
