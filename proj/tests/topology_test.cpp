#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "cafl/errors.hpp"
#include "cafl/topology.hpp"

using namespace cafl;

namespace {

// Unlabeled circulant: i -> (i+j) mod n for j = 1..k, plus explicit extras.
ClusterDigraph plain_circulant(int n, int k,
                               std::vector<std::pair<int, int>> extra = {}) {
    ClusterDigraph g;
    g.cluster_id = 0;
    g.round = 0;
    for (int i = 0; i < n; ++i) g.vertices.push_back(i);
    for (int i = 0; i < n; ++i)
        for (int j = 1; j <= k; ++j) g.edges.emplace_back(i, (i + j) % n);
    for (auto e : extra) g.edges.push_back(e);
    std::sort(g.edges.begin(), g.edges.end());
    g.validate();
    return g;
}

TopologyConfig small_config() {
    TopologyConfig cfg;
    cfg.n = 20;
    cfg.c = 2;
    cfg.cluster_sizes = {10, 10};
    cfg.k_min = 4;
    cfg.k_max = 6;
    cfg.p_fail = 0.1;
    cfg.seed = 99;
    return cfg;
}

}  // namespace

TEST_SUITE("topology") {

TEST_CASE("relabeled circulant is k-regular in and out") {
    const auto g = make_relabeled_circulant(10, 6, 30, 3, 5, 77);
    g.validate();
    REQUIRE(g.size() == 10);
    CHECK(g.cluster_id == 3);
    CHECK(g.round == 5);
    for (int v : g.vertices) {
        CHECK(v >= 30);
        CHECK(v < 40);
    }
    for (int d : g.out_degrees()) CHECK(d == 6);
    for (int d : g.in_degrees()) CHECK(d == 6);
    CHECK(g.edges.size() == 60);
    CHECK(std::is_sorted(g.edges.begin(), g.edges.end()));
    CHECK(strongly_connected(g));
}

TEST_CASE("relabeling depends on the seed but not on scheduling") {
    const auto a = make_relabeled_circulant(10, 4, 0, 0, 2, 1001);
    const auto b = make_relabeled_circulant(10, 4, 0, 0, 2, 1001);
    CHECK(a.edges == b.edges);
    const auto c = make_relabeled_circulant(10, 4, 0, 0, 2, 1002);
    CHECK(a.edges != c.edges);
    const auto d = make_relabeled_circulant(10, 4, 0, 0, 3, 1001);
    CHECK(a.edges != d.edges);
}

TEST_CASE("generated cluster degree stays inside the configured range") {
    const auto cfg = small_config();
    for (long t = 0; t < 6; ++t) {
        for (int l = 0; l < cfg.c; ++l) {
            const auto g = generate_regular_cluster(cfg, l, t);
            const int k = g.out_degrees()[0];
            CHECK(k >= cfg.k_min);
            CHECK(k <= cfg.k_max);
            for (int dv : g.out_degrees()) CHECK(dv == k);
        }
    }
}

TEST_CASE("plain deletion removes the requested count and keeps senders alive") {
    const auto g = plain_circulant(10, 6);
    const auto [h, outcome] = delete_edges(g, 0.2, false, 4242);
    CHECK(outcome.requested == 12);
    CHECK(outcome.removed == 12);
    CHECK(outcome.shortfall == 0);
    CHECK(h.edges.size() == 48);
    h.validate();
    for (int d : h.out_degrees()) CHECK(d >= 1);
    // Survivors are a subset of the original edge set.
    std::set<std::pair<int, int>> orig(g.edges.begin(), g.edges.end());
    for (const auto& e : h.edges) CHECK(orig.count(e) == 1);
}

TEST_CASE("balanced deletion preserves per-vertex in == out") {
    const auto g = plain_circulant(10, 6);
    int full_removals = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto [h, outcome] = delete_edges(g, 0.2, true, seed);
        h.validate();
        CHECK(outcome.requested == 12);
        CHECK(outcome.removed + outcome.shortfall == 12);
        CHECK(static_cast<int>(h.edges.size()) == 60 - outcome.removed);
        const auto din = h.in_degrees();
        const auto dout = h.out_degrees();
        for (int v = 0; v < h.size(); ++v) CHECK(din[v] == dout[v]);
        if (outcome.removed == 12) ++full_removals;
    }
    // The budget is attainable on a dense circulant; most seeds reach it.
    CHECK(full_removals >= 1);
}

TEST_CASE("deletion with zero failure rate is the identity") {
    const auto g = plain_circulant(8, 3);
    const auto [h, outcome] = delete_edges(g, 0.0, false, 7);
    CHECK(outcome.requested == 0);
    CHECK(h.edges == g.edges);
}

TEST_CASE("degree summary of a regular graph") {
    const auto g = plain_circulant(10, 6);
    const auto ds = degree_summary(g);
    CHECK(ds.n_l == 10);
    CHECK(ds.d_out_min == 6);
    CHECK(ds.d_out_max == 6);
    CHECK(ds.d_in_max == 6);
    CHECK(ds.alpha == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(ds.eps == 0.0);
    CHECK(ds.varphi == 0.0);
    CHECK(ds.eps_net == 0.0);
    CHECK(ds.degree_balanced);
}

TEST_CASE("degree summary of an irregular graph") {
    // Two extra edges into vertex 9: out-degrees {7,7,6x8}, in max 8.
    const auto g = plain_circulant(10, 6, {{0, 9}, {1, 9}});
    const auto ds = degree_summary(g);
    CHECK(ds.d_out_min == 6);
    CHECK(ds.d_out_max == 7);
    CHECK(ds.d_in_max == 8);
    CHECK(ds.alpha == doctest::Approx(0.6).epsilon(1e-15));
    CHECK(ds.eps == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
    CHECK(ds.varphi == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(ds.eps_net == doctest::Approx(11.0 / 18.0).epsilon(1e-15));
    CHECK_FALSE(ds.degree_balanced);
}

TEST_CASE("equal-neighbor matrix is column stochastic") {
    const auto g = plain_circulant(10, 6, {{0, 9}, {1, 9}});
    const Mat a = equal_neighbor_matrix(g);
    const auto douts = g.out_degrees();
    REQUIRE(a.rows() == 10);
    REQUIRE(a.cols() == 10);
    for (int j = 0; j < 10; ++j) {
        double col = 0.0;
        for (int i = 0; i < 10; ++i) col += a(i, j);
        CHECK(col == doctest::Approx(1.0).epsilon(1e-14));
    }
    // Entry (i, j) is 1/out_degree(j) exactly when j -> i is an edge.
    std::set<std::pair<int, int>> edges(g.edges.begin(), g.edges.end());
    for (int j = 0; j < 10; ++j)
        for (int i = 0; i < 10; ++i) {
            const double want = edges.count({j, i}) ? 1.0 / douts[j] : 0.0;
            CHECK(a(i, j) == want);
        }
}

TEST_CASE("assembled network partitions the client ids") {
    const auto cfg = small_config();
    const auto clusters = assemble_network(cfg, 4);
    REQUIRE(clusters.size() == 2);
    std::set<int> seen;
    for (const auto& g : clusters) {
        g.validate();
        for (int v : g.vertices) seen.insert(v);
    }
    CHECK(seen.size() == 20);
    CHECK(*seen.begin() == 0);
    CHECK(*seen.rbegin() == 19);
    // Deterministic reassembly.
    const auto again = assemble_network(cfg, 4);
    for (std::size_t l = 0; l < clusters.size(); ++l) {
        CHECK(clusters[l].edges == again[l].edges);
        CHECK(clusters[l].vertices == again[l].vertices);
    }
}

TEST_CASE("strong connectivity detects a one-way appendix") {
    ClusterDigraph g;
    g.vertices = {0, 1, 2};
    g.edges = {{0, 1}, {1, 0}, {2, 0}};
    std::sort(g.edges.begin(), g.edges.end());
    CHECK_FALSE(strongly_connected(g));
    g.edges.push_back({1, 2});
    std::sort(g.edges.begin(), g.edges.end());
    CHECK(strongly_connected(g));
}

TEST_CASE("edge lists round-trip through the text format") {
    const auto g = make_relabeled_circulant(10, 5, 30, 3, 7, 555);
    std::ostringstream out;
    write_edge_list(out, g);
    std::istringstream in(out.str());
    const auto h = read_edge_list(in, "roundtrip");
    CHECK(h.cluster_id == g.cluster_id);
    CHECK(h.round == g.round);
    CHECK(h.vertices == g.vertices);
    CHECK(h.edges == g.edges);
}

TEST_CASE("malformed edge lists name the offending line") {
    const auto expect_line = [](const std::string& text, int line) {
        std::istringstream in(text);
        try {
            read_edge_list(in, "bad");
            FAIL("expected a parse error");
        } catch (const ConfigError& e) {
            CHECK(e.source() == "bad");
            CHECK(e.line() == line);
        }
    };
    expect_line("nonsense header\n", 1);
    expect_line("cluster 0 round 0 n 4\n0 1\n1 0\n", 1);       // size mismatch
    expect_line("cluster 0 round 0 n 3\n0 1\n1 1\n", 3);       // self loop
    expect_line("cluster 0 round 0 n 3\n0 1\n0 1\n2 0\n", 3);  // duplicate
    expect_line("cluster 0 round 0 n 3\n0 one\n", 2);          // bad token
    // A parseable file whose graph breaks the out-degree invariant still
    // fails, anchored to the whole file.
    std::istringstream orphan("cluster 0 round 0 n 3\n0 1\n0 2\n1 0\n");
    CHECK_THROWS_AS(read_edge_list(orphan, "orphan"), ConfigError);
}

TEST_CASE("configuration validation rejects inconsistent shapes") {
    auto cfg = small_config();
    cfg.cluster_sizes = {10, 9};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.k_max = 10;  // needs <= cluster size - 1
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = small_config();
    cfg.p_fail = 1.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

}  // TEST_SUITE
