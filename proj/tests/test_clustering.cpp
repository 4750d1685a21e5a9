#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "spanseq/clustering.hpp"
#include "support/synthetic.hpp"

namespace spanseq {
namespace {

SequenceRecord dna(std::string residues) { return SequenceRecord{"r", Alphabet::Nucleotide, std::move(residues)}; }

ClusteringParams at_epsilon(double eps) {
    ClusteringParams p;
    p.epsilon = eps;
    return p;
}

std::vector<std::vector<std::uint32_t>> member_lists(const std::vector<Cluster>& clusters) {
    std::vector<std::vector<std::uint32_t>> out;
    for (const auto& c : clusters) out.push_back(c.members);
    return out;
}

TEST(UnionFind, BasicOperations) {
    UnionFind<std::uint32_t> uf(6);
    EXPECT_TRUE(uf.unite(0, 1));
    EXPECT_TRUE(uf.unite(2, 3));
    EXPECT_FALSE(uf.unite(1, 0));
    EXPECT_TRUE(uf.unite(1, 3));
    EXPECT_TRUE(uf.connected(0, 2));
    EXPECT_FALSE(uf.connected(0, 4));
    EXPECT_EQ(uf.set_size(3), 4U);
    EXPECT_EQ(uf.set_size(5), 1U);
}

TEST(ThresholdComponents, NoEdgesGivesSingletons) {
    const auto clusters = threshold_components(3, {});
    ASSERT_EQ(clusters.size(), 3U);
    for (std::uint32_t i = 0; i < 3; ++i) {
        EXPECT_EQ(clusters[i].cluster_id, i);
        EXPECT_EQ(clusters[i].members, std::vector<std::uint32_t>{i});
        EXPECT_EQ(clusters[i].size, 1U);
    }
}

TEST(ThresholdComponents, SingleLinkageChains) {
    const std::vector<DistanceEdge> edges{{0, 1, 0.2}, {1, 2, 0.2}};
    const auto clusters = threshold_components(3, edges);
    ASSERT_EQ(clusters.size(), 1U);
    EXPECT_EQ(clusters[0].members, (std::vector<std::uint32_t>{0, 1, 2}));
}

TEST(ThresholdComponents, IdsFollowSmallestMember) {
    const std::vector<DistanceEdge> edges{{3, 4, 0.0}, {0, 5, 0.0}, {1, 2, 0.0}};
    const auto clusters = threshold_components(6, edges);
    EXPECT_EQ(member_lists(clusters), (std::vector<std::vector<std::uint32_t>>{{0, 5}, {1, 2}, {3, 4}}));
}

TEST(ThresholdComponents, OutOfRangeEdge) {
    const std::vector<DistanceEdge> edges{{0, 3, 0.0}};
    try {
        threshold_components(3, edges);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IndexOutOfRange);
    }
}

TEST(ThresholdComponents, MatchesFloodFillOnRandomGraphs) {
    std::mt19937_64 rng(1234);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng() % 200;
        const double density = std::uniform_real_distribution<double>(0.0, 3.0)(rng) / static_cast<double>(n);
        std::bernoulli_distribution keep(density);
        std::vector<DistanceEdge> edges;
        std::vector<std::pair<std::size_t, std::size_t>> plain;
        for (std::uint32_t i = 0; i < n; ++i) {
            for (std::uint32_t j = i + 1; j < n; ++j) {
                if (keep(rng)) {
                    edges.push_back({i, j, 0.01});
                    plain.emplace_back(i, j);
                }
            }
        }
        const auto clusters = threshold_components(n, edges);
        const auto oracle = testing::flood_fill_components(n, plain);
        std::vector<std::size_t> got(n);
        for (const auto& c : clusters) {
            for (auto m : c.members) got[m] = c.cluster_id;
        }
        EXPECT_EQ(got, oracle) << "trial " << trial;
    }
}

TEST(Hobohm1, IdenticalSequencesCollapse) {
    const SketchScheme scheme{SketchKind::MinHashBottomS, 12, 100, true, kDefaultSeed};
    std::mt19937_64 rng(1);
    const auto seq = testing::random_dna(rng, 300);
    const auto sketches = sketch_all(std::vector<SequenceRecord>{dna(seq), dna(seq)}, scheme);
    const auto res = hobohm1_reduce(sketches, DistanceMeasure::Mash, scheme, 0.001, HobohmOrder::InputOrder);
    EXPECT_EQ(res.representatives, std::vector<std::uint32_t>{0});
    EXPECT_EQ(res.assignment, (std::vector<std::uint32_t>{0, 0}));
}

TEST(Hobohm1, DistantRecordsAreAllRepresentatives) {
    const SketchScheme scheme{SketchKind::MinHashBottomS, 14, 100, true, kDefaultSeed};
    std::mt19937_64 rng(2);
    std::vector<SequenceRecord> records;
    for (int i = 0; i < 10; ++i) records.push_back(dna(testing::random_dna(rng, 300)));
    const auto res = hobohm1_reduce(sketch_all(records, scheme), DistanceMeasure::Mash, scheme, 0.1, HobohmOrder::InputOrder);
    EXPECT_EQ(res.representatives.size(), 10U);
    for (std::uint32_t i = 0; i < 10; ++i) EXPECT_EQ(res.assignment[i], i);
}

TEST(Hobohm1, IsNotTransitive) {
    // Exact-set Jaccard distances with 20-element sets: d(A,B) = d(B,C) = 1 - 19/21 ~ 0.095,
    // d(A,C) = 1 - 18/22 ~ 0.18.
    std::vector<std::uint64_t> a, b, c;
    for (std::uint64_t h = 0; h < 20; ++h) a.push_back(h);
    for (std::uint64_t h = 1; h < 21; ++h) b.push_back(h);
    for (std::uint64_t h = 2; h < 22; ++h) c.push_back(h);
    const std::vector<KmerSketch> sketches{{0, a, {}, 20}, {1, b, {}, 20}, {2, c, {}, 20}};
    const SketchScheme exact{SketchKind::Prefix, 5, 0, true, kDefaultSeed};
    ASSERT_LT(distance(sketches[0], sketches[1], DistanceMeasure::Jaccard, exact), 0.1);
    ASSERT_LT(distance(sketches[1], sketches[2], DistanceMeasure::Jaccard, exact), 0.1);
    ASSERT_GE(distance(sketches[0], sketches[2], DistanceMeasure::Jaccard, exact), 0.1);

    const auto res = hobohm1_reduce(sketches, DistanceMeasure::Jaccard, exact, 0.1, HobohmOrder::InputOrder);
    EXPECT_EQ(res.representatives, (std::vector<std::uint32_t>{0, 2}));
    EXPECT_EQ(res.assignment, (std::vector<std::uint32_t>{0, 0, 2}));

    // Single linkage at the same threshold chains all three.
    const auto edges = all_pairs_edges(sketches, DistanceMeasure::Jaccard, exact, 0.1);
    EXPECT_EQ(threshold_components(3, edges).size(), 1U);
}

TEST(Hobohm1, LongestFirstScansLongRecordsFirst) {
    std::vector<std::uint64_t> a, b;
    for (std::uint64_t h = 0; h < 10; ++h) a.push_back(h);
    for (std::uint64_t h = 0; h < 11; ++h) b.push_back(h);
    const std::vector<KmerSketch> sketches{{0, a, {}, 10}, {1, b, {}, 11}};
    const SketchScheme exact{SketchKind::Prefix, 5, 0, true, kDefaultSeed};
    const auto res = hobohm1_reduce(sketches, DistanceMeasure::Jaccard, exact, 0.2, HobohmOrder::LongestFirst);
    EXPECT_EQ(res.representatives, std::vector<std::uint32_t>{1});
    EXPECT_EQ(res.assignment, (std::vector<std::uint32_t>{1, 1}));
}

TEST(ClustersFromPipeline, NoEdgesNoHobohm) {
    const SketchScheme scheme{SketchKind::MinHashBottomS, 14, 100, true, kDefaultSeed};
    std::mt19937_64 rng(3);
    std::vector<SequenceRecord> records;
    for (int i = 0; i < 3; ++i) records.push_back(dna(testing::random_dna(rng, 200)));
    const auto res = clusters_from_pipeline(sketch_all(records, scheme), DistanceMeasure::Mash, scheme, at_epsilon(0.05));
    ASSERT_EQ(res.clusters.size(), 3U);
    for (const auto& c : res.clusters) EXPECT_EQ(c.size, 1U);
}

TEST(ClustersFromPipeline, HobohmCollapsesDuplicates) {
    const SketchScheme scheme{SketchKind::MinHashBottomS, 14, 100, true, kDefaultSeed};
    std::mt19937_64 rng(4);
    const auto seq = testing::random_dna(rng, 400);
    std::vector<SequenceRecord> records(10, dna(seq));
    records.push_back(dna(testing::random_dna(rng, 400)));
    records.push_back(dna(testing::random_dna(rng, 400)));
    auto params = at_epsilon(0.05);
    params.hobohm_threshold = 0.01;
    const auto res = clusters_from_pipeline(sketch_all(records, scheme), DistanceMeasure::Mash, scheme, params);
    ASSERT_TRUE(res.hobohm);
    EXPECT_EQ(res.hobohm->representatives.size(), 3U);
    std::vector<std::uint64_t> sizes;
    for (const auto& c : res.clusters) sizes.push_back(c.size);
    EXPECT_EQ(sizes, (std::vector<std::uint64_t>{10, 1, 1}));
    EXPECT_EQ(res.clusters[0].members.size(), 10U);
}

TEST(ClustersFromPipeline, LabelCounts) {
    const SketchScheme scheme{SketchKind::MinHashBottomS, 14, 100, true, kDefaultSeed};
    std::mt19937_64 rng(5);
    const auto seq = testing::random_dna(rng, 300);
    std::vector<SequenceRecord> records(3, dna(seq));
    const std::vector<std::string> labels{"a", "a", "b"};
    const auto res = clusters_from_pipeline(sketch_all(records, scheme), DistanceMeasure::Mash, scheme, at_epsilon(0.05), labels);
    ASSERT_EQ(res.clusters.size(), 1U);
    EXPECT_EQ(res.clusters[0].label_counts, (std::map<std::string, std::uint64_t>{{"a", 2}, {"b", 1}}));
}

TEST(ClustersFromPipeline, PartitionSeparationAndChaining) {
    const auto fam = testing::planted_families(77, 30, 6, 800, 0.05);
    std::vector<SequenceRecord> records;
    for (const auto& s : fam.sequences) records.push_back(dna(s));
    const SketchScheme scheme{SketchKind::MinHashBottomS, 15, 256, true, kDefaultSeed};
    const auto sketches = sketch_all(records, scheme);
    const double eps = 0.1;
    const auto res = clusters_from_pipeline(sketches, DistanceMeasure::Mash, scheme, at_epsilon(eps));

    std::vector<std::size_t> of(records.size(), SIZE_MAX);
    for (const auto& c : res.clusters) {
        ASSERT_FALSE(c.members.empty());
        EXPECT_TRUE(std::is_sorted(c.members.begin(), c.members.end()));
        for (auto m : c.members) {
            EXPECT_EQ(of[m], SIZE_MAX);
            of[m] = c.cluster_id;
        }
    }
    for (auto v : of) EXPECT_NE(v, SIZE_MAX);
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (std::size_t j = i + 1; j < records.size(); ++j) {
            if (of[i] != of[j]) {
                EXPECT_GE(distance(sketches[i], sketches[j], DistanceMeasure::Mash, scheme), eps);
            }
        }
    }
    // Chaining: each cluster is connected through its own edges.
    for (const auto& c : res.clusters) {
        std::vector<DistanceEdge> inner;
        std::map<std::uint32_t, std::uint32_t> local;
        for (auto m : c.members) local.emplace(m, static_cast<std::uint32_t>(local.size()));
        for (const auto& e : res.edges) {
            if (local.contains(e.i) && local.contains(e.j)) inner.push_back({local[e.i], local[e.j], e.d});
        }
        EXPECT_EQ(threshold_components(c.members.size(), inner).size(), 1U);
    }
    // Deterministic across thread counts.
    const auto again = clusters_from_pipeline(sketches, DistanceMeasure::Mash, scheme, at_epsilon(eps), {}, {8, false});
    EXPECT_EQ(again.clusters, res.clusters);
}

TEST(ClustersTsv, WriteAndReadBack) {
    const std::vector<std::string> ids{"a", "b", "c", "d"};
    const std::vector<DistanceEdge> edges{{0, 3, 0.0}};
    const auto clusters = threshold_components(4, edges);
    std::ostringstream out;
    write_clusters_tsv(out, clusters, ids);
    EXPECT_EQ(out.str(), "a\t0\nb\t1\nc\t2\nd\t0\n");
    EXPECT_EQ(read_clusters_tsv(out.str(), ids), clusters);
    EXPECT_THROW(read_clusters_tsv("a\t0\nb\t1\n", ids), Error);
    EXPECT_THROW(read_clusters_tsv("a\t0\nb\t1\nc\t1\nd\t2\ne\t3\n", ids), Error);
}

}  // namespace
}  // namespace spanseq
