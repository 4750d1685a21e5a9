#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "spanseq/distance.hpp"
#include "spanseq/error.hpp"
#include "spanseq/sketch.hpp"
#include "spanseq/union_find.hpp"

namespace spanseq {

struct Cluster {
    std::uint32_t cluster_id = 0;
    std::vector<std::uint32_t> members;  // ascending record indices
    std::uint64_t size = 0;
    std::map<std::string, std::uint64_t> label_counts;  // empty without labels

    bool operator==(const Cluster&) const = default;
};

// DBSCAN with minPoints = 1 is single linkage, so min_points is not configurable.
struct ClusteringParams {
    double epsilon = 0.05;
    static constexpr int min_points = 1;
    std::optional<double> hobohm_threshold;
    enum class HobohmOrder : std::uint8_t { InputOrder, LongestFirst } hobohm_order = HobohmOrder::LongestFirst;
};

using HobohmOrder = ClusteringParams::HobohmOrder;

// Connected components of the graph on 0..n-1. Cluster ids follow the smallest member,
// so cluster i has a smaller first member than cluster i + 1.
inline std::vector<Cluster> threshold_components(std::size_t n, std::span<const DistanceEdge> edges) {
    UnionFind<std::uint32_t> uf(n);
    for (const auto& e : edges) {
        if (e.i >= n || e.j >= n) {
            throw Error(ErrorKind::IndexOutOfRange, "edge (" + std::to_string(e.i) + ", " + std::to_string(e.j) +
                                                        ") outside " + std::to_string(n) + " records");
        }
        uf.unite(e.i, e.j);
    }
    std::vector<std::uint32_t> root_to_cluster(n, UINT32_MAX);
    std::vector<Cluster> clusters;
    for (std::uint32_t v = 0; v < n; ++v) {
        const auto root = uf.find(v);
        if (root_to_cluster[root] == UINT32_MAX) {
            root_to_cluster[root] = static_cast<std::uint32_t>(clusters.size());
            clusters.push_back(Cluster{static_cast<std::uint32_t>(clusters.size()), {}, 0, {}});
        }
        auto& c = clusters[root_to_cluster[root]];
        c.members.push_back(v);
        ++c.size;
    }
    return clusters;
}

struct HobohmResult {
    std::vector<std::uint32_t> representatives;  // in the order they were founded
    std::vector<std::uint32_t> assignment;       // record -> representative record
};

// Greedy Hobohm 1: each record joins the first representative (in founding order) closer
// than threshold, else founds a new one. LongestFirst scans by descending valid k-mer count,
// ties by input order.
inline HobohmResult hobohm1_reduce(std::span<const KmerSketch> sketches, DistanceMeasure measure,
                                   const SketchScheme& scheme, double threshold, HobohmOrder order) {
    if (!(threshold > 0.0 && threshold <= 1.0)) throw Error(ErrorKind::Config, "Hobohm threshold must be in (0, 1]");
    const std::size_t n = sketches.size();
    std::vector<std::uint32_t> scan(n);
    std::iota(scan.begin(), scan.end(), 0U);
    if (order == HobohmOrder::LongestFirst) {
        std::stable_sort(scan.begin(), scan.end(), [&](std::uint32_t a, std::uint32_t b) {
            return sketches[a].total_kmers > sketches[b].total_kmers;
        });
    }
    HobohmResult result;
    result.assignment.assign(n, UINT32_MAX);
    for (auto r : scan) {
        std::uint32_t rep = r;
        for (auto candidate : result.representatives) {
            if (distance(sketches[r], sketches[candidate], measure, scheme) < threshold) {
                rep = candidate;
                break;
            }
        }
        if (rep == r) result.representatives.push_back(r);
        result.assignment[r] = rep;
    }
    return result;
}

struct ClusteringResult {
    std::vector<Cluster> clusters;
    std::vector<DistanceEdge> edges;  // over record indices, representatives only with Hobohm
    std::optional<HobohmResult> hobohm;
};

inline void tally_labels(std::vector<Cluster>& clusters, std::span<const std::string> labels) {
    if (labels.empty()) return;
    for (auto& c : clusters) {
        c.label_counts.clear();
        for (auto m : c.members) ++c.label_counts[labels[m]];
    }
}

// Single-linkage clusters of all records, optionally after collapsing records onto Hobohm
// representatives. Pass labels (one per record) to fill label_counts.
inline ClusteringResult clusters_from_pipeline(std::span<const KmerSketch> sketches, DistanceMeasure measure,
                                               const SketchScheme& scheme, const ClusteringParams& params,
                                               std::span<const std::string> labels = {},
                                               const EdgeOptions& edge_options = {}) {
    if (!labels.empty() && labels.size() != sketches.size()) throw Error(ErrorKind::Internal, "label count mismatch");
    ClusteringResult result;
    if (!params.hobohm_threshold) {
        result.edges = all_pairs_edges(sketches, measure, scheme, params.epsilon, edge_options);
        result.clusters = threshold_components(sketches.size(), result.edges);
        tally_labels(result.clusters, labels);
        return result;
    }

    auto hob = hobohm1_reduce(sketches, measure, scheme, *params.hobohm_threshold, params.hobohm_order);
    std::vector<std::uint32_t> reps = hob.representatives;
    std::sort(reps.begin(), reps.end());
    std::vector<KmerSketch> rep_sketches;
    rep_sketches.reserve(reps.size());
    for (auto r : reps) rep_sketches.push_back(sketches[r]);
    auto rep_edges = all_pairs_edges(rep_sketches, measure, scheme, params.epsilon, edge_options);

    UnionFind<std::uint32_t> uf(sketches.size());
    for (std::uint32_t r = 0; r < sketches.size(); ++r) uf.unite(r, hob.assignment[r]);
    for (auto& e : rep_edges) {
        e.i = reps[e.i];
        e.j = reps[e.j];
        uf.unite(e.i, e.j);
    }
    std::vector<DistanceEdge> collapsed;
    collapsed.reserve(sketches.size());
    for (std::uint32_t r = 0; r < sketches.size(); ++r) {
        const auto root = uf.find(r);
        if (root != r) collapsed.push_back({std::min(r, root), std::max(r, root), 0.0});
    }
    result.clusters = threshold_components(sketches.size(), collapsed);
    tally_labels(result.clusters, labels);
    result.edges = std::move(rep_edges);
    result.hobohm = std::move(hob);
    return result;
}

// "seq_id<TAB>cluster_id" in record order.
inline void write_clusters_tsv(std::ostream& out, std::span<const Cluster> clusters, std::span<const std::string> ids) {
    std::vector<std::uint32_t> of(ids.size(), UINT32_MAX);
    for (const auto& c : clusters) {
        for (auto m : c.members) of[m] = c.cluster_id;
    }
    for (std::size_t r = 0; r < ids.size(); ++r) {
        if (of[r] == UINT32_MAX) throw Error(ErrorKind::Internal, "record '" + ids[r] + "' is in no cluster");
        out << ids[r] << '\t' << of[r] << '\n';
    }
}

// Reads "seq_id<TAB>cluster_id" rows against a known id order; every id must appear once.
inline std::vector<Cluster> read_clusters_tsv(std::string_view text, std::span<const std::string> ids) {
    std::map<std::string_view, std::uint32_t> index;
    for (std::uint32_t r = 0; r < ids.size(); ++r) index.emplace(ids[r], r);
    std::map<std::uint64_t, std::vector<std::uint32_t>> groups;
    std::vector<bool> seen(ids.size(), false);
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty() || line.front() == '#') continue;
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos) throw Error(ErrorKind::Format, "bad cluster row");
        auto it = index.find(line.substr(0, tab));
        if (it == index.end()) throw Error(ErrorKind::Format, "unknown sequence '" + std::string(line.substr(0, tab)) + "'");
        if (seen[it->second]) throw Error(ErrorKind::DuplicateId, std::string(it->first));
        seen[it->second] = true;
        groups[std::stoull(std::string(line.substr(tab + 1)))].push_back(it->second);
    }
    for (std::size_t r = 0; r < ids.size(); ++r) {
        if (!seen[r]) throw Error(ErrorKind::Format, "sequence '" + ids[r] + "' missing from cluster file");
    }
    // Renumber by smallest member, matching threshold_components.
    std::vector<Cluster> clusters;
    for (auto& [id, members] : groups) {
        std::sort(members.begin(), members.end());
        clusters.push_back(Cluster{0, std::move(members), 0, {}});
    }
    std::sort(clusters.begin(), clusters.end(), [](const Cluster& a, const Cluster& b) { return a.members[0] < b.members[0]; });
    for (std::uint32_t c = 0; c < clusters.size(); ++c) {
        clusters[c].cluster_id = c;
        clusters[c].size = clusters[c].members.size();
    }
    return clusters;
}

}  // namespace spanseq
