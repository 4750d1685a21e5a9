#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spanseq/error.hpp"
#include "spanseq/parallel.hpp"
#include "spanseq/sketch.hpp"

namespace spanseq {

enum class DistanceMeasure : std::uint8_t { Mash, Jaccard, Cosine, InverseKmerCoverage, SzymkiewiczSimpson };

constexpr std::string_view to_string(DistanceMeasure m) noexcept {
    switch (m) {
        case DistanceMeasure::Mash: return "mash";
        case DistanceMeasure::Jaccard: return "jaccard";
        case DistanceMeasure::Cosine: return "cosine";
        case DistanceMeasure::InverseKmerCoverage: return "invcov";
        case DistanceMeasure::SzymkiewiczSimpson: return "overlap";
    }
    return "mash";
}

inline std::optional<DistanceMeasure> parse_measure(std::string_view name) {
    if (name == "mash") return DistanceMeasure::Mash;
    if (name == "jaccard") return DistanceMeasure::Jaccard;
    if (name == "cosine") return DistanceMeasure::Cosine;
    if (name == "invcov") return DistanceMeasure::InverseKmerCoverage;
    if (name == "overlap") return DistanceMeasure::SzymkiewiczSimpson;
    return std::nullopt;
}

// Amino acids only support Mash; cosine needs multiplicities.
inline void check_measure(DistanceMeasure measure, const SketchScheme& scheme, Alphabet alphabet) {
    if (alphabet == Alphabet::AminoAcid && measure != DistanceMeasure::Mash) {
        throw Error(ErrorKind::Config, "amino acid sequences only support the mash distance");
    }
    if (measure == DistanceMeasure::Cosine && !scheme.retains_counts()) {
        throw Error(ErrorKind::Config, "cosine distance needs k-mer counts (minimizer or prefix scheme)");
    }
}

struct DistanceEdge {
    std::uint32_t i = 0;
    std::uint32_t j = 0;  // i < j
    double d = 0.0;

    bool operator==(const DistanceEdge&) const = default;
};

// Set statistics of two sorted hash lists gathered in one merge.
struct SketchOverlap {
    std::size_t size_a = 0;
    std::size_t size_b = 0;
    std::size_t shared = 0;
    double dot = 0.0;
    double norm2_a = 0.0;
    double norm2_b = 0.0;
};

inline SketchOverlap overlap(const KmerSketch& a, const KmerSketch& b, bool with_counts = false) {
    SketchOverlap o;
    o.size_a = a.hashes.size();
    o.size_b = b.hashes.size();
    const auto* ha = a.hashes.data();
    const auto* hb = b.hashes.data();
    std::size_t i = 0, j = 0;
    std::size_t shared = 0;
    if (!with_counts) {
        while (i < o.size_a && j < o.size_b) {
            const auto x = ha[i], y = hb[j];
            shared += x == y;
            i += x <= y;
            j += y <= x;
        }
        o.shared = shared;
        return o;
    }
    auto ca = [&](std::size_t t) { return a.counts.empty() ? 1.0 : static_cast<double>(a.counts[t]); };
    auto cb = [&](std::size_t t) { return b.counts.empty() ? 1.0 : static_cast<double>(b.counts[t]); };
    for (std::size_t t = 0; t < o.size_a; ++t) o.norm2_a += ca(t) * ca(t);
    for (std::size_t t = 0; t < o.size_b; ++t) o.norm2_b += cb(t) * cb(t);
    while (i < o.size_a && j < o.size_b) {
        if (ha[i] < hb[j]) {
            ++i;
        } else if (hb[j] < ha[i]) {
            ++j;
        } else {
            ++shared;
            o.dot += ca(i) * cb(j);
            ++i;
            ++j;
        }
    }
    o.shared = shared;
    return o;
}

// Merged bottom-s estimator: X = the s smallest values of A u B; returns |X n A n B| / |X|.
inline double bottom_s_jaccard(const KmerSketch& a, const KmerSketch& b, std::size_t s) {
    const auto& ha = a.hashes;
    const auto& hb = b.hashes;
    std::size_t i = 0, j = 0, taken = 0, shared = 0;
    while (taken < s && (i < ha.size() || j < hb.size())) {
        if (j == hb.size() || (i < ha.size() && ha[i] < hb[j])) {
            ++i;
        } else if (i == ha.size() || hb[j] < ha[i]) {
            ++j;
        } else {
            ++shared;
            ++i;
            ++j;
        }
        ++taken;
    }
    return taken == 0 ? 0.0 : static_cast<double>(shared) / static_cast<double>(taken);
}

inline double exact_jaccard(const KmerSketch& a, const KmerSketch& b) {
    const auto o = overlap(a, b);
    const std::size_t uni = o.size_a + o.size_b - o.shared;
    return uni == 0 ? 0.0 : static_cast<double>(o.shared) / static_cast<double>(uni);
}

// Bottom-s schemes use the merged estimator; all other schemes compare the retained sets exactly.
inline double jaccard_estimate(const KmerSketch& a, const KmerSketch& b, const SketchScheme& scheme) {
    if (scheme.kind == SketchKind::MinHashBottomS) return bottom_s_jaccard(a, b, scheme.param);
    return exact_jaccard(a, b);
}

// D = -(1/k) ln(2j / (1 + j)), capped to [0, 1]; j = 0 maps to 1.
inline double mash_from_jaccard(double j, std::uint32_t k) {
    if (j <= 0.0) return 1.0;
    if (j >= 1.0) return 0.0;
    const double d = -std::log(2.0 * j / (1.0 + j)) / static_cast<double>(k);
    return std::clamp(d, 0.0, 1.0);
}

inline double mash_distance(const KmerSketch& a, const KmerSketch& b, const SketchScheme& scheme, std::uint32_t k) {
    if (k != scheme.k) throw Error(ErrorKind::SchemeMismatch, "mash k differs from the sketch k");
    return mash_from_jaccard(jaccard_estimate(a, b, scheme), k);
}

inline double jaccard_distance(const KmerSketch& a, const KmerSketch& b, const SketchScheme& scheme) {
    if (a.empty() && b.empty()) return 1.0;
    return std::clamp(1.0 - jaccard_estimate(a, b, scheme), 0.0, 1.0);
}

// Szymkiewicz-Simpson: 1 - |A n B| / min(|A|, |B|).
inline double overlap_distance(const KmerSketch& a, const KmerSketch& b) {
    const auto o = overlap(a, b);
    const std::size_t denom = std::min(o.size_a, o.size_b);
    if (denom == 0) return 1.0;
    return std::clamp(1.0 - static_cast<double>(o.shared) / static_cast<double>(denom), 0.0, 1.0);
}

// Inverse k-mer coverage: 1 - |A n B| / max(|A|, |B|).
inline double inv_coverage_distance(const KmerSketch& a, const KmerSketch& b) {
    const auto o = overlap(a, b);
    const std::size_t denom = std::max(o.size_a, o.size_b);
    if (denom == 0) return 1.0;
    return std::clamp(1.0 - static_cast<double>(o.shared) / static_cast<double>(denom), 0.0, 1.0);
}

inline double cosine_distance(const KmerSketch& a, const KmerSketch& b, const SketchScheme& scheme) {
    if (!scheme.retains_counts()) throw Error(ErrorKind::Config, "cosine distance needs k-mer counts");
    const auto o = overlap(a, b, true);
    if (o.norm2_a == 0.0 || o.norm2_b == 0.0) return 1.0;
    if (o.dot == o.norm2_a && o.dot == o.norm2_b) return 0.0;
    const double cos = o.dot / (std::sqrt(o.norm2_a) * std::sqrt(o.norm2_b));
    return std::clamp(1.0 - cos, 0.0, 1.0);
}

inline double distance(const KmerSketch& a, const KmerSketch& b, DistanceMeasure measure, const SketchScheme& scheme) {
    switch (measure) {
        case DistanceMeasure::Mash: return mash_distance(a, b, scheme, scheme.k);
        case DistanceMeasure::Jaccard: return jaccard_distance(a, b, scheme);
        case DistanceMeasure::Cosine: return cosine_distance(a, b, scheme);
        case DistanceMeasure::InverseKmerCoverage: return inv_coverage_distance(a, b);
        case DistanceMeasure::SzymkiewiczSimpson: return overlap_distance(a, b);
    }
    return 1.0;
}

struct EdgeOptions {
    unsigned threads = 1;
    // Debug mode: cluster on 1 - d instead of d.
    bool invert = false;
};

namespace detail {

// Hash -> ascending list of records containing it. Any pair sharing no hash is at
// distance 1 under every measure, so only pairs found here can form an edge.
struct PostingIndex {
    std::vector<std::uint64_t> keys;
    std::vector<std::size_t> offsets;  // keys.size() + 1
    std::vector<std::uint32_t> records;

    explicit PostingIndex(std::span<const KmerSketch> sketches) {
        std::vector<std::pair<std::uint64_t, std::uint32_t>> entries;
        std::size_t total = 0;
        for (const auto& s : sketches) total += s.hashes.size();
        entries.reserve(total);
        for (std::size_t r = 0; r < sketches.size(); ++r) {
            for (auto h : sketches[r].hashes) entries.emplace_back(h, static_cast<std::uint32_t>(r));
        }
        std::sort(entries.begin(), entries.end());
        records.reserve(entries.size());
        for (std::size_t t = 0; t < entries.size(); ++t) {
            if (t == 0 || entries[t].first != entries[t - 1].first) {
                keys.push_back(entries[t].first);
                offsets.push_back(t);
            }
            records.push_back(entries[t].second);
        }
        offsets.push_back(entries.size());
    }

    std::span<const std::uint32_t> postings(std::uint64_t hash) const {
        auto it = std::lower_bound(keys.begin(), keys.end(), hash);
        if (it == keys.end() || *it != hash) return {};
        const auto k = static_cast<std::size_t>(it - keys.begin());
        return {records.data() + offsets[k], offsets[k + 1] - offsets[k]};
    }
};

}  // namespace detail

// All pairs (i < j) with d(i, j) < epsilon, sorted by (i, j). Output does not depend on
// the thread count.
inline std::vector<DistanceEdge> all_pairs_edges(std::span<const KmerSketch> sketches, DistanceMeasure measure,
                                                 const SketchScheme& scheme, double epsilon,
                                                 const EdgeOptions& options = {}) {
    if (!(epsilon > 0.0 && epsilon <= 1.0)) throw Error(ErrorKind::Config, "epsilon must be in (0, 1]");
    if (measure == DistanceMeasure::Cosine && !scheme.retains_counts()) {
        throw Error(ErrorKind::Config, "cosine distance needs k-mer counts (minimizer or prefix scheme)");
    }
    if (sketches.size() > UINT32_MAX) throw Error(ErrorKind::Config, "too many records");
    const std::size_t n = sketches.size();
    const unsigned workers = worker_count(options.threads, n);
    std::vector<std::vector<DistanceEdge>> buffers(workers);

    auto keep = [&](double d) { return (options.invert ? 1.0 - d : d) < epsilon; };

    if (options.invert) {
        // Distance-1 pairs become edges, so every pair has to be visited.
        parallel_for(n, workers, [&](std::size_t i, unsigned w) {
            for (std::size_t j = i + 1; j < n; ++j) {
                const double d = distance(sketches[i], sketches[j], measure, scheme);
                if (keep(d)) buffers[w].push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), 1.0 - d});
            }
        });
    } else {
        const detail::PostingIndex index(sketches);
        std::vector<std::vector<std::uint32_t>> stamps(workers, std::vector<std::uint32_t>(n, 0));
        std::vector<std::vector<std::uint32_t>> candidates(workers);
        parallel_for(n, workers, [&](std::size_t i, unsigned w) {
            auto& stamp = stamps[w];
            auto& cand = candidates[w];
            cand.clear();
            const auto mark = static_cast<std::uint32_t>(i + 1);
            for (auto h : sketches[i].hashes) {
                auto post = index.postings(h);
                auto it = std::upper_bound(post.begin(), post.end(), static_cast<std::uint32_t>(i));
                for (; it != post.end(); ++it) {
                    if (stamp[*it] != mark) {
                        stamp[*it] = mark;
                        cand.push_back(*it);
                    }
                }
            }
            std::sort(cand.begin(), cand.end());
            for (auto j : cand) {
                const double d = distance(sketches[i], sketches[j], measure, scheme);
                if (keep(d)) buffers[w].push_back({static_cast<std::uint32_t>(i), j, d});
            }
        });
    }

    std::vector<DistanceEdge> edges;
    std::size_t total = 0;
    for (const auto& b : buffers) total += b.size();
    edges.reserve(total);
    for (auto& b : buffers) edges.insert(edges.end(), b.begin(), b.end());
    std::sort(edges.begin(), edges.end(), [](const DistanceEdge& x, const DistanceEdge& y) {
        return x.i != y.i ? x.i < y.i : x.j < y.j;
    });
    return edges;
}

// "id_i<TAB>id_j<TAB>distance" with six decimals, in edge order.
inline void write_edges_tsv(std::ostream& out, std::span<const DistanceEdge> edges, std::span<const std::string> ids) {
    char buf[32];
    for (const auto& e : edges) {
        std::snprintf(buf, sizeof(buf), "%.6f", e.d);
        out << ids[e.i] << '\t' << ids[e.j] << '\t' << buf << '\n';
    }
}

// Reads rows written by write_edges_tsv against a known id order. Rows come back sorted by (i, j).
inline std::vector<DistanceEdge> read_edges_tsv(std::string_view text, std::span<const std::string> ids) {
    std::map<std::string_view, std::uint32_t> index;
    for (std::uint32_t r = 0; r < ids.size(); ++r) index.emplace(ids[r], r);
    auto lookup = [&](std::string_view id) {
        auto it = index.find(id);
        if (it == index.end()) throw Error(ErrorKind::Format, "edge names unknown sequence '" + std::string(id) + "'");
        return it->second;
    };
    std::vector<DistanceEdge> edges;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        if (line.empty() || line.front() == '#') continue;
        const auto t1 = line.find('\t');
        const auto t2 = t1 == std::string_view::npos ? t1 : line.find('\t', t1 + 1);
        if (t2 == std::string_view::npos) throw Error(ErrorKind::Format, "bad edge row '" + std::string(line) + "'");
        auto a = lookup(line.substr(0, t1)), b = lookup(line.substr(t1 + 1, t2 - t1 - 1));
        if (a == b) throw Error(ErrorKind::Format, "self edge in edge file");
        const std::string d(line.substr(t2 + 1));
        char* end = nullptr;
        const double value = std::strtod(d.c_str(), &end);
        if (end == d.c_str() || *end != '\0' || !(value >= 0.0 && value <= 1.0)) {
            throw Error(ErrorKind::Format, "bad distance '" + d + "'");
        }
        edges.push_back({std::min(a, b), std::max(a, b), value});
    }
    std::sort(edges.begin(), edges.end(), [](const DistanceEdge& x, const DistanceEdge& y) {
        return x.i != y.i ? x.i < y.i : x.j < y.j;
    });
    return edges;
}

}  // namespace spanseq
