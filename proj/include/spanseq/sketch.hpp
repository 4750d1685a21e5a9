#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spanseq/error.hpp"
#include "spanseq/hash.hpp"
#include "spanseq/parallel.hpp"
#include "spanseq/sequence_io.hpp"

namespace spanseq {

enum class SketchKind : std::uint8_t { MinHashBottomS = 0, Minimizer = 1, Prefix = 2 };

constexpr std::string_view to_string(SketchKind kind) noexcept {
    switch (kind) {
        case SketchKind::MinHashBottomS: return "minhash";
        case SketchKind::Minimizer: return "minimizer";
        case SketchKind::Prefix: return "prefix";
    }
    return "minhash";
}

// param is the sketch size s (MinHashBottomS), the window length w in k-mers (Minimizer),
// or the prefix length p (Prefix). Prefix keeps k-mers starting with p 'A's; p = 0 keeps
// every k-mer.
struct SketchScheme {
    SketchKind kind = SketchKind::MinHashBottomS;
    std::uint32_t k = 16;
    std::uint32_t param = 1024;
    bool canonical = true;
    std::uint64_t seed = kDefaultSeed;

    bool retains_counts() const noexcept { return kind != SketchKind::MinHashBottomS; }

    void validate(Alphabet alphabet) const {
        if (k < 1 || k > 0xFFFF) throw Error(ErrorKind::Config, "k must be in [1, 65535]");
        switch (kind) {
            case SketchKind::MinHashBottomS:
                if (param < 1) throw Error(ErrorKind::Config, "sketch size must be >= 1");
                break;
            case SketchKind::Minimizer:
                if (param < 1) throw Error(ErrorKind::Config, "minimizer window must be >= 1");
                break;
            case SketchKind::Prefix:
                if (param > k) throw Error(ErrorKind::Config, "prefix length must be <= k");
                break;
        }
        if (canonical && alphabet == Alphabet::AminoAcid) {
            throw Error(ErrorKind::Config, "canonical k-mers are only defined for nucleotides");
        }
    }

    bool operator==(const SketchScheme&) const = default;
};

struct KmerSketch {
    std::size_t record_index = 0;
    std::vector<std::uint64_t> hashes;   // strictly ascending
    std::vector<std::uint32_t> counts;   // empty, or aligned with hashes
    std::uint64_t total_kmers = 0;       // valid k-mer positions before sub-sampling

    bool empty() const noexcept { return hashes.empty(); }
    bool operator==(const KmerSketch&) const = default;
};

namespace detail {

// Amino-acid ambiguity and stop codes are excluded from k-mers.
inline constexpr CharTable kAminoUnambiguous = make_table("ACDEFGHIKLMNPQRSTVWYUO");

struct HashedKmer {
    std::size_t position;
    std::uint64_t hash;
};

// Calls emit(position, kmer) for every k-mer free of ambiguity codes, in position order.
// Canonical mode hands over the lexicographically smaller strand.
template <class Emit>
void for_each_kmer(const SequenceRecord& record, const SketchScheme& scheme, Emit&& emit) {
    const std::size_t k = scheme.k;
    const std::size_t n = record.residues.size();
    if (n < k) return;

    const bool nucleotide = record.alphabet == Alphabet::Nucleotide;
    std::string seq = record.residues;
    std::vector<bool> valid(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (nucleotide) {
            if (seq[i] == 'U') seq[i] = 'T';
            valid[i] = is_unambiguous_base(seq[i]);
        } else {
            valid[i] = kAminoUnambiguous[static_cast<unsigned char>(seq[i])];
        }
    }
    const bool canonical = scheme.canonical && nucleotide;
    const std::string rc = canonical ? reverse_complement(seq) : std::string();
    const std::string_view fwd_view(seq);
    const std::string_view rc_view(rc);

    std::size_t run = 0;  // consecutive valid residues ending at i
    for (std::size_t i = 0; i < n; ++i) {
        run = valid[i] ? run + 1 : 0;
        if (run < k) continue;
        const std::size_t start = i + 1 - k;
        std::string_view kmer = fwd_view.substr(start, k);
        if (canonical) {
            std::string_view rev = rc_view.substr(n - start - k, k);
            if (rev < kmer) kmer = rev;
        }
        emit(start, kmer);
    }
}

inline void collapse_with_counts(std::vector<std::uint64_t>& values, KmerSketch& out) {
    std::sort(values.begin(), values.end());
    for (std::size_t i = 0; i < values.size();) {
        std::size_t j = i;
        while (j < values.size() && values[j] == values[i]) ++j;
        out.hashes.push_back(values[i]);
        out.counts.push_back(static_cast<std::uint32_t>(j - i));
        i = j;
    }
}

}  // namespace detail

// Sub-sampled k-mer hash sketch of one record. Records shorter than k (or without any
// unambiguous k-mer) yield an empty sketch.
inline KmerSketch sketch_sequence(const SequenceRecord& record, const SketchScheme& scheme, std::size_t record_index = 0) {
    scheme.validate(record.alphabet);
    KmerSketch sketch;
    sketch.record_index = record_index;

    switch (scheme.kind) {
        case SketchKind::MinHashBottomS: {
            std::vector<std::uint64_t> all;
            all.reserve(record.residues.size());
            detail::for_each_kmer(record, scheme, [&](std::size_t, std::string_view kmer) {
                all.push_back(hash_kmer(kmer, scheme.seed));
            });
            sketch.total_kmers = all.size();
            std::sort(all.begin(), all.end());
            all.erase(std::unique(all.begin(), all.end()), all.end());
            if (all.size() > scheme.param) all.resize(scheme.param);
            sketch.hashes = std::move(all);
            break;
        }
        case SketchKind::Minimizer: {
            // Window = w consecutive k-mer start positions; invalid positions are absent.
            const std::size_t w = scheme.param;
            std::vector<detail::HashedKmer> kmers;
            kmers.reserve(record.residues.size());
            detail::for_each_kmer(record, scheme, [&](std::size_t pos, std::string_view kmer) {
                kmers.push_back({pos, hash_kmer(kmer, scheme.seed)});
            });
            sketch.total_kmers = kmers.size();
            if (kmers.empty()) break;

            const std::size_t last_pos = kmers.back().position;
            std::vector<std::uint64_t> selected;
            std::deque<std::size_t> window;  // indices into kmers, hashes non-decreasing
            std::size_t next = 0;
            std::size_t last_selected = SIZE_MAX;
            const std::size_t window_count = last_pos + 1 >= w ? last_pos + 2 - w : 1;
            for (std::size_t wstart = 0; wstart < window_count; ++wstart) {
                const std::size_t wend = wstart + w;  // exclusive
                while (next < kmers.size() && kmers[next].position < wend) {
                    while (!window.empty() && kmers[window.back()].hash > kmers[next].hash) window.pop_back();
                    window.push_back(next);
                    ++next;
                }
                while (!window.empty() && kmers[window.front()].position < wstart) window.pop_front();
                if (window.empty()) continue;
                const std::size_t pick = window.front();
                if (pick != last_selected) {
                    selected.push_back(kmers[pick].hash);
                    last_selected = pick;
                }
            }
            detail::collapse_with_counts(selected, sketch);
            break;
        }
        case SketchKind::Prefix: {
            const std::size_t p = scheme.param;
            std::vector<std::uint64_t> kept;
            detail::for_each_kmer(record, scheme, [&](std::size_t, std::string_view kmer) {
                ++sketch.total_kmers;
                for (std::size_t i = 0; i < p; ++i) {
                    if (kmer[i] != 'A') return;
                }
                kept.push_back(hash_kmer(kmer, scheme.seed));
            });
            detail::collapse_with_counts(kept, sketch);
            break;
        }
    }
    return sketch;
}

// Sketches every record; result i belongs to record i whatever the thread count.
inline std::vector<KmerSketch> sketch_all(std::span<const SequenceRecord> records, const SketchScheme& scheme,
                                          unsigned threads = 1) {
    std::vector<KmerSketch> sketches(records.size());
    parallel_for(records.size(), threads, [&](std::size_t i, unsigned) {
        sketches[i] = sketch_sequence(records[i], scheme, i);
    });
    return sketches;
}

}  // namespace spanseq
