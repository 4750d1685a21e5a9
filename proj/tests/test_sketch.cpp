#include <gtest/gtest.h>

#include <array>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "spanseq/sketch.hpp"
#include "spanseq/sketch_io.hpp"
#include "support/synthetic.hpp"

namespace spanseq {
namespace {

SequenceRecord dna(std::string residues, std::string id = "r") {
    return SequenceRecord{std::move(id), Alphabet::Nucleotide, std::move(residues)};
}

SketchScheme minhash(std::uint32_t k, std::uint32_t s, bool canonical = true) {
    return SketchScheme{SketchKind::MinHashBottomS, k, s, canonical, kDefaultSeed};
}

// Every distinct (canonical) k-mer hash of an unambiguous DNA string, built from the
// primitives directly.
std::vector<std::uint64_t> all_distinct_hashes(const std::string& seq, std::uint32_t k, bool canonical) {
    std::set<std::uint64_t> out;
    for (std::size_t i = 0; i + k <= seq.size(); ++i) {
        std::string kmer = seq.substr(i, k);
        if (canonical) kmer = canonical_kmer(kmer);
        out.insert(hash_kmer(kmer));
    }
    return {out.begin(), out.end()};
}

TEST(HashKmer, MatchesPublishedConstants) {
    // Values computed with an independent Python implementation of FNV-1a + fmix64.
    EXPECT_EQ(hash_kmer("ACGT", 42), 0x04c7ccf614bf9584ULL);
    EXPECT_EQ(hash_kmer("CGTA", 42), 0x5d826b2199e910c1ULL);
    EXPECT_EQ(hash_kmer("GTAC", 42), 0x07b6fc8a0a3ac674ULL);
    EXPECT_EQ(hash_kmer("ACGTACGTACGTACGT", 42), 0x0cb67784f06d22baULL);
    EXPECT_EQ(hash_kmer("MKVLA", 7), 0x83ffdf535438ce08ULL);
    static_assert(hash_kmer("ACGT", 42) == 0x04c7ccf614bf9584ULL);
}

TEST(HashKmer, DeterministicAndSeeded) {
    EXPECT_EQ(hash_kmer("ACGTTGCA", 1), hash_kmer("ACGTTGCA", 1));
    EXPECT_NE(hash_kmer("ACGTTGCA", 1), hash_kmer("ACGTTGCA", 2));
    EXPECT_NE(hash_kmer("ACGTTGCA", 1), hash_kmer("ACGTTGCT", 1));
}

TEST(HashKmer, OutputBitsAreBalanced) {
    std::mt19937_64 rng(2024);
    constexpr int kSamples = 1'000'000;
    std::array<int, 64> ones{};
    for (int i = 0; i < kSamples; ++i) {
        const auto h = hash_kmer(testing::random_dna(rng, 16));
        for (int b = 0; b < 64; ++b) ones[b] += static_cast<int>((h >> b) & 1U);
    }
    for (int b = 0; b < 64; ++b) {
        const double frac = static_cast<double>(ones[b]) / kSamples;
        EXPECT_NEAR(frac, 0.5, 0.005) << "bit " << b;
    }
}

TEST(CanonicalKmer, Examples) {
    EXPECT_EQ(canonical_kmer("ATG"), "ATG");
    EXPECT_EQ(canonical_kmer("CAT"), "ATG");
    EXPECT_EQ(canonical_kmer("ACGT"), "ACGT");
    EXPECT_THROW(canonical_kmer("ANG"), Error);
}

TEST(CanonicalKmer, StrandInvariant) {
    std::mt19937_64 rng(3);
    for (int i = 0; i < 2000; ++i) {
        const auto x = testing::random_dna(rng, 1 + rng() % 40);
        EXPECT_EQ(canonical_kmer(x), canonical_kmer(reverse_complement(x)));
        EXPECT_LE(canonical_kmer(x), x);
    }
}

TEST(SketchSequence, HandEnumeratedCanonicalFourMers) {
    // Windows ACGT, CGTA, GTAC, TACG, ACGT; canonical forms ACGT, CGTA, GTAC, CGTA, ACGT.
    const auto sk = sketch_sequence(dna("ACGTACGT"), minhash(4, 1024));
    std::vector<std::uint64_t> expected{hash_kmer("ACGT"), hash_kmer("CGTA"), hash_kmer("GTAC")};
    std::sort(expected.begin(), expected.end());
    EXPECT_EQ(sk.hashes, expected);
    EXPECT_EQ(sk.total_kmers, 5U);
    EXPECT_TRUE(sk.counts.empty());
}

TEST(SketchSequence, FewerDistinctThanSketchSizeKeepsEverything) {
    std::mt19937_64 rng(11);
    const auto seq = testing::random_dna(rng, 300);
    const auto sk = sketch_sequence(dna(seq), minhash(12, 5000));
    EXPECT_EQ(sk.hashes, all_distinct_hashes(seq, 12, true));
}

TEST(SketchSequence, BottomSIsSmallestDistinctHashes) {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 20; ++trial) {
        const auto seq = testing::random_dna(rng, 500 + rng() % 2000);
        const std::uint32_t s = 1 + static_cast<std::uint32_t>(rng() % 400);
        auto full = all_distinct_hashes(seq, 15, true);
        const auto sk = sketch_sequence(dna(seq), minhash(15, s));
        full.resize(std::min<std::size_t>(full.size(), s));
        EXPECT_EQ(sk.hashes, full);
        EXPECT_TRUE(std::is_sorted(sk.hashes.begin(), sk.hashes.end()));
        EXPECT_EQ(std::adjacent_find(sk.hashes.begin(), sk.hashes.end()), sk.hashes.end());
    }
}

TEST(SketchSequence, SmallerSketchIsPrefixOfLarger) {
    std::mt19937_64 rng(13);
    const auto seq = testing::random_dna(rng, 5000);
    const auto small = sketch_sequence(dna(seq), minhash(16, 200));
    const auto large = sketch_sequence(dna(seq), minhash(16, 900));
    ASSERT_EQ(small.hashes.size(), 200U);
    EXPECT_TRUE(std::equal(small.hashes.begin(), small.hashes.end(), large.hashes.begin()));
}

TEST(SketchSequence, AmbiguousKmersAreSkipped) {
    // Valid 3-mers of ACGNACGT start at 0, 4 and 5.
    const auto sk = sketch_sequence(dna("ACGNACGT"), minhash(3, 100, false));
    EXPECT_EQ(sk.total_kmers, 3U);
    std::vector<std::uint64_t> expected{hash_kmer("ACG"), hash_kmer("CGT")};
    std::sort(expected.begin(), expected.end());
    EXPECT_EQ(sk.hashes, expected);
}

TEST(SketchSequence, RnaUracilHashesLikeThymine) {
    EXPECT_EQ(sketch_sequence(dna("ACGUUGCA"), minhash(4, 100)).hashes,
              sketch_sequence(dna("ACGTTGCA"), minhash(4, 100)).hashes);
}

TEST(SketchSequence, ShortRecordGivesEmptySketch) {
    const auto sk = sketch_sequence(dna("ACG"), minhash(4, 100));
    EXPECT_TRUE(sk.empty());
    EXPECT_EQ(sk.total_kmers, 0U);
}

TEST(SketchSequence, AminoAcidsSkipAmbiguityCodes) {
    SequenceRecord p{"p", Alphabet::AminoAcid, "MKVXLAB"};
    const auto sk = sketch_sequence(p, minhash(2, 100, false));
    // MK, KV, LA are valid; VX, XL, AB are not.
    EXPECT_EQ(sk.total_kmers, 3U);
    EXPECT_EQ(sk.hashes.size(), 3U);
}

TEST(SketchScheme, Validation) {
    SequenceRecord p{"p", Alphabet::AminoAcid, "MKVL"};
    EXPECT_THROW(sketch_sequence(p, minhash(2, 10, true)), Error);
    EXPECT_THROW(sketch_sequence(dna("ACGT"), SketchScheme{SketchKind::Prefix, 3, 4, true, 1}), Error);
    EXPECT_THROW(sketch_sequence(dna("ACGT"), SketchScheme{SketchKind::Minimizer, 3, 0, true, 1}), Error);
    EXPECT_THROW(sketch_sequence(dna("ACGT"), SketchScheme{SketchKind::MinHashBottomS, 0, 4, true, 1}), Error);
}

// Minimizers by scanning every window directly.
std::map<std::uint64_t, std::uint32_t> brute_force_minimizers(const std::string& seq, std::uint32_t k, std::uint32_t w) {
    std::vector<std::uint64_t> hashes;
    for (std::size_t i = 0; i + k <= seq.size(); ++i) hashes.push_back(hash_kmer(canonical_kmer(seq.substr(i, k))));
    std::set<std::size_t> picked;
    const std::size_t windows = hashes.size() >= w ? hashes.size() - w + 1 : 1;
    for (std::size_t s = 0; s < windows; ++s) {
        std::size_t best = s;
        for (std::size_t t = s; t < std::min<std::size_t>(s + w, hashes.size()); ++t) {
            if (hashes[t] < hashes[best]) best = t;
        }
        picked.insert(best);
    }
    std::map<std::uint64_t, std::uint32_t> out;
    for (auto pos : picked) ++out[hashes[pos]];
    return out;
}

TEST(SketchSequence, MinimizersMatchWindowScan) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 30; ++trial) {
        // Low-complexity sequences make hash ties common.
        std::string seq = trial % 3 == 0 ? std::string(30 + rng() % 50, 'A') + testing::random_dna(rng, 40)
                                         : testing::random_dna(rng, 20 + rng() % 600);
        const std::uint32_t k = 3 + static_cast<std::uint32_t>(rng() % 10);
        const std::uint32_t w = 1 + static_cast<std::uint32_t>(rng() % 20);
        const auto sk = sketch_sequence(dna(seq), SketchScheme{SketchKind::Minimizer, k, w, true, kDefaultSeed});
        const auto expected = brute_force_minimizers(seq, k, w);
        ASSERT_EQ(sk.hashes.size(), expected.size());
        std::size_t i = 0;
        for (const auto& [h, c] : expected) {
            EXPECT_EQ(sk.hashes[i], h);
            EXPECT_EQ(sk.counts[i], c);
            ++i;
        }
    }
}

TEST(SketchSequence, MinimizerDensityIsTwoOverWPlusOne) {
    std::mt19937_64 rng(22);
    const auto seq = testing::random_dna(rng, 200'000);
    for (std::uint32_t w : {4U, 8U, 16U, 32U}) {
        const auto sk = sketch_sequence(dna(seq), SketchScheme{SketchKind::Minimizer, 21, w, true, kDefaultSeed});
        std::uint64_t retained = 0;
        for (auto c : sk.counts) retained += c;
        const double density = static_cast<double>(retained) / static_cast<double>(sk.total_kmers);
        const double expected = 2.0 / (w + 1.0);
        EXPECT_NEAR(density, expected, 0.2 * expected) << "w=" << w;
    }
}

TEST(SketchSequence, PrefixKeepsAllAKmersWithCounts) {
    const auto seq = std::string("AAAACAAAAC");
    const auto sk = sketch_sequence(dna(seq), SketchScheme{SketchKind::Prefix, 3, 2, false, kDefaultSeed});
    // 3-mers: AAA AAA AAC ACA CAA AAA AAA AAC -> AA-prefixed: AAA x4, AAC x2
    std::map<std::uint64_t, std::uint32_t> expected{{hash_kmer("AAA"), 4}, {hash_kmer("AAC"), 2}};
    ASSERT_EQ(sk.hashes.size(), 2U);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_EQ(expected.at(sk.hashes[i]), sk.counts[i]);
    EXPECT_EQ(sk.total_kmers, 8U);

    const auto all = sketch_sequence(dna(seq), SketchScheme{SketchKind::Prefix, 3, 0, false, kDefaultSeed});
    EXPECT_EQ(all.hashes, all_distinct_hashes(seq, 3, false));
}

TEST(SketchSequence, ReverseComplementInvariance) {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const auto seq = testing::random_dna(rng, 3000);
        const auto rc = reverse_complement(seq);
        for (auto kind : {SketchKind::MinHashBottomS, SketchKind::Prefix, SketchKind::Minimizer}) {
            const std::uint32_t param = kind == SketchKind::MinHashBottomS ? 256 : (kind == SketchKind::Prefix ? 1 : 8);
            const SketchScheme scheme{kind, 15, param, true, kDefaultSeed};
            EXPECT_EQ(sketch_sequence(dna(seq), scheme).hashes, sketch_sequence(dna(rc), scheme).hashes);
            if (kind != SketchKind::Minimizer) {
                EXPECT_EQ(sketch_sequence(dna(seq), scheme), sketch_sequence(dna(rc), scheme));
            }
        }
    }
}

TEST(SketchAll, IndependentOfThreadCount) {
    std::mt19937_64 rng(31);
    std::vector<SequenceRecord> records;
    for (int i = 0; i < 64; ++i) records.push_back(dna(testing::random_dna(rng, 100 + rng() % 900), "r" + std::to_string(i)));
    records.push_back(records[5]);
    records.back().id = "dup";
    for (auto kind : {SketchKind::MinHashBottomS, SketchKind::Minimizer, SketchKind::Prefix}) {
        const SketchScheme scheme{kind, 11, kind == SketchKind::MinHashBottomS ? 128U : 2U, true, 9};
        const auto one = sketch_all(records, scheme, 1);
        const auto many = sketch_all(records, scheme, 8);
        EXPECT_EQ(one, many);
        for (std::size_t i = 0; i < one.size(); ++i) EXPECT_EQ(one[i].record_index, i);
        EXPECT_EQ(one[5].hashes, one.back().hashes);
        EXPECT_EQ(one[5].counts, one.back().counts);
    }
}

TEST(SketchFile, ExactByteLayout) {
    SketchSet set;
    set.scheme = SketchScheme{SketchKind::Minimizer, 5, 3, true, 0x0102030405060708ULL};
    set.ids = {"ab"};
    KmerSketch sk;
    sk.hashes = {0x1122334455667788ULL};
    sk.counts = {2};
    sk.total_kmers = 9;
    set.sketches = {sk};
    std::ostringstream out;
    write_sketches(out, set);
    const std::string expected(
        "SSKC"
        "\x01"
        "\x01"
        "\x05\x00"
        "\x03\x00\x00\x00"
        "\x01"
        "\x08\x07\x06\x05\x04\x03\x02\x01"
        "\x02\x00"
        "ab"
        "\x09\x00\x00\x00\x00\x00\x00\x00"
        "\x01\x00\x00\x00"
        "\x88\x77\x66\x55\x44\x33\x22\x11"
        "\x02\x00\x00\x00",
        4 + 1 + 1 + 2 + 4 + 1 + 8 + 2 + 2 + 8 + 4 + 8 + 4);
    EXPECT_EQ(out.str(), expected);
}

TEST(SketchFile, BinaryAndTsvRoundTrip) {
    std::mt19937_64 rng(41);
    for (auto kind : {SketchKind::MinHashBottomS, SketchKind::Minimizer}) {
        SketchSet set;
        set.scheme = SketchScheme{kind, 13, kind == SketchKind::Minimizer ? 6U : 64U, true, 77};
        std::vector<SequenceRecord> records;
        for (int i = 0; i < 25; ++i) records.push_back(dna(testing::random_dna(rng, rng() % 400), "id_" + std::to_string(i)));
        for (auto& r : records) {
            if (r.residues.empty()) r.residues = "N";
        }
        set.sketches = sketch_all(records, set.scheme);
        for (const auto& r : records) set.ids.push_back(r.id);

        std::stringstream bin;
        write_sketches(bin, set);
        EXPECT_EQ(read_sketches(bin), set);

        std::stringstream tsv;
        write_sketches_tsv(tsv, set);
        EXPECT_EQ(read_sketches_tsv(tsv), set);
    }
}

TEST(SketchFile, RejectsCorruptInput) {
    EXPECT_THROW(read_sketches(std::string_view("SSKD\x01")), Error);
    EXPECT_THROW(read_sketches(std::string_view("SSKC\x02")), Error);
    SketchSet set;
    set.ids = {"x"};
    set.sketches = {KmerSketch{0, {1, 2, 3}, {}, 3}};
    std::ostringstream out;
    write_sketches(out, set);
    auto bytes = out.str();
    EXPECT_THROW(read_sketches(std::string_view(bytes).substr(0, bytes.size() - 3)), Error);
}

}  // namespace
}  // namespace spanseq
