#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "spanseq/error.hpp"

namespace spanseq {

inline constexpr std::uint64_t kDefaultSeed = 42;

// k-mer hash: 64-bit FNV-1a over the k-mer bytes, starting from the FNV offset basis
// XORed with the seed, followed by the MurmurHash3 fmix64 finalizer.
//   offset basis 0xcbf29ce484222325, prime 0x100000001b3
//   fmix64 multipliers 0xff51afd7ed558ccd, 0xc4ceb9fe1a85ec53, shifts of 33
// Only byte values and integer arithmetic are involved, so outputs are identical on
// every platform.
inline constexpr std::uint64_t kFnvOffsetBasis = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

constexpr std::uint64_t fmix64(std::uint64_t h) noexcept {
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ULL;
    h ^= h >> 33;
    return h;
}

constexpr std::uint64_t hash_kmer(std::string_view kmer, std::uint64_t seed = kDefaultSeed) noexcept {
    std::uint64_t h = kFnvOffsetBasis ^ seed;
    for (char c : kmer) {
        h ^= static_cast<unsigned char>(c);
        h *= kFnvPrime;
    }
    return fmix64(h);
}

constexpr char complement_base(char c) noexcept {
    switch (c) {
        case 'A': return 'T';
        case 'C': return 'G';
        case 'G': return 'C';
        case 'T': return 'A';
        case 'U': return 'A';
        default: return 'N';
    }
}

constexpr bool is_unambiguous_base(char c) noexcept {
    return c == 'A' || c == 'C' || c == 'G' || c == 'T';
}

inline std::string reverse_complement(std::string_view seq) {
    std::string rc(seq.size(), 'N');
    for (std::size_t i = 0; i < seq.size(); ++i) rc[seq.size() - 1 - i] = complement_base(seq[i]);
    return rc;
}

// Lexicographic minimum of a k-mer and its reverse complement.
inline std::string canonical_kmer(std::string_view kmer) {
    for (char c : kmer) {
        if (!is_unambiguous_base(c)) {
            throw Error(ErrorKind::IllegalResidue, std::string("ambiguous base '") + c + "' in k-mer");
        }
    }
    std::string rc = reverse_complement(kmer);
    return rc < kmer ? rc : std::string(kmer);
}

}  // namespace spanseq
