#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "spanseq/error.hpp"
#include "spanseq/sketch.hpp"

namespace spanseq {

// Sketches of a dataset together with the scheme that produced them and the record ids.
struct SketchSet {
    SketchScheme scheme;
    std::vector<std::string> ids;
    std::vector<KmerSketch> sketches;

    bool operator==(const SketchSet&) const = default;
};

// Binary layout, all integers little-endian:
//   "SSKC" | version u8 (=1) | kind u8 | k u16 | param u32 | canonical u8 | seed u64
//   then per record until end of file:
//   id_len u16 | id bytes | total_kmers u64 | hash_count u32 | hashes u64[hash_count]
//   | counts u32[hash_count]   (only for schemes that retain multiplicities)
inline constexpr std::array<char, 4> kSketchMagic{'S', 'S', 'K', 'C'};
inline constexpr std::uint8_t kSketchVersion = 1;

namespace detail {

template <class T>
void put_le(std::ostream& out, T value) {
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<char>((static_cast<std::uint64_t>(value) >> (8 * i)) & 0xFF);
    out.write(bytes.data(), bytes.size());
}

class ByteReader {
public:
    explicit ByteReader(std::string_view data) : data_(data) {}

    bool at_end() const noexcept { return pos_ == data_.size(); }

    template <class T>
    T get() {
        need(sizeof(T));
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        pos_ += sizeof(T);
        return static_cast<T>(v);
    }

    std::string_view bytes(std::size_t n) {
        need(n);
        auto out = data_.substr(pos_, n);
        pos_ += n;
        return out;
    }

private:
    void need(std::size_t n) const {
        if (data_.size() - pos_ < n) throw Error(ErrorKind::Format, "truncated sketch file");
    }

    std::string_view data_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline void write_sketches(std::ostream& out, const SketchSet& set) {
    if (set.ids.size() != set.sketches.size()) throw Error(ErrorKind::Internal, "sketch/id count mismatch");
    out.write(kSketchMagic.data(), kSketchMagic.size());
    detail::put_le<std::uint8_t>(out, kSketchVersion);
    detail::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(set.scheme.kind));
    detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(set.scheme.k));
    detail::put_le<std::uint32_t>(out, set.scheme.param);
    detail::put_le<std::uint8_t>(out, set.scheme.canonical ? 1 : 0);
    detail::put_le<std::uint64_t>(out, set.scheme.seed);
    const bool with_counts = set.scheme.retains_counts();
    for (std::size_t r = 0; r < set.sketches.size(); ++r) {
        const auto& id = set.ids[r];
        const auto& sk = set.sketches[r];
        if (id.size() > 0xFFFF) throw Error(ErrorKind::Format, "id longer than 65535 bytes: " + id.substr(0, 32));
        detail::put_le<std::uint16_t>(out, static_cast<std::uint16_t>(id.size()));
        out.write(id.data(), static_cast<std::streamsize>(id.size()));
        detail::put_le<std::uint64_t>(out, sk.total_kmers);
        detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(sk.hashes.size()));
        for (auto h : sk.hashes) detail::put_le<std::uint64_t>(out, h);
        if (with_counts) {
            if (sk.counts.size() != sk.hashes.size()) throw Error(ErrorKind::Internal, "sketch without counts for a counting scheme");
            for (auto c : sk.counts) detail::put_le<std::uint32_t>(out, c);
        }
    }
    if (!out) throw Error(ErrorKind::Io, "failed writing sketch file");
}

inline SketchSet read_sketches(std::string_view data) {
    detail::ByteReader in(data);
    if (in.bytes(4) != std::string_view(kSketchMagic.data(), kSketchMagic.size())) {
        throw Error(ErrorKind::Format, "not a sketch file (bad magic)");
    }
    const auto version = in.get<std::uint8_t>();
    if (version != kSketchVersion) throw Error(ErrorKind::Format, "unsupported sketch file version " + std::to_string(version));

    SketchSet set;
    const auto kind = in.get<std::uint8_t>();
    if (kind > 2) throw Error(ErrorKind::Format, "unknown sketch kind " + std::to_string(kind));
    set.scheme.kind = static_cast<SketchKind>(kind);
    set.scheme.k = in.get<std::uint16_t>();
    set.scheme.param = in.get<std::uint32_t>();
    set.scheme.canonical = in.get<std::uint8_t>() != 0;
    set.scheme.seed = in.get<std::uint64_t>();
    const bool with_counts = set.scheme.retains_counts();

    while (!in.at_end()) {
        KmerSketch sk;
        sk.record_index = set.sketches.size();
        const auto id_len = in.get<std::uint16_t>();
        set.ids.emplace_back(in.bytes(id_len));
        sk.total_kmers = in.get<std::uint64_t>();
        const auto count = in.get<std::uint32_t>();
        sk.hashes.resize(count);
        for (auto& h : sk.hashes) h = in.get<std::uint64_t>();
        for (std::size_t i = 1; i < sk.hashes.size(); ++i) {
            if (sk.hashes[i - 1] >= sk.hashes[i]) throw Error(ErrorKind::Format, "hashes not strictly ascending for '" + set.ids.back() + "'");
        }
        if (with_counts) {
            sk.counts.resize(count);
            for (auto& c : sk.counts) c = in.get<std::uint32_t>();
        }
        set.sketches.push_back(std::move(sk));
    }
    return set;
}

inline SketchSet read_sketches(std::istream& in) {
    std::string data = read_stream(in);
    return read_sketches(std::string_view(data));
}

// Debug export: a "#scheme" line, then "id<TAB>total_kmers<TAB>hashes<TAB>counts" with
// comma-separated decimal lists ("-" when there are no counts).
inline void write_sketches_tsv(std::ostream& out, const SketchSet& set) {
    out << "#scheme\t" << to_string(set.scheme.kind) << '\t' << set.scheme.k << '\t' << set.scheme.param << '\t'
        << (set.scheme.canonical ? 1 : 0) << '\t' << set.scheme.seed << '\n';
    for (std::size_t r = 0; r < set.sketches.size(); ++r) {
        const auto& sk = set.sketches[r];
        out << set.ids[r] << '\t' << sk.total_kmers << '\t';
        for (std::size_t i = 0; i < sk.hashes.size(); ++i) out << (i ? "," : "") << sk.hashes[i];
        out << '\t';
        if (sk.counts.empty()) {
            out << '-';
        } else {
            for (std::size_t i = 0; i < sk.counts.size(); ++i) out << (i ? "," : "") << sk.counts[i];
        }
        out << '\n';
    }
}

inline SketchSet read_sketches_tsv(std::istream& in) {
    SketchSet set;
    std::string line;
    auto split = [](const std::string& s, char sep) {
        std::vector<std::string> parts;
        std::stringstream ss(s);
        std::string part;
        while (std::getline(ss, part, sep)) parts.push_back(part);
        if (!s.empty() && s.back() == sep) parts.emplace_back();
        return parts;
    };
    if (!std::getline(in, line)) throw Error(ErrorKind::Format, "empty sketch TSV");
    auto head = split(line, '\t');
    if (head.size() != 6 || head[0] != "#scheme") throw Error(ErrorKind::Format, "missing #scheme line");
    if (head[1] == "minhash") set.scheme.kind = SketchKind::MinHashBottomS;
    else if (head[1] == "minimizer") set.scheme.kind = SketchKind::Minimizer;
    else if (head[1] == "prefix") set.scheme.kind = SketchKind::Prefix;
    else throw Error(ErrorKind::Format, "unknown sketch kind '" + head[1] + "'");
    set.scheme.k = static_cast<std::uint32_t>(std::stoul(head[2]));
    set.scheme.param = static_cast<std::uint32_t>(std::stoul(head[3]));
    set.scheme.canonical = head[4] == "1";
    set.scheme.seed = std::stoull(head[5]);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cols = split(line, '\t');
        if (cols.size() != 4) throw Error(ErrorKind::Format, "bad sketch TSV row");
        KmerSketch sk;
        sk.record_index = set.sketches.size();
        sk.total_kmers = std::stoull(cols[1]);
        if (!cols[2].empty()) {
            for (const auto& h : split(cols[2], ',')) sk.hashes.push_back(std::stoull(h));
        }
        if (cols[3] != "-" && !cols[3].empty()) {
            for (const auto& c : split(cols[3], ',')) sk.counts.push_back(static_cast<std::uint32_t>(std::stoul(c)));
        }
        set.ids.push_back(cols[0]);
        set.sketches.push_back(std::move(sk));
    }
    return set;
}

}  // namespace spanseq
