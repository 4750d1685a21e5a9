#pragma once

#include <array>
#include <cstdint>
#include <fstream>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <zlib.h>

#include "spanseq/error.hpp"

namespace spanseq {

enum class Alphabet : std::uint8_t { Nucleotide, AminoAcid };

// Auto infers the alphabet per record; the others force it.
enum class AlphabetPolicy : std::uint8_t { Auto, Nucleotide, AminoAcid };

struct SequenceRecord {
    std::string id;
    Alphabet alphabet = Alphabet::Nucleotide;
    std::string residues;

    bool operator==(const SequenceRecord&) const = default;
};

// Sequence id -> categorical label. Ordered so iteration is reproducible.
using LabelTable = std::map<std::string, std::string>;

namespace detail {

using CharTable = std::array<bool, 256>;

constexpr CharTable make_table(std::string_view chars) {
    CharTable table{};
    for (char c : chars) table[static_cast<unsigned char>(c)] = true;
    return table;
}

// IUPAC nucleotide codes, with U for RNA.
inline constexpr CharTable kNucleotide = make_table("ACGTUNRYSWKMBDHV");
// 20 standard amino acids plus B, Z, X, U, O and the stop symbol.
inline constexpr CharTable kAminoAcid = make_table("ACDEFGHIKLMNPQRSTVWYBZXUO*");

constexpr char to_upper(char c) noexcept {
    return (c >= 'a' && c <= 'z') ? static_cast<char>(c - 'a' + 'A') : c;
}

inline bool is_blank(char c) noexcept {
    return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f';
}

}  // namespace detail

inline bool is_nucleotide_code(char c) noexcept {
    return detail::kNucleotide[static_cast<unsigned char>(c)];
}

inline bool is_amino_acid_code(char c) noexcept {
    return detail::kAminoAcid[static_cast<unsigned char>(c)];
}

// Nucleotide iff every residue is an IUPAC nucleotide code. Expects uppercase input.
inline Alphabet infer_alphabet(std::string_view residues) {
    if (residues.empty()) throw Error(ErrorKind::EmptySequence, "cannot infer alphabet of an empty sequence");
    bool nucleotide = true;
    for (char c : residues) {
        if (is_nucleotide_code(c)) continue;
        if (!is_amino_acid_code(c)) {
            throw Error(ErrorKind::IllegalResidue, std::string("character '") + c + "' is neither nucleotide nor amino acid");
        }
        nucleotide = false;
    }
    return nucleotide ? Alphabet::Nucleotide : Alphabet::AminoAcid;
}

// Inflates gzip data in place; anything without the gzip magic is returned unchanged.
inline std::string decompress_if_gzip(std::string data) {
    if (data.size() < 2 || static_cast<unsigned char>(data[0]) != 0x1f ||
        static_cast<unsigned char>(data[1]) != 0x8b) {
        return data;
    }
    z_stream zs{};
    if (inflateInit2(&zs, 16 + MAX_WBITS) != Z_OK) throw Error(ErrorKind::Io, "inflateInit2 failed");
    std::string out;
    std::array<char, 1 << 16> chunk{};
    zs.next_in = reinterpret_cast<Bytef*>(data.data());
    zs.avail_in = static_cast<uInt>(data.size());
    int rc = Z_OK;
    while (true) {
        zs.next_out = reinterpret_cast<Bytef*>(chunk.data());
        zs.avail_out = static_cast<uInt>(chunk.size());
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw Error(ErrorKind::Format, "corrupt gzip stream");
        }
        out.append(chunk.data(), chunk.size() - zs.avail_out);
        if (rc == Z_STREAM_END) {
            // Concatenated gzip members.
            if (zs.avail_in == 0) break;
            inflateReset(&zs);
        } else if (zs.avail_in == 0 && zs.avail_out != 0) {
            inflateEnd(&zs);
            throw Error(ErrorKind::Format, "truncated gzip stream");
        }
    }
    inflateEnd(&zs);
    return out;
}

inline std::string read_stream(std::istream& in) {
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
    return read_stream(in);
}

// Parses FASTA text (plain or gzip bytes). The id is the header token up to the first
// whitespace; residues are uppercased with whitespace removed.
inline std::vector<SequenceRecord> parse_fasta(std::string_view raw, AlphabetPolicy policy = AlphabetPolicy::Auto) {
    std::string inflated;
    if (raw.size() >= 2 && static_cast<unsigned char>(raw[0]) == 0x1f && static_cast<unsigned char>(raw[1]) == 0x8b) {
        inflated = decompress_if_gzip(std::string(raw));
        raw = inflated;
    }

    std::vector<SequenceRecord> records;
    std::unordered_set<std::string> seen;
    std::size_t line_no = 0;

    auto finish = [&]() {
        if (records.empty()) return;
        SequenceRecord& rec = records.back();
        if (rec.residues.empty()) throw Error(ErrorKind::EmptySequence, "record '" + rec.id + "' has no residues");
        switch (policy) {
            case AlphabetPolicy::Auto:
                rec.alphabet = infer_alphabet(rec.residues);
                break;
            case AlphabetPolicy::Nucleotide:
                for (char c : rec.residues) {
                    if (!is_nucleotide_code(c)) {
                        throw Error(ErrorKind::IllegalResidue,
                                    "record '" + rec.id + "': '" + c + "' is not a nucleotide code");
                    }
                }
                rec.alphabet = Alphabet::Nucleotide;
                break;
            case AlphabetPolicy::AminoAcid:
                for (char c : rec.residues) {
                    if (!is_amino_acid_code(c)) {
                        throw Error(ErrorKind::IllegalResidue,
                                    "record '" + rec.id + "': '" + c + "' is not an amino acid code");
                    }
                }
                rec.alphabet = Alphabet::AminoAcid;
                break;
        }
    };

    std::size_t pos = 0;
    while (pos < raw.size()) {
        std::size_t eol = raw.find('\n', pos);
        if (eol == std::string_view::npos) eol = raw.size();
        std::string_view line = raw.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        if (!line.empty() && line.front() == '>') {
            finish();
            std::string_view header = line.substr(1);
            std::size_t start = 0;
            while (start < header.size() && detail::is_blank(header[start])) ++start;
            std::size_t end = start;
            while (end < header.size() && !detail::is_blank(header[end])) ++end;
            if (start != 0 || end == start) {
                throw Error(ErrorKind::MalformedHeader, "line " + std::to_string(line_no) + ": header has no identifier");
            }
            std::string id(header.substr(start, end - start));
            if (!seen.insert(id).second) throw Error(ErrorKind::DuplicateId, id);
            records.push_back(SequenceRecord{std::move(id), Alphabet::Nucleotide, {}});
            continue;
        }

        bool blank = true;
        for (char c : line) {
            if (!detail::is_blank(c)) {
                blank = false;
                break;
            }
        }
        if (blank) continue;
        if (records.empty()) {
            throw Error(ErrorKind::MalformedHeader, "line " + std::to_string(line_no) + ": sequence data before first header");
        }
        std::string& residues = records.back().residues;
        for (char c : line) {
            if (detail::is_blank(c)) continue;
            char u = detail::to_upper(c);
            if (!is_amino_acid_code(u) && !is_nucleotide_code(u)) {
                throw Error(ErrorKind::IllegalResidue, "record '" + records.back().id + "', line " +
                                                           std::to_string(line_no) + ": illegal character '" + c + "'");
            }
            residues.push_back(u);
        }
    }
    finish();
    return records;
}

inline std::vector<SequenceRecord> parse_fasta(std::istream& in, AlphabetPolicy policy = AlphabetPolicy::Auto) {
    std::string data = read_stream(in);
    return parse_fasta(std::string_view(data), policy);
}

// Concatenates records from several files in argument order; ids must be unique across all of them.
inline std::vector<SequenceRecord> read_fasta_files(std::span<const std::string> paths,
                                                    AlphabetPolicy policy = AlphabetPolicy::Auto) {
    std::vector<SequenceRecord> all;
    std::unordered_set<std::string> seen;
    for (const auto& path : paths) {
        std::string data = read_file(path);
        auto records = parse_fasta(std::string_view(data), policy);
        for (auto& rec : records) {
            if (!seen.insert(rec.id).second) throw Error(ErrorKind::DuplicateId, rec.id);
            all.push_back(std::move(rec));
        }
    }
    return all;
}

inline void write_fasta(std::ostream& out, std::span<const SequenceRecord> records, std::size_t line_width = 60) {
    for (const auto& rec : records) {
        out << '>' << rec.id << '\n';
        for (std::size_t i = 0; i < rec.residues.size(); i += line_width) {
            out << std::string_view(rec.residues).substr(i, line_width) << '\n';
        }
    }
}

// Two-column TSV "seq_id<TAB>label"; '#' lines and blank lines are skipped.
inline LabelTable parse_labels(std::string_view text) {
    LabelTable table;
    std::size_t pos = 0;
    std::size_t line_no = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty() || line.front() == '#') continue;

        std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos || tab == 0) {
            throw Error(ErrorKind::BadLabelLine, "line " + std::to_string(line_no) + ": expected 'seq_id<TAB>label'");
        }
        std::string id(line.substr(0, tab));
        std::string label(line.substr(tab + 1));
        auto [it, inserted] = table.emplace(id, label);
        if (!inserted && it->second != label) throw Error(ErrorKind::ConflictingLabel, id);
    }
    return table;
}

inline LabelTable parse_labels(std::istream& in) {
    std::string data = read_stream(in);
    return parse_labels(std::string_view(data));
}

// Per-record labels in record order. Every record must be labelled, and every table key
// must name a record.
inline std::vector<std::string> resolve_labels(std::span<const std::string> ids, const LabelTable& table) {
    std::vector<std::string> labels;
    labels.reserve(ids.size());
    for (const auto& id : ids) {
        auto it = table.find(id);
        if (it == table.end()) throw Error(ErrorKind::MissingLabel, "no label for sequence '" + id + "'");
        labels.push_back(it->second);
    }
    if (table.size() != ids.size()) {
        std::unordered_set<std::string_view> known(ids.begin(), ids.end());
        for (const auto& [id, label] : table) {
            if (!known.contains(id)) throw Error(ErrorKind::BadLabelLine, "label given for unknown sequence '" + id + "'");
        }
    }
    return labels;
}

}  // namespace spanseq
