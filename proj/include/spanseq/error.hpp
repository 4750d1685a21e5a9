#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spanseq {

enum class ErrorKind {
    Usage,
    UnknownPreset,
    Config,
    DuplicateId,
    EmptySequence,
    MalformedHeader,
    IllegalResidue,
    BadLabelLine,
    ConflictingLabel,
    MissingLabel,
    SchemeMismatch,
    IndexOutOfRange,
    Format,
    Io,
    Internal,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Usage: return "Usage";
        case ErrorKind::UnknownPreset: return "UnknownPreset";
        case ErrorKind::Config: return "Config";
        case ErrorKind::DuplicateId: return "DuplicateId";
        case ErrorKind::EmptySequence: return "EmptySequence";
        case ErrorKind::MalformedHeader: return "MalformedHeader";
        case ErrorKind::IllegalResidue: return "IllegalResidue";
        case ErrorKind::BadLabelLine: return "BadLabelLine";
        case ErrorKind::ConflictingLabel: return "ConflictingLabel";
        case ErrorKind::MissingLabel: return "MissingLabel";
        case ErrorKind::SchemeMismatch: return "SchemeMismatch";
        case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorKind::Format: return "Format";
        case ErrorKind::Io: return "Io";
        case ErrorKind::Internal: return "Internal";
    }
    return "Internal";
}

// Process exit code for an error kind: 1 usage, 2 data, 3 internal.
constexpr int exit_code(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Usage:
        case ErrorKind::UnknownPreset:
        case ErrorKind::Config:
            return 1;
        case ErrorKind::Internal:
            return 3;
        default:
            return 2;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& detail)
        : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
          kind_(kind),
          detail_(detail) {}

    ErrorKind kind() const noexcept { return kind_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorKind kind_;
    std::string detail_;
};

}  // namespace spanseq
