#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace latentedit {

enum class ErrorCode {
    // data / io
    IoError,
    BadMagic,
    UnsupportedDtype,
    UnsupportedRank,
    TruncatedFile,
    RowCountMismatch,
    DimensionMismatch,
    ScaleMismatch,
    // configuration / caller errors
    ConfigInvalid,
    IndexOutOfRange,
    OutOfRange,
    OutOfDomain,
    DimensionError,
    // numeric
    NonFinite,
    DegenerateData,
    TooFewSamples,
    BatchTooSmall,
    SingleClass,
    NonPSD,
    AllZeroEmbeddings,
    OracleFailure,
};

constexpr std::string_view to_string(ErrorCode c) {
    switch (c) {
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::UnsupportedDtype: return "UnsupportedDtype";
        case ErrorCode::UnsupportedRank: return "UnsupportedRank";
        case ErrorCode::TruncatedFile: return "TruncatedFile";
        case ErrorCode::RowCountMismatch: return "RowCountMismatch";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ScaleMismatch: return "ScaleMismatch";
        case ErrorCode::ConfigInvalid: return "ConfigInvalid";
        case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::OutOfDomain: return "OutOfDomain";
        case ErrorCode::DimensionError: return "DimensionError";
        case ErrorCode::NonFinite: return "NonFinite";
        case ErrorCode::DegenerateData: return "DegenerateData";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::BatchTooSmall: return "BatchTooSmall";
        case ErrorCode::SingleClass: return "SingleClass";
        case ErrorCode::NonPSD: return "NonPSD";
        case ErrorCode::AllZeroEmbeddings: return "AllZeroEmbeddings";
        case ErrorCode::OracleFailure: return "OracleFailure";
    }
    return "Unknown";
}

/// Coarse classification used for process exit codes.
enum class ErrorKind { Config, Data, Numeric };

constexpr ErrorKind kind_of(ErrorCode c) {
    switch (c) {
        case ErrorCode::ConfigInvalid:
        case ErrorCode::IndexOutOfRange:
        case ErrorCode::OutOfRange:
        case ErrorCode::OutOfDomain:
        case ErrorCode::DimensionError:
            return ErrorKind::Config;
        case ErrorCode::NonFinite:
        case ErrorCode::DegenerateData:
        case ErrorCode::TooFewSamples:
        case ErrorCode::BatchTooSmall:
        case ErrorCode::SingleClass:
        case ErrorCode::NonPSD:
        case ErrorCode::AllZeroEmbeddings:
        case ErrorCode::OracleFailure:
            return ErrorKind::Numeric;
        default:
            return ErrorKind::Data;
    }
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool ok, ErrorCode code, const std::string& what) {
    if (!ok) fail(code, what);
}

}  // namespace latentedit
