#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pcstage {

enum class Errc {
    // data validation
    RaggedRow,
    NonNumericCell,
    NegativeValue,
    DuplicateId,
    EmptyInput,
    UnknownStage,
    MissingLabel,
    ShapeMismatch,
    SingleClass,
    EmptySelection,
    IndexOutOfRange,
    // usage / configuration
    InvalidArgument,
    Schema,
    StageLegality,
    Io,
    // numerics
    RankDeficient,
    NumericalFailure,
};

const char* to_string(Errc code);

/// Process exit status for an error category: 1 usage, 2 data validation,
/// 3 numerical failure.
int exit_code(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message);

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

/// Error raised while reading delimited text; carries 1-based line and
/// column of the offending cell (0 when not applicable).
class ParseError : public Error {
public:
    ParseError(Errc code, std::size_t line, std::size_t column, const std::string& detail);

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

} // namespace pcstage
