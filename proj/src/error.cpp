#include "pcstage/error.hpp"

namespace pcstage {

const char* to_string(Errc code) {
    switch (code) {
    case Errc::RaggedRow: return "RaggedRow";
    case Errc::NonNumericCell: return "NonNumericCell";
    case Errc::NegativeValue: return "NegativeValue";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::UnknownStage: return "UnknownStage";
    case Errc::MissingLabel: return "MissingLabel";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::SingleClass: return "SingleClass";
    case Errc::EmptySelection: return "EmptySelection";
    case Errc::IndexOutOfRange: return "IndexOutOfRange";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Schema: return "Schema";
    case Errc::StageLegality: return "StageLegality";
    case Errc::Io: return "Io";
    case Errc::RankDeficient: return "RankDeficient";
    case Errc::NumericalFailure: return "NumericalFailure";
    }
    return "Unknown";
}

int exit_code(Errc code) {
    switch (code) {
    case Errc::InvalidArgument:
    case Errc::Schema:
    case Errc::StageLegality:
    case Errc::Io:
        return 1;
    case Errc::RankDeficient:
    case Errc::NumericalFailure:
        return 3;
    default:
        return 2;
    }
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

ParseError::ParseError(Errc code, std::size_t line, std::size_t column, const std::string& detail)
    : Error(code, detail + " (line " + std::to_string(line) + ", column " + std::to_string(column) + ")"),
      line_(line), column_(column) {}

} // namespace pcstage
