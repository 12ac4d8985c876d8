#include "facectl/error.hpp"

namespace facectl {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::Dimension: return "dimension_error";
        case ErrorKind::Parameter: return "parameter_error";
        case ErrorKind::Range: return "range_error";
        case ErrorKind::Numeric: return "numeric_error";
        case ErrorKind::Parse: return "parse_error";
        case ErrorKind::Structural: return "structural_error";
        case ErrorKind::Contract: return "contract_error";
        case ErrorKind::Io: return "io_error";
        case ErrorKind::EmptyInput: return "empty_input_error";
    }
    return "error";
}

}  // namespace facectl
