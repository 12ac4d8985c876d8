#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace facectl {

enum class ErrorKind {
    Dimension,
    Parameter,
    Range,
    Numeric,
    Parse,
    Structural,
    Contract,
    Io,
    EmptyInput,
};

std::string_view to_string(ErrorKind kind);

// Every failure raised by the library carries a kind so the CLI can emit a
// machine-parseable error line.
class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define FACECTL_ERROR_TYPE(Name, Kind)                                        \
    class Name : public Error {                                               \
    public:                                                                   \
        explicit Name(const std::string& message) : Error(Kind, message) {}   \
    }

FACECTL_ERROR_TYPE(DimensionError, ErrorKind::Dimension);
FACECTL_ERROR_TYPE(ParameterError, ErrorKind::Parameter);
FACECTL_ERROR_TYPE(RangeError, ErrorKind::Range);
FACECTL_ERROR_TYPE(NumericError, ErrorKind::Numeric);
FACECTL_ERROR_TYPE(ParseError, ErrorKind::Parse);
FACECTL_ERROR_TYPE(StructuralError, ErrorKind::Structural);
FACECTL_ERROR_TYPE(ContractError, ErrorKind::Contract);
FACECTL_ERROR_TYPE(IoError, ErrorKind::Io);
FACECTL_ERROR_TYPE(EmptyInputError, ErrorKind::EmptyInput);

#undef FACECTL_ERROR_TYPE

}  // namespace facectl
