#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace irmatch {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " +
                message),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

#define IRMATCH_DEFINE_ERROR(Name)   \
    class Name : public Error {      \
    public:                          \
        using Error::Error;          \
    };

IRMATCH_DEFINE_ERROR(EmptyDocument)
IRMATCH_DEFINE_ERROR(FormatError)
IRMATCH_DEFINE_ERROR(EmptyCorpus)
IRMATCH_DEFINE_ERROR(VocabTooSmall)
IRMATCH_DEFINE_ERROR(UnknownId)
IRMATCH_DEFINE_ERROR(ShapeMismatch)
IRMATCH_DEFINE_ERROR(IdOutOfRange)
IRMATCH_DEFINE_ERROR(LengthExceeded)
IRMATCH_DEFINE_ERROR(EmptySequence)
IRMATCH_DEFINE_ERROR(NonFiniteLoss)
IRMATCH_DEFINE_ERROR(NothingToMask)
IRMATCH_DEFINE_ERROR(NoMaskedPositions)
IRMATCH_DEFINE_ERROR(InsufficientGroups)
IRMATCH_DEFINE_ERROR(EmptyBatch)
IRMATCH_DEFINE_ERROR(ZeroVector)
IRMATCH_DEFINE_ERROR(DimensionMismatch)
IRMATCH_DEFINE_ERROR(FingerprintMismatch)
IRMATCH_DEFINE_ERROR(EmptyIndex)
IRMATCH_DEFINE_ERROR(EmptyInput)

#undef IRMATCH_DEFINE_ERROR

}  // namespace irmatch
