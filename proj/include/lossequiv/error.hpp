#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lossequiv {

enum class Errc {
    EmptySeries,
    LengthMismatch,
    NegativeValue,
    NonFinite,
    ZeroTotal,
    InvalidSpec,
    ZeroWeightBase,
    EmptyAfterSkip,
    IndexOutOfRange,
    UnknownMeasure,
    InvalidParameters,
    DegenerateInput,
    ParseError,
    DuplicateId,
    InvalidConfig,
    Io,
};

std::string_view to_string(Errc code) noexcept;

/// Single exception type for the library; `code()` distinguishes the failure.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    [[nodiscard]] Errc code() const noexcept { return code_; }

    /// True for failures caused by bad user input (as opposed to I/O or internal failures).
    [[nodiscard]] bool is_validation() const noexcept { return code_ != Errc::Io; }

private:
    Errc code_;
};

}  // namespace lossequiv
