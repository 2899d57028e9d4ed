// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pinhole
{

// Failure categories surfaced by the library. The CLI maps these onto exit codes.
enum class ErrorKind
{
    parameter,
    shape,
    unsupported_configuration,
    singularity,
    numeric,
    rank_deficiency,
    estimation,
    alignment,
    interpolation,
    undefined_metric,
    io,
    format,
    fingerprint_mismatch,
};

std::string_view to_string(ErrorKind kind);

class Error : public std::runtime_error
{
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind)
    {
    }

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what)
{
    throw Error(kind, what);
}

inline void require(bool condition, ErrorKind kind, const std::string& what)
{
    if (!condition)
        throw Error(kind, what);
}

} // namespace pinhole
