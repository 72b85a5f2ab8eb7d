// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qpat {

enum class ErrorCode {
    InvalidArgument,
    InvalidGeometry,
    GeometryMismatch,
    EmptyMask,
    BadMagic,
    BadHeader,
    UnsupportedFormat,
    PayloadMismatch,
    NonFiniteValue,
    Io,
    UnsupportedDirection,
    BeamPairMismatch,
    NonPositiveProfile,
    EmptySupport,
    TransmissionRequired,
    SolverFailure,
    DegenerateIlluminations,
    AnchorOutsideSupport,
    DisconnectedMask,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; callers dispatch on code().
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace qpat
