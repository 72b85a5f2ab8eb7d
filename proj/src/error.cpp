// Copyright qpat contributors
// SPDX-License-Identifier: Apache-2.0
#include "qpat/error.hpp"

namespace qpat {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidGeometry: return "InvalidGeometry";
    case ErrorCode::GeometryMismatch: return "GeometryMismatch";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::BadHeader: return "BadHeader";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::PayloadMismatch: return "PayloadMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::Io: return "Io";
    case ErrorCode::UnsupportedDirection: return "UnsupportedDirection";
    case ErrorCode::BeamPairMismatch: return "BeamPairMismatch";
    case ErrorCode::NonPositiveProfile: return "NonPositiveProfile";
    case ErrorCode::EmptySupport: return "EmptySupport";
    case ErrorCode::TransmissionRequired: return "TransmissionRequired";
    case ErrorCode::SolverFailure: return "SolverFailure";
    case ErrorCode::DegenerateIlluminations: return "DegenerateIlluminations";
    case ErrorCode::AnchorOutsideSupport: return "AnchorOutsideSupport";
    case ErrorCode::DisconnectedMask: return "DisconnectedMask";
    }
    return "Unknown";
}

}  // namespace qpat
