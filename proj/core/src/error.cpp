// SPDX-License-Identifier: Apache-2.0
#include "pinhole/error.hpp"

namespace pinhole
{

std::string_view to_string(ErrorKind kind)
{
    switch (kind)
    {
    case ErrorKind::parameter: return "parameter-error";
    case ErrorKind::shape: return "shape-error";
    case ErrorKind::unsupported_configuration: return "unsupported-configuration";
    case ErrorKind::singularity: return "singularity-error";
    case ErrorKind::numeric: return "numeric-error";
    case ErrorKind::rank_deficiency: return "rank-deficiency";
    case ErrorKind::estimation: return "estimation-error";
    case ErrorKind::alignment: return "alignment-error";
    case ErrorKind::interpolation: return "interpolation-error";
    case ErrorKind::undefined_metric: return "undefined-metric";
    case ErrorKind::io: return "io-error";
    case ErrorKind::format: return "format-error";
    case ErrorKind::fingerprint_mismatch: return "fingerprint-mismatch";
    }
    return "error";
}

} // namespace pinhole
