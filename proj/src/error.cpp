#include "trendpu/error.hpp"

namespace trendpu {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Domain: return "domain";
        case ErrorKind::Length: return "length";
        case ErrorKind::Shape: return "shape";
        case ErrorKind::Size: return "size";
        case ErrorKind::Degenerate: return "degenerate";
        case ErrorKind::Parse: return "parse";
        case ErrorKind::Config: return "config";
        case ErrorKind::Numeric: return "numeric";
        case ErrorKind::Unlearnable: return "unlearnable";
        case ErrorKind::EvaluationUnavailable: return "evaluation-unavailable";
        case ErrorKind::Bounds: return "bounds";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

}  // namespace trendpu
