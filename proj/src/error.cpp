#include "cwrgeom/error.hpp"

namespace cwrgeom {

const char* to_string(ErrorKind kind) noexcept {
    switch (kind) {
        case ErrorKind::Io: return "io error";
        case ErrorKind::Format: return "format error";
        case ErrorKind::Consistency: return "consistency error";
        case ErrorKind::Data: return "data error";
        case ErrorKind::Argument: return "argument error";
        case ErrorKind::Precondition: return "precondition error";
        case ErrorKind::Fit: return "fit error";
        case ErrorKind::Numeric: return "numeric error";
    }
    return "error";
}

}  // namespace cwrgeom
