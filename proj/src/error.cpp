#include "opk/error.hpp"

namespace opk {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::FieldMismatch: return "FieldMismatch";
    case ErrorCode::NonSemisimpleContext: return "NonSemisimpleContext";
    case ErrorCode::NotFinitelySupported: return "NotFinitelySupported";
    case ErrorCode::NotCertifiablyConvergent: return "NotCertifiablyConvergent";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::UnknownName: return "UnknownName";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SortError: return "SortError";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Error";
}

}  // namespace opk
