#include "bevkit/error.hpp"

namespace bevkit {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kContractViolation: return "contract_violation";
    case ErrorKind::kDegenerateFit: return "degenerate_fit";
    case ErrorKind::kDecodeFailure: return "decode_failure";
    case ErrorKind::kConfiguration: return "configuration";
    case ErrorKind::kMalformedJson: return "malformed_json";
    case ErrorKind::kSchemaViolation: return "schema_violation";
    case ErrorKind::kDanglingId: return "dangling_id";
    case ErrorKind::kBadMagic: return "bad_magic";
    case ErrorKind::kBadVersion: return "bad_version";
    case ErrorKind::kBadDtype: return "bad_dtype";
    case ErrorKind::kTruncated: return "truncated";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void raise(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace bevkit
