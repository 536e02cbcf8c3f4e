#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace bevkit {

enum class ErrorKind {
  kContractViolation,
  kDegenerateFit,
  kDecodeFailure,
  kConfiguration,
  kMalformedJson,
  kSchemaViolation,
  kDanglingId,
  kBadMagic,
  kBadVersion,
  kBadDtype,
  kTruncated,
  kIo,
};

std::string_view to_string(ErrorKind kind);

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void raise(ErrorKind kind, const std::string& message);

inline void require(bool condition, const char* message) {
  if (!condition) raise(ErrorKind::kContractViolation, message);
}

}  // namespace bevkit
