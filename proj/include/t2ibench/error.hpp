#pragma once

#include <stdexcept>
#include <string>

namespace t2ibench {

enum class ErrorKind {
  kIo,          // file missing or unreadable/unwritable
  kFormat,      // malformed file contents
  kDomain,      // numerical precondition or dataset consistency failure
  kValidation,  // user-supplied configuration rejected
  kNotFound,    // unknown name (profile, chart kind, cohort)
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace t2ibench
