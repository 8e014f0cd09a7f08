#pragma once

#include <stdexcept>
#include <string>

namespace relcheck {

// Every failure surfaced by the library carries a short symbolic code
// (e.g. "UndeclaredName", "NoSuchPid") plus a human-readable message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace relcheck
