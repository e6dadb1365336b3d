#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>
#include <string_view>

namespace polarfermi {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Raised when a numerical procedure cannot certify its result.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(std::string_view module, std::string_view detail)
      : std::runtime_error(std::string(module) + ": " + std::string(detail)), module_(module) {}
  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

}  // namespace polarfermi
