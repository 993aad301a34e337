#ifndef LTSSL_ERRORS_HPP
#define LTSSL_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ltssl {

// Exit-code mapping used by the CLI: std::invalid_argument -> 1 (validation),
// NumericError -> 2, IoError -> 3.

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ltssl

#endif
