#ifndef UNITKIT_ERROR_HPP
#define UNITKIT_ERROR_HPP

#include <stdexcept>
#include <string>

namespace unitkit {

/// Error thrown by every operation on validation or I/O failure.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace unitkit

#endif
