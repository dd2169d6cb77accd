#pragma once

#include <stdexcept>
#include <string>

namespace csd {

// Bad input, bad file, violated precondition: anything the caller (or the
// CLI user) can fix. The CLI maps this to exit code 2; everything else
// derived from std::exception maps to 3.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace csd
