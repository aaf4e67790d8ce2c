#pragma once

#include <stdexcept>
#include <string>

namespace leadsheet {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace leadsheet
