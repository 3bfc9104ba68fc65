#pragma once

#include <stdexcept>
#include <string>

namespace tripletrec {

/// Thrown for every recoverable failure: bad input files, contract
/// violations, training divergence. The CLI maps it to a nonzero exit.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& message) : std::runtime_error(message) {}
};

}  // namespace tripletrec
