#pragma once

#include <stdexcept>
#include <string>

namespace portsim {

// A contract violation inside a running model (scheduling in the past,
// routing a lorry with no matching edge, ...). These signal bugs in the
// model or engine, not bad user input.
class ModelError : public std::logic_error {
public:
    explicit ModelError(const std::string& what) : std::logic_error(what) {}
};

// Scenario file could not be read or is not valid JSON.
class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace portsim
