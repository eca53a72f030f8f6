#pragma once

#include <stdexcept>
#include <string>

namespace pemfc {

// Bad configuration or scenario input. CLI exit code 2.
class ValidationError : public std::runtime_error {
public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Operating point the cell cannot sustain (starvation, above limiting
// current). CLI exit code 3.
class InfeasibleError : public std::runtime_error {
public:
  explicit InfeasibleError(const std::string& msg) : std::runtime_error(msg) {}
};

// Integrator or nonlinear-solver breakdown. CLI exit code 4.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace pemfc
