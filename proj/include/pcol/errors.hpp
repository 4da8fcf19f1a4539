#pragma once

#include <stdexcept>
#include <string>

namespace pcol {

// Error classes map to CLI exit codes: parse=2, solver=3, budget=4.

class parse_error : public std::runtime_error {
public:
    parse_error(int line, const std::string& what)
        : std::runtime_error("parse error at line " + std::to_string(line) + ": " + what),
          line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class budget_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class param_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class quadrature_error : public std::runtime_error {
public:
    quadrature_error(const std::string& what, double best, double bound)
        : std::runtime_error(what), best_estimate(best), achieved_bound(bound) {}
    double best_estimate;
    double achieved_bound;
};

} // namespace pcol
