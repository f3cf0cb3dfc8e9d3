#ifndef EIKOREC_ERRORS_HPP
#define EIKOREC_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace eikorec {

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MeshError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IOError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parse failure in a text file; carries the 1-based line number.
struct FormatError : std::runtime_error {
    FormatError(const std::string& msg, long line)
        : std::runtime_error(msg + " (line " + std::to_string(line) + ")"), line_number(line) {}
    long line_number;
};

struct SingularMatrix : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotSymmetric : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Iterative solver hit maxit; best iterate travels with the exception.
struct IterationLimit : std::runtime_error {
    IterationLimit(const std::string& msg, std::vector<double> iterate, double rel_res)
        : std::runtime_error(msg), best_iterate(std::move(iterate)), relative_residual(rel_res) {}
    std::vector<double> best_iterate;
    double relative_residual;
};

struct NewtonDiverged : std::runtime_error {
    NewtonDiverged(const std::string& msg, std::vector<double> iterate, std::vector<double> history)
        : std::runtime_error(msg), best_iterate(std::move(iterate)), residual_history(std::move(history)) {}
    std::vector<double> best_iterate;
    std::vector<double> residual_history;
};

struct ContextMismatch : std::logic_error {
    using std::logic_error::logic_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace eikorec

#endif
