#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace orbitshift {

// Base class for everything thrown by this library.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what_arg) : std::runtime_error(what_arg) {}
};

// Shape or size mismatch between operands, or a dimension cap exceeded.
class dimension_error : public error {
public:
    using error::error;
};

// Invalid argument that is not a numeric failure (empty tuple, bad permutation).
class domain_error : public error {
public:
    using error::error;
};

class parse_error : public error {
public:
    parse_error(const std::string& message, int line, int column)
        : error(message + " (line " + std::to_string(line) + ", column " +
                std::to_string(column) + ")"),
          line_(line),
          column_(column) {}

    int line() const noexcept { return line_; }
    int column() const noexcept { return column_; }

private:
    int line_;
    int column_;
};

// Domain violation while evaluating an expression: division by zero, log of a
// non-positive argument, zero base with a negative exponent, or a non-finite
// intermediate.  Carries the offending subexpression in printed form.
class eval_error : public error {
public:
    eval_error(const std::string& message, std::string subexpression)
        : error(message + " in '" + subexpression + "'"),
          subexpression_(std::move(subexpression)) {}

    const std::string& subexpression() const noexcept { return subexpression_; }

private:
    std::string subexpression_;
};

enum class flow_failure {
    time_bound,         // |t| exceeds the configured max_time
    trajectory_escape,  // a trajectory point left the configured domain radius
};

class flow_error : public error {
public:
    flow_error(flow_failure kind, const std::string& message)
        : error(message), kind_(kind) {}

    flow_failure kind() const noexcept { return kind_; }

private:
    flow_failure kind_;
};

// Failure inside one stage of a shift map; carries the 1-based stage index.
class stage_error : public error {
public:
    stage_error(int stage, const std::string& message)
        : error("stage " + std::to_string(stage) + ": " + message), stage_(stage) {}

    int stage() const noexcept { return stage_; }

private:
    int stage_;
};

// Per-point failure of a foliation decomposition: a leaf-preservation
// violation or a diverging time retrieval.  Carries the witness point.
class reconstruction_error : public error {
public:
    reconstruction_error(const std::string& message, std::vector<double> point)
        : error(message), point_(std::move(point)) {}

    const std::vector<double>& point() const noexcept { return point_; }

private:
    std::vector<double> point_;
};

}  // namespace orbitshift
