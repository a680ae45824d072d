#pragma once

#include <stdexcept>
#include <string>

namespace finelab {

// Base class for everything this library throws on purpose.
struct error : std::runtime_error {
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// Point outside the admissible domain of an evaluator / walk.
struct domain_error : error {
    using error::error;
};

// Ill-posed geometric input (overlapping arcs, corners off the circle, ...).
struct geometry_error : error {
    using error::error;
};

// Argument outside its typed range.
struct parameter_error : error {
    using error::error;
};

// Caller-asserted precondition failed a spot check.
struct precondition_error : error {
    using error::error;
};

// An iterative construction ran out of budget without meeting its target.
struct construction_error : error {
    using error::error;
};

// Integrand not finite at a quadrature node.
struct singular_node_error : error {
    using error::error;
};

// Scenario/certificate file problems; carries location info in the message.
struct parse_error : error {
    parse_error(const std::string& msg, int line, const std::string& field)
        : error(msg + " (line " + std::to_string(line) + ", field '" + field + "')"),
          line(line),
          field(field) {}
    int line;
    std::string field;
};

}  // namespace finelab
