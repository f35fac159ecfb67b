#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gradpoly {

/// Invalid argument to a library operation (bad dimension, bad range, ...).
struct parameter_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Base for failures of the numerics themselves (as opposed to bad inputs).
struct numeric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Matrix or system without enough independent information (zero norm,
/// rank collapse, rank-deficient candidate set).
struct degeneracy_error : numeric_error {
    using numeric_error::numeric_error;
};

/// Singular matrix encountered during factorization.
struct factorization_error : numeric_error {
    using numeric_error::numeric_error;
};

/// An iterative procedure exceeded its iteration cap.
struct convergence_error : numeric_error {
    using numeric_error::numeric_error;
};

/// Runtime failure while evaluating an expression (log of non-positive,
/// division by zero, ...). Carries the offending graph node.
struct eval_error : numeric_error {
    int node_id;
    eval_error(const std::string& msg, int node) : numeric_error(msg), node_id(node) {}
};

/// Expression text rejected by the parser; `offset` is the byte position.
struct parse_error : parameter_error {
    std::size_t offset;
    parse_error(const std::string& msg, std::size_t at) : parameter_error(msg), offset(at) {}
};

/// An operation was called on an object that does not satisfy its
/// declared requirements (e.g. PCE statistics on a non-orthonormal basis).
struct contract_error : std::logic_error {
    using std::logic_error::logic_error;
};

/// Malformed file contents.
struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace gradpoly
