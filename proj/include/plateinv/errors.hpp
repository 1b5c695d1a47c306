#pragma once

#include <stdexcept>
#include <string>

namespace plateinv {

/// Invalid arguments or configuration: wrong grid pairing, malformed input,
/// out-of-range indices. Maps to the CLI validation exit code.
class input_error : public std::invalid_argument {
public:
    explicit input_error(const std::string& what) : std::invalid_argument(what) {}
};

/// A point lies where an operation cannot evaluate (inside a source support,
/// on/inside a layer surface).
class geometry_error : public input_error {
public:
    explicit geometry_error(const std::string& what) : input_error(what) {}
};

/// Base for failures of the numerical stages themselves.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

/// Neumann-series contraction bound violated for the requested wavenumber.
class bound_violation_error : public numerical_error {
public:
    explicit bound_violation_error(const std::string& what) : numerical_error(what) {}
};

/// An iteration failed to converge within its term budget.
class divergence_error : public numerical_error {
public:
    explicit divergence_error(const std::string& what) : numerical_error(what) {}
};

/// A linear system is rank deficient or too ill-conditioned to trust.
class conditioning_error : public numerical_error {
public:
    conditioning_error(const std::string& what, double condition_estimate, int effective_rank = -1)
        : numerical_error(what), condition_estimate(condition_estimate), effective_rank(effective_rank) {}
    double condition_estimate;
    int effective_rank;
};

/// A recovery is refused because a nonzero-mass hypothesis fails.
class illposed_error : public numerical_error {
public:
    explicit illposed_error(const std::string& what) : numerical_error(what) {}
};

/// A recovered quantity contradicts the model class (e.g. negative density).
class consistency_error : public numerical_error {
public:
    explicit consistency_error(const std::string& what) : numerical_error(what) {}
};

/// A series truncation cannot meet the requested tolerance.
class truncation_error : public numerical_error {
public:
    truncation_error(const std::string& what, int required_degree)
        : numerical_error(what), required_degree(required_degree) {}
    int required_degree;
};

} // namespace plateinv
