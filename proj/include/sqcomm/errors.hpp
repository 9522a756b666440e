#pragma once

#include <stdexcept>
#include <string>

namespace sqcomm {

/// Base class of every error raised by the library.
class error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define SQCOMM_DEFINE_ERROR(name)             \
    class name : public error {               \
    public:                                   \
        using error::error;                   \
    }

// sampling and query access
SQCOMM_DEFINE_ERROR(all_zero);
SQCOMM_DEFINE_ERROR(index_out_of_range);
SQCOMM_DEFINE_ERROR(timeout);
SQCOMM_DEFINE_ERROR(not_dominated);
SQCOMM_DEFINE_ERROR(invalid_argument);

// protocols
SQCOMM_DEFINE_ERROR(dimension_mismatch);
SQCOMM_DEFINE_ERROR(already_setup);
SQCOMM_DEFINE_ERROR(not_setup);
SQCOMM_DEFINE_ERROR(cancellation);
SQCOMM_DEFINE_ERROR(replay_divergence);

// oracle
SQCOMM_DEFINE_ERROR(gamma_undefined);
SQCOMM_DEFINE_ERROR(not_hermitian);
SQCOMM_DEFINE_ERROR(bad_dimension);
SQCOMM_DEFINE_ERROR(numerical_failure);

// reductions
SQCOMM_DEFINE_ERROR(infeasible_promise);
SQCOMM_DEFINE_ERROR(zero_vector);
SQCOMM_DEFINE_ERROR(zero_matrix);
SQCOMM_DEFINE_ERROR(promise_violation);

// harness
SQCOMM_DEFINE_ERROR(too_few_samples);

/// Configuration error carrying the JSON path of the offending field.
class config_error : public error {
public:
    config_error(std::string field, const std::string& what)
        : error(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

#undef SQCOMM_DEFINE_ERROR

} // namespace sqcomm
