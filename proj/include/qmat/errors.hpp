#pragma once

#include <stdexcept>
#include <string>

namespace qmat {

/// Exit-code category used by the CLI: math failures (singular input,
/// failed pivot, ...) map to exit 1, malformed requests and files to exit 2.
enum class error_category { domain, usage };

/// Root of all library errors. `kind()` is a stable identifier that the
/// CLI prints exactly once on stderr and tests match against.
class error : public std::runtime_error {
public:
    error(std::string kind, error_category cat, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)), cat_(cat) {}

    const std::string& kind() const noexcept { return kind_; }
    error_category category() const noexcept { return cat_; }

private:
    std::string kind_;
    error_category cat_;
};

#define QMAT_DEFINE_ERROR(class_name, kind_str, cat)                           \
    class class_name : public error {                                          \
    public:                                                                    \
        explicit class_name(const std::string& msg)                            \
            : error(kind_str, error_category::cat, msg) {}                     \
    }

QMAT_DEFINE_ERROR(inexact_division, "InexactDivision", domain);
QMAT_DEFINE_ERROR(division_by_zero, "DivisionByZero", domain);
QMAT_DEFINE_ERROR(shape_mismatch, "ShapeMismatch", usage);
QMAT_DEFINE_ERROR(index_out_of_range, "IndexOutOfRange", usage);
QMAT_DEFINE_ERROR(duplicate_entry, "DuplicateEntry", usage);
QMAT_DEFINE_ERROR(singular_matrix, "SingularMatrix", domain);
QMAT_DEFINE_ERROR(singular_leading_block, "SingularLeadingBlock", domain);
QMAT_DEFINE_ERROR(not_symmetric, "NotSymmetric", domain);
QMAT_DEFINE_ERROR(not_positive_definite, "NotPositiveDefinite", domain);
QMAT_DEFINE_ERROR(irrational_pivot, "IrrationalPivot", domain);
QMAT_DEFINE_ERROR(parse_error, "ParseError", usage);
QMAT_DEFINE_ERROR(unsupported_field, "UnsupportedField", usage);
QMAT_DEFINE_ERROR(invalid_spec, "InvalidSpec", usage);
QMAT_DEFINE_ERROR(cycle_detected, "CycleDetected", domain);
QMAT_DEFINE_ERROR(worker_panic, "WorkerPanic", domain);
QMAT_DEFINE_ERROR(result_mismatch, "ResultMismatch", domain);
QMAT_DEFINE_ERROR(inconsistent_residues, "InconsistentResidues", domain);
QMAT_DEFINE_ERROR(unlucky_prime_exhaustion, "UnluckyPrimeExhaustion", domain);
QMAT_DEFINE_ERROR(config_error, "ConfigError", usage);

#undef QMAT_DEFINE_ERROR

} // namespace qmat
