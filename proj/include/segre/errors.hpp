#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace segre
{

// Base of every error raised by the library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Two series over different variable lists or caps were combined.
struct alignment_error : error {
    using error::error;
};

struct unknown_variable : error {
    using error::error;
};

// invert_unit() on a series with zero constant term.
struct not_a_unit : error {
    using error::error;
};

// A required truncation order exceeds what the data carries.
struct cap_exhausted : error {
    using error::error;
};

// Bad arguments to a pure function (m < n, non-square matrix, ...).
struct domain_error : error {
    using error::error;
};

// Singular linearization at the base point. The exact determinant is kept
// as its canonical text so callers can report it verbatim.
struct nondegeneracy_error : error {
    nondegeneracy_error(const std::string &what, std::string det) : error(what), determinant(std::move(det)) {}
    std::string determinant;
};

struct parse_error : error {
    parse_error(const std::string &what, std::size_t pos)
        : error(what + " at position " + std::to_string(pos)), position(pos)
    {
    }
    std::size_t position;
};

// Coefficient pair violating coeff(a,b,k) == conj(coeff(b,a,k)).
struct reality_error : error {
    using error::error;
};

// Malformed data file (gamma table, input file).
struct data_error : error {
    using error::error;
};

// A post-condition check of the library itself failed.
struct internal_error : error {
    using error::error;
};

} // namespace segre
