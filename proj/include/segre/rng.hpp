#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include <segre/gaussian_rational.hpp>

namespace segre
{

// Deterministic Gaussian-rational draws. Numerators are uniform in
// [-max_num, max_num], denominators in [1, max_den]; the mapping from the
// raw 64-bit stream is plain modulo so sequences are identical on every
// platform (std::uniform_int_distribution is implementation-defined).
class ExactRng
{
public:
    explicit ExactRng(std::uint64_t seed) : eng_(seed) {}

    long integer(long lo, long hi)
    {
        const auto span = std::uint64_t(hi - lo + 1);
        return lo + long(eng_() % span);
    }

    mpq_class rational(long max_num = 97, long max_den = 97)
    {
        long p = integer(-max_num, max_num);
        long q = integer(1, max_den);
        mpq_class r(p, q);
        r.canonicalize();
        return r;
    }

    GaussianRational gaussian(long max_num = 97, long max_den = 97)
    {
        mpq_class re = rational(max_num, max_den);
        mpq_class im = rational(max_num, max_den);
        return {re, im};
    }

    std::vector<GaussianRational> point(std::size_t dim, long max_num = 97, long max_den = 97)
    {
        std::vector<GaussianRational> p;
        for (std::size_t k = 0; k < dim; ++k) {
            p.push_back(gaussian(max_num, max_den));
        }
        return p;
    }

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
};

} // namespace segre
