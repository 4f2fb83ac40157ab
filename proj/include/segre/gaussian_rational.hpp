#pragma once

#include <gmpxx.h>

#include <ostream>
#include <string>
#include <utility>

#include <segre/errors.hpp>

namespace segre
{

// Exact element re + im*i of Q(i). mpq_class keeps both parts canonical
// (positive denominators, lowest terms) after every operation.
class GaussianRational
{
public:
    GaussianRational() = default;
    GaussianRational(long v) : re_(v) {}
    GaussianRational(mpq_class re) : re_(std::move(re)) { re_.canonicalize(); }
    GaussianRational(mpq_class re, mpq_class im) : re_(std::move(re)), im_(std::move(im))
    {
        re_.canonicalize();
        im_.canonicalize();
    }

    static GaussianRational i() { return {0, 1}; }

    const mpq_class &re() const { return re_; }
    const mpq_class &im() const { return im_; }

    bool is_zero() const { return sgn(re_) == 0 && sgn(im_) == 0; }
    bool is_real() const { return sgn(im_) == 0; }
    bool is_one() const { return sgn(im_) == 0 && re_ == 1; }

    GaussianRational conj() const { return {re_, -im_}; }
    // |x|^2, always a non-negative rational.
    mpq_class norm() const { return re_ * re_ + im_ * im_; }

    GaussianRational inverse() const
    {
        if (is_zero()) {
            throw domain_error("division by zero in Q(i)");
        }
        mpq_class n = norm();
        return {re_ / n, -im_ / n};
    }

    GaussianRational &operator+=(const GaussianRational &o)
    {
        re_ += o.re_;
        if (sgn(o.im_) != 0) {
            im_ += o.im_;
        }
        return *this;
    }
    GaussianRational &operator-=(const GaussianRational &o)
    {
        re_ -= o.re_;
        if (sgn(o.im_) != 0) {
            im_ -= o.im_;
        }
        return *this;
    }
    GaussianRational &operator*=(const GaussianRational &o)
    {
        *this = *this * o;
        return *this;
    }
    GaussianRational &operator/=(const GaussianRational &o)
    {
        *this = *this * o.inverse();
        return *this;
    }

    // this += a*b without a temporary GaussianRational.
    void add_product(const GaussianRational &a, const GaussianRational &b)
    {
        const bool ar = sgn(a.im_) == 0, br = sgn(b.im_) == 0;
        if (ar && br) {
            re_ += a.re_ * b.re_;
        } else if (ar) {
            re_ += a.re_ * b.re_;
            im_ += a.re_ * b.im_;
        } else if (br) {
            re_ += a.re_ * b.re_;
            im_ += a.im_ * b.re_;
        } else {
            re_ += a.re_ * b.re_ - a.im_ * b.im_;
            im_ += a.re_ * b.im_ + a.im_ * b.re_;
        }
    }

    friend GaussianRational operator+(GaussianRational a, const GaussianRational &b) { return a += b; }
    friend GaussianRational operator-(GaussianRational a, const GaussianRational &b) { return a -= b; }
    friend GaussianRational operator-(const GaussianRational &a) { return {-a.re_, -a.im_}; }
    friend GaussianRational operator*(const GaussianRational &a, const GaussianRational &b)
    {
        GaussianRational r;
        r.add_product(a, b);
        return r;
    }
    friend GaussianRational operator/(const GaussianRational &a, const GaussianRational &b) { return a * b.inverse(); }

    friend bool operator==(const GaussianRational &a, const GaussianRational &b)
    {
        return a.re_ == b.re_ && a.im_ == b.im_;
    }
    friend bool operator!=(const GaussianRational &a, const GaussianRational &b) { return !(a == b); }

    // Canonical text: "p/q", "p/q*i", "p/q+r/s*i"; unit imaginary parts print as "i" / "-i".
    std::string to_string() const
    {
        if (is_zero()) {
            return "0";
        }
        if (sgn(im_) == 0) {
            return re_.get_str();
        }
        std::string ims;
        if (im_ == 1) {
            ims = "i";
        } else if (im_ == -1) {
            ims = "-i";
        } else {
            ims = im_.get_str() + "*i";
        }
        if (sgn(re_) == 0) {
            return ims;
        }
        return re_.get_str() + (ims[0] == '-' ? "" : "+") + ims;
    }

    friend std::ostream &operator<<(std::ostream &os, const GaussianRational &g) { return os << g.to_string(); }

private:
    mpq_class re_{0};
    mpq_class im_{0};
};

using GR = GaussianRational;

// Inverse of GaussianRational::to_string().
inline GaussianRational parse_gaussian(const std::string &text)
{
    if (text.empty()) {
        throw parse_error("empty coefficient literal", 0);
    }
    auto rational = [&](const std::string &s, std::size_t off) {
        mpq_class q;
        if (s.empty() || s == "+" || s == "-") {
            return mpq_class(s == "-" ? -1 : 1);
        }
        if (q.set_str(s[0] == '+' ? s.substr(1) : s, 10) != 0) {
            throw parse_error("malformed rational '" + s + "'", off);
        }
        q.canonicalize();
        return q;
    };
    if (text.back() != 'i') {
        return GaussianRational(rational(text, 0));
    }
    std::string body = text.substr(0, text.size() - 1);
    if (!body.empty() && body.back() == '*') {
        body.pop_back();
    }
    // split at the last sign that is not the leading one
    std::size_t split = std::string::npos;
    for (std::size_t k = body.size(); k-- > 1;) {
        if (body[k] == '+' || body[k] == '-') {
            split = k;
            break;
        }
    }
    if (split == std::string::npos) {
        return {0, rational(body, 0)};
    }
    return {rational(body.substr(0, split), 0), rational(body.substr(split), split)};
}

} // namespace segre
