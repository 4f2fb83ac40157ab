#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <segre/errors.hpp>
#include <segre/gaussian_rational.hpp>

namespace segre
{

// Exponent vector, one entry per variable of the ambient list.
using Multiindex = std::vector<int>;
using VarList = std::vector<std::string>;

inline int degree(const Multiindex &m)
{
    int d = 0;
    for (int e : m) {
        d += e;
    }
    return d;
}

namespace detail
{

// Monomials are packed 8 bits per variable, first variable in the most
// significant byte, so that within a fixed degree a larger key is a
// lexicographically larger exponent vector.
using Key = std::uint64_t;

inline constexpr int max_vars = 8;
inline constexpr int max_cap = 255;

inline int shift_of(int var) { return 8 * (max_vars - 1 - var); }

inline Key pack(const Multiindex &m)
{
    Key k = 0;
    for (std::size_t v = 0; v < m.size(); ++v) {
        if (m[v] < 0 || m[v] > max_cap) {
            throw domain_error("exponent out of range");
        }
        k |= Key(m[v]) << shift_of(int(v));
    }
    return k;
}

inline int exponent(Key k, int var) { return int((k >> shift_of(var)) & 0xff); }

inline Multiindex unpack(Key k, int nvars)
{
    Multiindex m(std::size_t(nvars), 0);
    for (int v = 0; v < nvars; ++v) {
        m[std::size_t(v)] = exponent(k, v);
    }
    return m;
}

inline int key_degree(Key k)
{
    int d = 0;
    for (; k != 0; k >>= 8) {
        d += int(k & 0xff);
    }
    return d;
}

struct Term {
    Key key;
    int deg;
    GaussianRational c;
};

// Canonical order: ascending total degree, then descending lex.
inline bool term_less(const Term &a, const Term &b)
{
    return a.deg != b.deg ? a.deg < b.deg : a.key > b.key;
}

using Accumulator = std::unordered_map<Key, GaussianRational>;

} // namespace detail

// Multivariate power series over Q(i), truncated at a total-degree cap.
//
// Every stored monomial has degree <= cap and every stored coefficient is
// nonzero. A series flagged polynomial is additionally known to have no
// terms above its cap (parsed input, constants, exact products); only such
// series may be re-expanded around a nonzero point.
class TruncatedSeries
{
public:
    TruncatedSeries() : TruncatedSeries(VarList{}, 0) {}

    TruncatedSeries(VarList vars, int cap)
        : vars_(std::make_shared<const VarList>(std::move(vars))), cap_(cap), poly_(true)
    {
        check_space();
    }

    static TruncatedSeries constant(VarList vars, int cap, const GaussianRational &c)
    {
        TruncatedSeries s(std::move(vars), cap);
        if (!c.is_zero()) {
            s.terms_.push_back({0, 0, c});
        }
        return s;
    }

    static TruncatedSeries variable(VarList vars, int cap, const std::string &name)
    {
        TruncatedSeries s(std::move(vars), cap);
        Multiindex m(s.vars_->size(), 0);
        m[std::size_t(s.index_of(name))] = 1;
        return monomial(*s.vars_, cap, m, 1);
    }

    static TruncatedSeries monomial(VarList vars, int cap, const Multiindex &m, const GaussianRational &c)
    {
        TruncatedSeries s(std::move(vars), cap);
        if (m.size() != s.vars_->size()) {
            throw domain_error("multiindex length does not match variable count");
        }
        if (degree(m) > cap) {
            s.poly_ = c.is_zero();
        } else if (!c.is_zero()) {
            s.terms_.push_back({detail::pack(m), degree(m), c});
        }
        return s;
    }

    static TruncatedSeries from_terms(VarList vars, int cap, const std::vector<std::pair<Multiindex, GaussianRational>> &terms,
                                      bool polynomial)
    {
        TruncatedSeries s(std::move(vars), cap);
        detail::Accumulator acc;
        for (const auto &[m, c] : terms) {
            if (m.size() != s.vars_->size()) {
                throw domain_error("multiindex length does not match variable count");
            }
            acc[detail::pack(m)] += c;
        }
        return build(s.vars_, cap, std::move(acc), polynomial);
    }

    const VarList &vars() const { return *vars_; }
    int nvars() const { return int(vars_->size()); }
    int cap() const { return cap_; }
    bool is_polynomial() const { return poly_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    const std::vector<detail::Term> &raw_terms() const { return terms_; }

    // (multiindex, coefficient) pairs in canonical order.
    std::vector<std::pair<Multiindex, GaussianRational>> terms() const
    {
        std::vector<std::pair<Multiindex, GaussianRational>> out;
        out.reserve(terms_.size());
        for (const auto &t : terms_) {
            out.emplace_back(detail::unpack(t.key, nvars()), t.c);
        }
        return out;
    }

    int index_of(const std::string &name) const
    {
        auto it = std::find(vars_->begin(), vars_->end(), name);
        if (it == vars_->end()) {
            throw unknown_variable("unknown variable '" + name + "'");
        }
        return int(it - vars_->begin());
    }
    bool has_var(const std::string &name) const
    {
        return std::find(vars_->begin(), vars_->end(), name) != vars_->end();
    }

    GaussianRational coeff(const Multiindex &m) const
    {
        if (int(m.size()) != nvars()) {
            throw domain_error("multiindex length does not match variable count");
        }
        if (degree(m) > cap_) {
            throw cap_exhausted("coefficient requested above the truncation cap");
        }
        detail::Term probe{detail::pack(m), degree(m), {}};
        auto it = std::lower_bound(terms_.begin(), terms_.end(), probe, detail::term_less);
        if (it != terms_.end() && it->key == probe.key) {
            return it->c;
        }
        return {};
    }

    GaussianRational constant_term() const
    {
        if (!terms_.empty() && terms_.front().deg == 0) {
            return terms_.front().c;
        }
        return {};
    }

    int max_degree() const { return terms_.empty() ? -1 : terms_.back().deg; }

    // Lowest degree carrying a nonzero coefficient; cap+1 for the zero series.
    int valuation() const { return terms_.empty() ? cap_ + 1 : terms_.front().deg; }

    bool same_space(const TruncatedSeries &o) const
    {
        return cap_ == o.cap_ && (vars_ == o.vars_ || *vars_ == *o.vars_);
    }

    // Lower the cap; raising is only legal for polynomial series whose
    // degree fits under the new cap.
    TruncatedSeries with_cap(int cap) const
    {
        if (cap > cap_ && !(poly_ && max_degree() <= cap_)) {
            throw alignment_error("cannot raise the cap of a truncated (non-polynomial) series");
        }
        TruncatedSeries r(*this);
        r.cap_ = cap;
        r.check_space();
        if (cap < cap_) {
            auto it = std::find_if(r.terms_.begin(), r.terms_.end(), [cap](const detail::Term &t) { return t.deg > cap; });
            if (it != r.terms_.end()) {
                r.terms_.erase(it, r.terms_.end());
                r.poly_ = false;
            }
        }
        return r;
    }

    TruncatedSeries derivative(int var, int times = 1) const
    {
        if (var < 0 || var >= nvars()) {
            throw unknown_variable("variable index out of range");
        }
        if (times == 0) {
            return *this;
        }
        int cap = cap_ - times;
        if (cap < 0) {
            if (!poly_) {
                throw cap_exhausted("derivative order exceeds the truncation cap");
            }
            cap = 0;
        }
        detail::Accumulator acc;
        const detail::Key unit = detail::Key(1) << detail::shift_of(var);
        for (const auto &t : terms_) {
            int e = detail::exponent(t.key, var);
            if (e < times) {
                continue;
            }
            long f = 1;
            for (int k = 0; k < times; ++k) {
                f *= (e - k);
            }
            acc[t.key - unit * detail::Key(times)] += t.c * GaussianRational(f);
        }
        return build(vars_, cap, std::move(acc), poly_);
    }

    TruncatedSeries derivative(const std::string &name, int times = 1) const { return derivative(index_of(name), times); }

    TruncatedSeries derivative(const Multiindex &m) const
    {
        if (int(m.size()) != nvars()) {
            throw domain_error("multiindex length does not match variable count");
        }
        TruncatedSeries r = *this;
        for (int v = 0; v < nvars(); ++v) {
            if (m[std::size_t(v)] > 0) {
                r = r.derivative(v, m[std::size_t(v)]);
            }
        }
        return r;
    }

    TruncatedSeries conj_coeffs() const
    {
        TruncatedSeries r(*this);
        for (auto &t : r.terms_) {
            t.c = t.c.conj();
        }
        return r;
    }

    // Same coefficients over a renamed variable list of the same length.
    TruncatedSeries renamed(VarList names) const
    {
        if (names.size() != vars_->size()) {
            throw domain_error("rename needs one name per variable");
        }
        TruncatedSeries r(*this);
        r.vars_ = std::make_shared<const VarList>(std::move(names));
        r.check_space();
        return r;
    }

    // Re-index into a larger variable list that contains every own variable.
    TruncatedSeries embed(const VarList &target) const
    {
        std::vector<int> where;
        for (const auto &v : *vars_) {
            auto it = std::find(target.begin(), target.end(), v);
            if (it == target.end()) {
                throw unknown_variable("cannot embed: '" + v + "' missing from target space");
            }
            where.push_back(int(it - target.begin()));
        }
        TruncatedSeries r(target, cap_);
        r.poly_ = poly_;
        r.terms_.reserve(terms_.size());
        for (const auto &t : terms_) {
            detail::Key k = 0;
            for (int v = 0; v < nvars(); ++v) {
                k |= detail::Key(detail::exponent(t.key, v)) << detail::shift_of(where[std::size_t(v)]);
            }
            r.terms_.push_back({k, t.deg, t.c});
        }
        std::sort(r.terms_.begin(), r.terms_.end(), detail::term_less);
        return r;
    }

    // Value at a point. Only the origin is allowed for truncated series.
    GaussianRational evaluate(const std::vector<GaussianRational> &point) const
    {
        if (int(point.size()) != nvars()) {
            throw domain_error("point dimension does not match variable count");
        }
        bool origin = std::all_of(point.begin(), point.end(), [](const GaussianRational &g) { return g.is_zero(); });
        if (origin) {
            return constant_term();
        }
        if (!poly_) {
            throw cap_exhausted("exact evaluation away from the origin needs a polynomial series");
        }
        GaussianRational acc;
        std::vector<std::vector<GaussianRational>> pw(point.size());
        for (const auto &t : terms_) {
            GaussianRational v = t.c;
            for (int k = 0; k < nvars(); ++k) {
                int e = detail::exponent(t.key, k);
                auto &p = pw[std::size_t(k)];
                while (int(p.size()) <= e) {
                    p.push_back(p.empty() ? GaussianRational(1) : p.back() * point[std::size_t(k)]);
                }
                v *= p[std::size_t(e)];
            }
            acc += v;
        }
        return acc;
    }

    TruncatedSeries &operator+=(const TruncatedSeries &o) { return *this = add(*this, o, false); }
    TruncatedSeries &operator-=(const TruncatedSeries &o) { return *this = add(*this, o, true); }
    TruncatedSeries &operator*=(const TruncatedSeries &o) { return *this = *this * o; }

    friend TruncatedSeries operator+(const TruncatedSeries &a, const TruncatedSeries &b) { return add(a, b, false); }
    friend TruncatedSeries operator-(const TruncatedSeries &a, const TruncatedSeries &b) { return add(a, b, true); }
    friend TruncatedSeries operator-(const TruncatedSeries &a)
    {
        TruncatedSeries r(a);
        for (auto &t : r.terms_) {
            t.c = -t.c;
        }
        return r;
    }

    friend TruncatedSeries operator*(const GaussianRational &c, const TruncatedSeries &a)
    {
        if (c.is_zero()) {
            TruncatedSeries z(*a.vars_, a.cap_);
            z.vars_ = a.vars_;
            z.poly_ = a.poly_;
            return z;
        }
        TruncatedSeries r(a);
        for (auto &t : r.terms_) {
            t.c = c * t.c;
        }
        return r;
    }

    friend TruncatedSeries operator*(const TruncatedSeries &a, const TruncatedSeries &b)
    {
        require_same_space(a, b);
        detail::Accumulator acc;
        acc.reserve(a.terms_.size() + b.terms_.size());
        const int cap = a.cap_;
        for (const auto &ta : a.terms_) {
            const int room = cap - ta.deg;
            for (const auto &tb : b.terms_) {
                if (tb.deg > room) {
                    break;
                }
                acc[ta.key + tb.key].add_product(ta.c, tb.c);
            }
        }
        bool poly = a.poly_ && b.poly_ && a.max_degree() + b.max_degree() <= cap;
        return build(a.vars_, cap, std::move(acc), poly);
    }

    // Structural equality: same variables, same cap, same coefficients.
    friend bool operator==(const TruncatedSeries &a, const TruncatedSeries &b)
    {
        if (!a.same_space(b) || a.terms_.size() != b.terms_.size()) {
            return false;
        }
        for (std::size_t k = 0; k < a.terms_.size(); ++k) {
            if (a.terms_[k].key != b.terms_[k].key || a.terms_[k].c != b.terms_[k].c) {
                return false;
            }
        }
        return true;
    }
    friend bool operator!=(const TruncatedSeries &a, const TruncatedSeries &b) { return !(a == b); }

    // Canonical text: graded-lex monomials, ascending degree.
    std::string to_string() const
    {
        if (terms_.empty()) {
            return "0";
        }
        std::string out;
        for (std::size_t k = 0; k < terms_.size(); ++k) {
            std::string t = term_text(terms_[k]);
            if (k == 0) {
                out = t;
            } else if (t[0] == '-') {
                out += " - " + t.substr(1);
            } else {
                out += " + " + t;
            }
        }
        return out;
    }

    // Internal: declare the series exact to a higher cap. Callers must know
    // from context (e.g. a factor of known valuation) that this is sound.
    TruncatedSeries assume_cap(int cap) const
    {
        TruncatedSeries r(*this);
        r.cap_ = cap;
        r.check_space();
        return r;
    }

    static TruncatedSeries build(std::shared_ptr<const VarList> vars, int cap, detail::Accumulator &&acc, bool poly)
    {
        TruncatedSeries r;
        r.vars_ = std::move(vars);
        r.cap_ = cap;
        r.poly_ = poly;
        r.check_space();
        r.terms_.reserve(acc.size());
        for (auto &[k, c] : acc) {
            if (c.is_zero()) {
                continue;
            }
            int d = detail::key_degree(k);
            if (d > cap) {
                r.poly_ = false;
                continue;
            }
            r.terms_.push_back({k, d, std::move(c)});
        }
        std::sort(r.terms_.begin(), r.terms_.end(), detail::term_less);
        return r;
    }

    std::shared_ptr<const VarList> shared_vars() const { return vars_; }

private:
    void check_space() const
    {
        if (vars_->size() > std::size_t(detail::max_vars)) {
            throw domain_error("at most 8 variables are supported");
        }
        if (cap_ < 0 || cap_ > detail::max_cap) {
            throw domain_error("truncation cap out of range");
        }
    }

    static void require_same_space(const TruncatedSeries &a, const TruncatedSeries &b)
    {
        if (!a.same_space(b)) {
            throw alignment_error("series over different variables or caps (" + std::to_string(a.cap_) + " vs " +
                                  std::to_string(b.cap_) + ")");
        }
    }

    static TruncatedSeries add(const TruncatedSeries &a, const TruncatedSeries &b, bool negate)
    {
        require_same_space(a, b);
        TruncatedSeries r;
        r.vars_ = a.vars_;
        r.cap_ = a.cap_;
        r.poly_ = a.poly_ && b.poly_;
        r.terms_.reserve(a.terms_.size() + b.terms_.size());
        auto ia = a.terms_.begin();
        auto ib = b.terms_.begin();
        while (ia != a.terms_.end() || ib != b.terms_.end()) {
            if (ib == b.terms_.end() || (ia != a.terms_.end() && detail::term_less(*ia, *ib))) {
                r.terms_.push_back(*ia++);
            } else if (ia == a.terms_.end() || detail::term_less(*ib, *ia)) {
                r.terms_.push_back(*ib++);
                if (negate) {
                    r.terms_.back().c = -r.terms_.back().c;
                }
            } else {
                GaussianRational c = negate ? ia->c - ib->c : ia->c + ib->c;
                if (!c.is_zero()) {
                    r.terms_.push_back({ia->key, ia->deg, std::move(c)});
                }
                ++ia;
                ++ib;
            }
        }
        return r;
    }

    std::string term_text(const detail::Term &t) const
    {
        std::string mono;
        for (int v = 0; v < nvars(); ++v) {
            int e = detail::exponent(t.key, v);
            if (e == 0) {
                continue;
            }
            if (!mono.empty()) {
                mono += "*";
            }
            mono += (*vars_)[std::size_t(v)];
            if (e > 1) {
                mono += "^" + std::to_string(e);
            }
        }
        if (mono.empty()) {
            return t.c.to_string();
        }
        if (t.c.is_one()) {
            return mono;
        }
        if (t.c == GaussianRational(-1)) {
            return "-" + mono;
        }
        if (!t.c.is_real() && sgn(t.c.re()) != 0) {
            return "(" + t.c.to_string() + ")*" + mono;
        }
        return t.c.to_string() + "*" + mono;
    }

    std::shared_ptr<const VarList> vars_;
    int cap_ = 0;
    bool poly_ = true;
    std::vector<detail::Term> terms_;
};

using Series = TruncatedSeries;

inline std::ostream &operator<<(std::ostream &os, const TruncatedSeries &s) { return os << s.to_string(); }

// Lower both operands to their common cap.
inline std::pair<TruncatedSeries, TruncatedSeries> align(const TruncatedSeries &a, const TruncatedSeries &b)
{
    int c = std::min(a.cap(), b.cap());
    return {a.with_cap(c), b.with_cap(c)};
}

inline TruncatedSeries lower_to(const TruncatedSeries &s, int cap) { return s.cap() > cap ? s.with_cap(cap) : s; }

inline TruncatedSeries mul(const TruncatedSeries &a, const TruncatedSeries &b) { return a * b; }

inline TruncatedSeries partial_derivative(const TruncatedSeries &s, const std::string &var) { return s.derivative(var); }

// Formal composition s(images). images[k] replaces variable k of s; all
// images live over one target space. Images with a nonzero constant term
// are only accepted when s is polynomial (otherwise the unknown tail of s
// would leak into low orders).
inline TruncatedSeries compose(const TruncatedSeries &s, const std::vector<TruncatedSeries> &images)
{
    if (int(images.size()) != s.nvars()) {
        throw domain_error("compose needs one image per variable");
    }
    if (images.empty()) {
        throw domain_error("compose of a series without variables; use with_cap");
    }
    const TruncatedSeries &first = images.front();
    bool nilpotent = true;
    bool images_poly = true;
    std::vector<int> val(images.size());
    for (std::size_t k = 0; k < images.size(); ++k) {
        if (!images[k].same_space(first)) {
            throw alignment_error("compose images live over different spaces");
        }
        val[k] = images[k].valuation();
        if (!images[k].constant_term().is_zero()) {
            nilpotent = false;
            val[k] = 0;
        }
        images_poly = images_poly && images[k].is_polynomial();
    }
    if (!nilpotent && !s.is_polynomial()) {
        throw domain_error("non-nilpotent substitution into a truncated series");
    }
    int cap = first.cap();
    if (!s.is_polynomial()) {
        cap = std::min(cap, s.cap());
    }

    std::vector<std::vector<TruncatedSeries>> powers(images.size());
    auto power = [&](std::size_t k, int e) -> const TruncatedSeries & {
        auto &p = powers[k];
        if (p.empty()) {
            p.push_back(TruncatedSeries::constant(first.vars(), cap, 1));
        }
        while (int(p.size()) <= e) {
            p.push_back(p.back() * lower_to(images[k], cap));
        }
        return p[std::size_t(e)];
    };

    const int nv = s.nvars();
    std::vector<const detail::Term *> ts;
    ts.reserve(s.size());
    for (const auto &t : s.raw_terms()) {
        ts.push_back(&t);
    }
    // lexicographic grouping: exponent of var 0, then var 1, ...
    std::sort(ts.begin(), ts.end(), [](const detail::Term *a, const detail::Term *b) { return a->key > b->key; });

    // Multivariate Horner over the grouped trie.
    auto rec = [&](auto &self, std::size_t lo, std::size_t hi, int var, int used) -> TruncatedSeries {
        if (var == nv) {
            GaussianRational c;
            for (std::size_t k = lo; k < hi; ++k) {
                c += ts[k]->c;
            }
            return TruncatedSeries::constant(first.vars(), cap, c);
        }
        TruncatedSeries acc(first.vars(), cap);
        std::size_t k = lo;
        while (k < hi) {
            int e = detail::exponent(ts[k]->key, var);
            std::size_t j = k;
            while (j < hi && detail::exponent(ts[j]->key, var) == e) {
                ++j;
            }
            int u = used + e * val[std::size_t(var)];
            if (u <= cap) {
                TruncatedSeries inner = self(self, k, j, var + 1, u);
                if (!inner.is_zero()) {
                    acc += e == 0 ? inner : power(std::size_t(var), e) * inner;
                }
            }
            k = j;
        }
        return acc;
    };
    TruncatedSeries out = rec(rec, 0, ts.size(), 0, 0);
    if (!(s.is_polynomial() && images_poly)) {
        out = TruncatedSeries::build(out.shared_vars(), out.cap(), [&] {
            detail::Accumulator a;
            for (const auto &t : out.raw_terms()) {
                a.emplace(t.key, t.c);
            }
            return a;
        }(), false);
    }
    return out;
}

// Substitute named variables. Variables of s not in the assignment map to
// the same-named variable of the target space (that of the assigned series).
inline TruncatedSeries substitute(const TruncatedSeries &s, const std::map<std::string, TruncatedSeries> &assignment)
{
    if (assignment.empty()) {
        return s;
    }
    const TruncatedSeries &any = assignment.begin()->second;
    std::vector<TruncatedSeries> images;
    images.reserve(std::size_t(s.nvars()));
    for (const auto &v : s.vars()) {
        auto it = assignment.find(v);
        if (it != assignment.end()) {
            images.push_back(it->second);
        } else {
            images.push_back(TruncatedSeries::variable(any.vars(), any.cap(), v));
        }
    }
    for (const auto &[name, _] : assignment) {
        s.index_of(name);
    }
    return compose(s, images);
}

// Multiplicative inverse of a series with nonzero constant term.
inline TruncatedSeries invert_unit(const TruncatedSeries &s)
{
    GaussianRational c0 = s.constant_term();
    if (c0.is_zero()) {
        throw not_a_unit("series has zero constant term");
    }
    TruncatedSeries one = TruncatedSeries::constant(s.vars(), s.cap(), 1);
    TruncatedSeries y = TruncatedSeries::constant(s.vars(), s.cap(), c0.inverse());
    if (s.max_degree() == 0 && s.is_polynomial()) {
        return y;
    }
    // Newton: y <- y (2 - s y); correct order doubles each round.
    for (int good = 0; good < s.cap(); good = 2 * good + 1) {
        y = y + y * (one - s * y);
    }
    if (s * y != one) {
        throw internal_error("invert_unit residual check failed");
    }
    return TruncatedSeries::build(y.shared_vars(), y.cap(), [&] {
        detail::Accumulator a;
        for (const auto &t : y.raw_terms()) {
            a.emplace(t.key, t.c);
        }
        return a;
    }(), false);
}

// Re-expand a polynomial around `point`: result(x) = s(x + point).
inline TruncatedSeries taylor_shift(const TruncatedSeries &s, const std::vector<GaussianRational> &point)
{
    if (!s.is_polynomial()) {
        throw domain_error("taylor_shift needs a polynomial series");
    }
    if (int(point.size()) != s.nvars()) {
        throw domain_error("point dimension does not match variable count");
    }
    std::vector<TruncatedSeries> images;
    for (int k = 0; k < s.nvars(); ++k) {
        images.push_back(TruncatedSeries::variable(s.vars(), s.cap(), s.vars()[std::size_t(k)]) +
                         TruncatedSeries::constant(s.vars(), s.cap(), point[std::size_t(k)]));
    }
    return compose(s, images);
}

} // namespace segre
