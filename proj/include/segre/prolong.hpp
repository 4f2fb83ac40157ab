#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include <segre/assoc_pde.hpp>
#include <segre/errors.hpp>
#include <segre/series.hpp>

namespace segre
{

// Jet variable w^{(alpha)}, 1 <= |alpha| <= k+1, alpha over the z-variables.
using JetVariable = Multiindex;

// Graded-lex on alpha: lower order first, then lexicographically larger
// exponent vectors first (z1 before z2).
inline bool jet_less(const JetVariable &a, const JetVariable &b)
{
    int da = degree(a), db = degree(b);
    if (da != db) {
        return da < db;
    }
    return a > b;
}

// Multiset of jet variables, kept sorted by jet_less.
struct JetMonomial {
    std::vector<JetVariable> factors;

    int plain_degree() const { return int(factors.size()); }
    int weighted_degree() const
    {
        int d = 0;
        for (const auto &f : factors) {
            d += degree(f);
        }
        return d;
    }
    bool operator==(const JetMonomial &o) const { return factors == o.factors; }
};

inline std::string jet_name(const JetVariable &a)
{
    if (a.size() == 1) {
        return "w" + std::string(std::size_t(a[0]), '\'');
    }
    std::string s = "w_";
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (int e = 0; e < a[i]; ++e) {
            s += std::to_string(i + 1);
        }
    }
    return s;
}

inline std::string monomial_name(const JetMonomial &m)
{
    if (m.factors.empty()) {
        return "1";
    }
    std::string s;
    for (std::size_t k = 0; k < m.factors.size();) {
        std::size_t e = k;
        while (e < m.factors.size() && m.factors[e] == m.factors[k]) {
            ++e;
        }
        if (!s.empty()) {
            s += "*";
        }
        s += jet_name(m.factors[k]);
        if (e - k > 1) {
            s += "^" + std::to_string(e - k);
        }
        k = e;
    }
    return s;
}

// All multiindices over n variables with |alpha| = l, graded-lex order.
inline std::vector<Multiindex> multiindices_of_degree(int n, int l)
{
    std::vector<Multiindex> out;
    Multiindex m(std::size_t(n), 0);
    auto rec = [&](auto &self, int v, int room) -> void {
        if (v == n - 1) {
            m[std::size_t(v)] = room;
            out.push_back(m);
            return;
        }
        for (int e = room; e >= 0; --e) {
            m[std::size_t(v)] = e;
            self(self, v + 1, room - e);
        }
    };
    rec(rec, 0, l);
    return out;
}

inline std::vector<JetVariable> jet_variables(int n, int k)
{
    std::vector<JetVariable> v;
    for (int l = 1; l <= k + 1; ++l) {
        for (auto &m : multiindices_of_degree(n, l)) {
            v.push_back(m);
        }
    }
    return v;
}

// Monomials in w^{(beta)}, 1 <= |beta| <= k+1, with weighted degree <=
// weighted_cap and plain degree <= degree_cap, ordered by weighted degree,
// then plain degree, then factor list. Index 0 is the constant monomial.
inline std::vector<JetMonomial> enumerate_monomials(int n, int k, int weighted_cap, int degree_cap)
{
    if (n < 1 || k < 0 || weighted_cap < 0 || degree_cap < 0) {
        throw domain_error("enumerate_monomials: invalid arguments");
    }
    const std::vector<JetVariable> vars = jet_variables(n, k);
    std::vector<JetMonomial> out;
    JetMonomial cur;
    auto rec = [&](auto &self, std::size_t from, int wleft, int dleft) -> void {
        out.push_back(cur);
        if (dleft == 0) {
            return;
        }
        for (std::size_t v = from; v < vars.size(); ++v) {
            int w = degree(vars[v]);
            if (w > wleft) {
                continue;
            }
            cur.factors.push_back(vars[v]);
            self(self, v, wleft - w, dleft - 1);
            cur.factors.pop_back();
        }
    };
    rec(rec, 0, weighted_cap, degree_cap);
    std::stable_sort(out.begin(), out.end(), [](const JetMonomial &a, const JetMonomial &b) {
        if (a.weighted_degree() != b.weighted_degree()) {
            return a.weighted_degree() < b.weighted_degree();
        }
        if (a.plain_degree() != b.plain_degree()) {
            return a.plain_degree() < b.plain_degree();
        }
        return std::lexicographical_compare(a.factors.begin(), a.factors.end(), b.factors.begin(), b.factors.end(), jet_less);
    });
    return out;
}

// The 16 monomials multiplying chi_0..chi_15 in the third-order relation
// w''' P(w') + R(w', w'') = 0 of the n = 1, m = 2 case, in that order.
inline std::vector<JetMonomial> pq_basis()
{
    const JetVariable w1{1}, w2{2}, w3{3};
    std::vector<JetMonomial> b;
    auto mono = [](std::vector<JetVariable> f) {
        std::sort(f.begin(), f.end(), jet_less);
        return JetMonomial{std::move(f)};
    };
    for (int j = 0; j <= 2; ++j) {
        b.push_back(mono([&] {
            std::vector<JetVariable> f(std::size_t(j), w1);
            f.push_back(w3);
            return f;
        }()));
    }
    for (int j = 0; j <= 6; ++j) {
        b.push_back(mono(std::vector<JetVariable>(std::size_t(j), w1)));
    }
    for (int j = 0; j <= 3; ++j) {
        std::vector<JetVariable> f(std::size_t(j), w1);
        f.push_back(w2);
        b.push_back(mono(f));
    }
    for (int j = 0; j <= 1; ++j) {
        std::vector<JetVariable> f(std::size_t(j), w1);
        f.push_back(w2);
        f.push_back(w2);
        b.push_back(mono(f));
    }
    return b;
}

// Symbols of the prolongation polynomials: xi_l, or a jet
// d^beta Phi_ij with beta over (z, w, xi) and i <= j.
struct Symbol {
    int kind = 0; // 0: xi_l, 1: Phi-jet
    int i = 0;    // l for xi
    int j = 0;
    Multiindex beta;

    auto key() const { return std::tie(kind, i, j, beta); }
    bool operator<(const Symbol &o) const { return key() < o.key(); }
    bool operator==(const Symbol &o) const { return key() == o.key(); }
};

inline Symbol xi_symbol(int l) { return {0, l, 0, {}}; }
inline Symbol phi_symbol(int n, int i, int j, Multiindex beta = {})
{
    if (beta.empty()) {
        beta.assign(std::size_t(2 * n + 1), 0);
    }
    return {1, std::min(i, j), std::max(i, j), std::move(beta)};
}

inline std::string symbol_name(const Symbol &s)
{
    if (s.kind == 0) {
        return "xi" + std::to_string(s.i + 1);
    }
    std::string name = "Phi" + std::to_string(s.i + 1) + std::to_string(s.j + 1);
    const int n = int(s.beta.size() - 1) / 2;
    std::string sub;
    for (int v = 0; v < int(s.beta.size()); ++v) {
        std::string var = v < n ? "z" + std::to_string(v + 1) : v == n ? "w" : "xi" + std::to_string(v - n);
        for (int e = 0; e < s.beta[std::size_t(v)]; ++e) {
            sub += (sub.empty() ? "" : ",") + var;
        }
    }
    return sub.empty() ? name : name + "_{" + sub + "}";
}

// Polynomial over Q(i) in Symbols; a monomial is a sorted symbol list.
class SymPoly
{
public:
    using Monomial = std::vector<Symbol>;

    SymPoly() = default;
    static SymPoly constant(const GaussianRational &c)
    {
        SymPoly p;
        if (!c.is_zero()) {
            p.terms_[{}] = c;
        }
        return p;
    }
    static SymPoly symbol(const Symbol &s)
    {
        SymPoly p;
        p.terms_[{s}] = 1;
        return p;
    }

    const std::map<Monomial, GaussianRational> &terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    int degree() const
    {
        int d = -1;
        for (const auto &[m, c] : terms_) {
            d = std::max(d, int(m.size()));
        }
        return d;
    }

    SymPoly &operator+=(const SymPoly &o)
    {
        for (const auto &[m, c] : o.terms_) {
            add(m, c);
        }
        return *this;
    }
    friend SymPoly operator+(SymPoly a, const SymPoly &b) { return a += b; }
    friend SymPoly operator-(const SymPoly &a, const SymPoly &b)
    {
        SymPoly r = a;
        for (const auto &[m, c] : b.terms_) {
            r.add(m, -c);
        }
        return r;
    }
    friend SymPoly operator*(const SymPoly &a, const SymPoly &b)
    {
        SymPoly r;
        for (const auto &[ma, ca] : a.terms_) {
            for (const auto &[mb, cb] : b.terms_) {
                Monomial m;
                std::merge(ma.begin(), ma.end(), mb.begin(), mb.end(), std::back_inserter(m));
                r.add(m, ca * cb);
            }
        }
        return r;
    }
    friend bool operator==(const SymPoly &a, const SymPoly &b) { return a.terms_ == b.terms_; }

    std::string to_string() const
    {
        if (terms_.empty()) {
            return "0";
        }
        std::string s;
        for (const auto &[m, c] : terms_) {
            std::string t;
            for (const auto &sym : m) {
                t += (t.empty() ? "" : "*") + symbol_name(sym);
            }
            std::string cs = c.to_string();
            if (t.empty()) {
                t = cs;
            } else if (!c.is_one()) {
                t = (c.is_real() || sgn(c.re()) == 0 ? cs : "(" + cs + ")") + "*" + t;
            }
            s += (s.empty() ? "" : " + ") + t;
        }
        return s;
    }

private:
    void add(const Monomial &m, const GaussianRational &c)
    {
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            if (!c.is_zero()) {
                terms_.emplace(m, c);
            }
            return;
        }
        it->second += c;
        if (it->second.is_zero()) {
            terms_.erase(it);
        }
    }

    std::map<Monomial, GaussianRational> terms_;
};

// Formal total derivative D_k = d/dz_k + xi_k d/dw + sum_l Phi_lk d/dxi_l
// acting on polynomials in xi and Phi-jet symbols.
inline SymPoly total_derivative(int n, int k, const SymPoly &p)
{
    auto d_symbol = [&](const Symbol &s) {
        if (s.kind == 0) {
            return SymPoly::symbol(phi_symbol(n, s.i, k));
        }
        auto shifted = [&](int v) {
            Symbol t = s;
            ++t.beta[std::size_t(v)];
            return SymPoly::symbol(t);
        };
        SymPoly r = shifted(k);
        r += SymPoly::symbol(xi_symbol(k)) * shifted(n);
        for (int l = 0; l < n; ++l) {
            r += SymPoly::symbol(phi_symbol(n, l, k)) * shifted(n + 1 + l);
        }
        return r;
    };
    SymPoly out;
    for (const auto &[m, c] : p.terms()) {
        for (std::size_t f = 0; f < m.size(); ++f) {
            if (f > 0 && m[f] == m[f - 1]) {
                continue; // counted via multiplicity below
            }
            std::size_t mult = 0;
            SymPoly rest = SymPoly::constant(c);
            bool removed = false;
            for (std::size_t g = 0; g < m.size(); ++g) {
                if (m[g] == m[f]) {
                    ++mult;
                    if (!removed) {
                        removed = true;
                        continue;
                    }
                }
                rest = rest * SymPoly::symbol(m[g]);
            }
            out += SymPoly::constant(long(mult)) * rest * d_symbol(m[f]);
        }
    }
    return out;
}

// Q_alpha for 2 <= |alpha| <= k+1: w^{(alpha)} along solutions of the
// system, built by applying D in nondecreasing index order.
struct ProlongationTable {
    int n = 1;
    int k = 1;
    std::map<JetVariable, SymPoly> entries;

    const SymPoly &at(const JetVariable &a) const
    {
        auto it = entries.find(a);
        if (it == entries.end()) {
            throw domain_error("prolongation table does not cover " + jet_name(a));
        }
        return it->second;
    }
};

inline ProlongationTable build_prolongation(int n, int k)
{
    if (k < 1 || n < 1) {
        throw domain_error("build_prolongation needs n >= 1 and k >= 1");
    }
    ProlongationTable t{n, k, {}};
    for (int l = 2; l <= k + 1; ++l) {
        for (const auto &a : multiindices_of_degree(n, l)) {
            if (l == 2) {
                std::vector<int> idx;
                for (int v = 0; v < n; ++v) {
                    for (int e = 0; e < a[std::size_t(v)]; ++e) {
                        idx.push_back(v);
                    }
                }
                t.entries[a] = SymPoly::symbol(phi_symbol(n, idx[0], idx[1]));
                continue;
            }
            int last = n - 1;
            while (a[std::size_t(last)] == 0) {
                --last;
            }
            JetVariable prev = a;
            --prev[std::size_t(last)];
            t.entries[a] = total_derivative(n, last, t.entries.at(prev));
        }
    }
    return t;
}

// Concrete values of the symbols: xi_l -> xi0_l + xi_l, Phi-jets -> jets of
// a stored system or precomputed fiber jets. With `fiber`, system values are
// restricted to z = w = 0 first (a ring homomorphism, so products and
// xi-derivatives commute with it).
class JetEvaluator
{
public:
    JetEvaluator(const PdeSystem &sys, bool fiber)
        : sys_(&sys), n_(sys.n), cap_(sys.cap()), vars_(sys.vars()), xi0_(sys.xi0), fiber_(fiber)
    {
    }
    explicit JetEvaluator(const FiberJets &fj)
        : fj_(&fj), n_(fj.n), cap_(fj.cap()), vars_(jet_vars(fj.n)), xi0_(fj.xi0), fiber_(true)
    {
    }
    // the evaluator keeps a pointer: temporaries would dangle
    explicit JetEvaluator(FiberJets &&) = delete;
    JetEvaluator(PdeSystem &&, bool) = delete;

    const TruncatedSeries &value(const Symbol &s)
    {
        auto it = cache_.find(s);
        if (it != cache_.end()) {
            return it->second;
        }
        TruncatedSeries v;
        if (s.kind == 0) {
            v = TruncatedSeries::variable(vars_, cap_, "xi" + std::to_string(s.i + 1)) +
                TruncatedSeries::constant(vars_, cap_, xi0_[std::size_t(s.i)]);
        } else if (fj_) {
            v = fj_->at(s.i, s.j, s.beta);
        } else {
            v = phi_jet(*sys_, s.i, s.j, s.beta);
            if (fiber_) {
                v = detail::fiber_part(v, n_);
            }
        }
        return cache_.emplace(s, std::move(v)).first->second;
    }

    TruncatedSeries evaluate(const SymPoly &p)
    {
        int cap = cap_;
        for (const auto &[m, c] : p.terms()) {
            for (const auto &s : m) {
                cap = std::min(cap, value(s).cap());
            }
        }
        TruncatedSeries acc(vars_, cap);
        for (const auto &[m, c] : p.terms()) {
            TruncatedSeries t = TruncatedSeries::constant(vars_, cap, c);
            for (const auto &s : m) {
                t = t * lower_to(value(s), cap);
            }
            acc += t;
        }
        return acc;
    }

    // Keep only monomials free of z and w.
    TruncatedSeries restrict_to_fiber(const TruncatedSeries &s) const { return detail::fiber_part(s, n_); }

    int n() const { return n_; }
    int cap() const { return cap_; }
    const VarList &vars() const { return vars_; }
    bool fiber() const { return fiber_; }

private:
    const PdeSystem *sys_ = nullptr;
    const FiberJets *fj_ = nullptr;
    int n_;
    int cap_;
    VarList vars_;
    std::vector<GaussianRational> xi0_;
    bool fiber_;
    std::map<Symbol, TruncatedSeries> cache_;
};

inline TruncatedSeries substitute_prolongation(const JetMonomial &mono, const ProlongationTable &table, JetEvaluator &ev)
{
    SymPoly p = SymPoly::constant(1);
    for (const auto &f : mono.factors) {
        if (degree(f) == 1) {
            int l = int(std::find(f.begin(), f.end(), 1) - f.begin());
            p = p * SymPoly::symbol(xi_symbol(l));
        } else {
            p = p * table.at(f);
        }
    }
    return ev.evaluate(p);
}

inline TruncatedSeries substitute_prolongation(const JetMonomial &mono, const ProlongationTable &table, const PdeSystem &sys)
{
    JetEvaluator ev(sys, false);
    return substitute_prolongation(mono, table, ev);
}

} // namespace segre
