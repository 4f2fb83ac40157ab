#pragma once

#include <cctype>
#include <string>

#include <segre/errors.hpp>
#include <segre/series.hpp>

namespace segre
{

// Recursive-descent parser for the polynomial DSL (grammar in docs/dsl.md):
//
//   expr    := term { ("+" | "-") term }
//   term    := unary { "*" unary }
//   unary   := ("+" | "-") unary | power
//   power   := primary [ "^" integer ]
//   primary := integer [ "/" integer ] | "i" | identifier | "(" expr ")"
//
// The result is an exact polynomial over the given variables. A monomial
// of degree above `cap` (after expansion) is rejected.
class ExpressionParser
{
public:
    ExpressionParser(std::string text, VarList vars, int cap) : text_(std::move(text)), vars_(std::move(vars)), cap_(cap) {}

    TruncatedSeries parse()
    {
        pos_ = 0;
        skip();
        if (pos_ == text_.size()) {
            throw parse_error("empty expression", pos_);
        }
        TruncatedSeries r = expr();
        if (pos_ != text_.size()) {
            throw parse_error(std::string("unexpected character '") + text_[pos_] + "'", pos_);
        }
        return r;
    }

private:
    void skip()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
    }
    bool accept(char c)
    {
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            skip();
            return true;
        }
        return false;
    }
    TruncatedSeries check(TruncatedSeries s, std::size_t at) const
    {
        if (!s.is_polynomial()) {
            throw parse_error("expression degree exceeds cap " + std::to_string(cap_), at);
        }
        return s;
    }

    TruncatedSeries expr()
    {
        TruncatedSeries acc = term();
        for (;;) {
            if (accept('+')) {
                acc += term();
            } else if (accept('-')) {
                acc -= term();
            } else {
                return acc;
            }
        }
    }

    TruncatedSeries term()
    {
        TruncatedSeries acc = unary();
        for (;;) {
            std::size_t at = pos_;
            if (!accept('*')) {
                return acc;
            }
            acc = check(acc * unary(), at);
        }
    }

    TruncatedSeries unary()
    {
        if (accept('-')) {
            return -unary();
        }
        if (accept('+')) {
            return unary();
        }
        return power();
    }

    TruncatedSeries power()
    {
        TruncatedSeries base = primary();
        std::size_t at = pos_;
        if (!accept('^')) {
            return base;
        }
        if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            throw parse_error("expected non-negative integer exponent", pos_);
        }
        std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            ++pos_;
        }
        if (pos_ - start > 3) {
            throw parse_error("exponent too large", start);
        }
        int e = std::stoi(text_.substr(start, pos_ - start));
        skip();
        TruncatedSeries r = TruncatedSeries::constant(vars_, cap_, 1);
        for (int k = 0; k < e; ++k) {
            r = check(r * base, at);
        }
        return r;
    }

    TruncatedSeries primary()
    {
        if (pos_ >= text_.size()) {
            throw parse_error("unexpected end of input", pos_);
        }
        const std::size_t start = pos_;
        char c = text_[pos_];
        if (c == '(') {
            accept('(');
            TruncatedSeries r = expr();
            if (!accept(')')) {
                throw parse_error("expected ')'", pos_);
            }
            return r;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::string num = digits();
            if (pos_ < text_.size() && text_[pos_] == '/') {
                ++pos_;
                if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                    throw parse_error("expected denominator", pos_);
                }
                std::string den = digits();
                if (mpz_class(den) == 0) {
                    throw parse_error("zero denominator", start);
                }
                mpq_class q{mpz_class(num), mpz_class(den)};
                q.canonicalize();
                skip();
                return TruncatedSeries::constant(vars_, cap_, GaussianRational(q));
            }
            skip();
            return TruncatedSeries::constant(vars_, cap_, GaussianRational(mpq_class(mpz_class(num))));
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string id;
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) {
                id += text_[pos_++];
            }
            skip();
            if (id == "i") {
                return TruncatedSeries::constant(vars_, cap_, GaussianRational::i());
            }
            for (const auto &v : vars_) {
                if (v == id) {
                    if (cap_ < 1) {
                        throw parse_error("expression degree exceeds cap " + std::to_string(cap_), start);
                    }
                    return TruncatedSeries::variable(vars_, cap_, id);
                }
            }
            throw parse_error("unknown variable '" + id + "'", start);
        }
        throw parse_error(std::string("unexpected character '") + c + "'", start);
    }

    std::string digits()
    {
        std::string s;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
            s += text_[pos_++];
        }
        return s;
    }

    std::string text_;
    VarList vars_;
    int cap_;
    std::size_t pos_ = 0;
};

inline TruncatedSeries parse_series(const std::string &text, const VarList &vars, int cap)
{
    return ExpressionParser(text, vars, cap).parse();
}

} // namespace segre
