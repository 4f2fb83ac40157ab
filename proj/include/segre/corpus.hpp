#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <segre/hypersurface.hpp>
#include <segre/parser.hpp>
#include <segre/rng.hpp>

namespace segre
{

struct CorpusEntry {
    std::string name;
    std::string text; // DSL source of phi
    RealDefining germ;
    std::optional<EmbeddingCertificate> certificate;
};

inline constexpr int corpus_cap = 32;

inline EmbeddingCertificate make_certificate(int n, int l, const std::vector<std::string> &components)
{
    EmbeddingCertificate c;
    c.m = int(components.size()) - 1;
    c.signature_l = l;
    for (const auto &s : components) {
        c.components.push_back(parse_series(s, zw_vars(n), corpus_cap));
    }
    return c;
}

// Seeded random real polynomial germ through the origin with Levi form
// |z|^2 (summed over j) plus random terms of degree 3..degree. With
// u_terms, monomials involving u are included as well.
inline std::string random_germ_text(int n, int degree, std::uint64_t seed, bool u_terms = false)
{
    ExactRng rng(seed);
    const VarList rv = real_vars(n);
    TruncatedSeries acc(rv, corpus_cap);
    for (int j = 1; j <= n; ++j) {
        acc += parse_series("z" + std::to_string(j) + "*c" + std::to_string(j), rv, corpus_cap);
    }
    // enumerate exponents (alpha, beta, k) in a fixed order
    std::vector<Multiindex> monos;
    Multiindex m(rv.size(), 0);
    auto rec = [&](auto &self, std::size_t v, int room) -> void {
        if (v == rv.size()) {
            int d = degree - room;
            if (d >= 3) {
                monos.push_back(m);
            }
            return;
        }
        int top = (v + 1 == rv.size() && !u_terms) ? 0 : room;
        for (int e = 0; e <= top; ++e) {
            m[v] = e;
            self(self, v + 1, room - e);
        }
        m[v] = 0;
    };
    rec(rec, 0, degree);
    for (const auto &mono : monos) {
        Multiindex sw = mono;
        for (int j = 0; j < n; ++j) {
            std::swap(sw[std::size_t(j)], sw[std::size_t(n + j)]);
        }
        if (sw < mono) {
            continue; // partner handled
        }
        GaussianRational c(rng.rational(3, 3), sw == mono ? mpq_class(0) : rng.rational(3, 3));
        if (rng.integer(0, 2) == 0) {
            continue; // keep the germ moderately sparse
        }
        acc += TruncatedSeries::monomial(rv, corpus_cap, mono, c);
        if (sw != mono) {
            acc += TruncatedSeries::monomial(rv, corpus_cap, sw, c.conj());
        }
    }
    return acc.to_string();
}

inline CorpusEntry make_entry(std::string name, int n, std::string text, std::optional<EmbeddingCertificate> cert)
{
    RealDefining g = parse_defining(text, n, corpus_cap);
    return {std::move(name), std::move(text), std::move(g), std::move(cert)};
}

// Built-in test germs. Quadrics list negative squares first.
inline std::vector<CorpusEntry> corpus(int random_degree = 4, std::uint64_t seed = 1)
{
    std::vector<CorpusEntry> c;
    c.push_back(make_entry("sphere", 1, "z1*c1", make_certificate(1, 0, {"z1", "w"})));
    c.push_back(make_entry("quadric_n1_l1", 1, "-z1*c1", make_certificate(1, 1, {"z1", "w"})));
    c.push_back(make_entry("quadric_n2_l0", 2, "z1*c1 + z2*c2", make_certificate(2, 0, {"z1", "z2", "w"})));
    c.push_back(make_entry("quadric_n2_l1", 2, "-z1*c1 + z2*c2", make_certificate(2, 1, {"z1", "z2", "w"})));
    c.push_back(make_entry("quadric_n2_l2", 2, "-z1*c1 - z2*c2", make_certificate(2, 2, {"z1", "z2", "w"})));
    c.push_back(make_entry("abs4", 1, "z1*c1 + z1^2*c1^2", make_certificate(1, 0, {"z1", "z1^2", "w"})));
    c.push_back(make_entry("abs6", 1, "z1*c1 + z1^3*c1^3", make_certificate(1, 0, {"z1", "z1^3", "w"})));
    c.push_back(make_entry("abs246", 1, "z1*c1 + z1^2*c1^2 + z1^3*c1^3", std::nullopt));
    c.push_back(make_entry("random_n1_d" + std::to_string(random_degree), 1, random_germ_text(1, random_degree, seed), std::nullopt));
    c.push_back(make_entry("random_u_n1_d3", 1, random_germ_text(1, 3, seed + 1, true), std::nullopt));
    c.push_back(make_entry("random_n2_d3", 2, random_germ_text(2, 3, seed + 2), std::nullopt));
    return c;
}

inline CorpusEntry corpus_entry(const std::vector<CorpusEntry> &c, const std::string &name)
{
    for (const auto &e : c) {
        if (e.name == name) {
            return e;
        }
    }
    throw domain_error("no corpus entry named '" + name + "'");
}

} // namespace segre
