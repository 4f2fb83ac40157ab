#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include <segre/errors.hpp>
#include <segre/linalg.hpp>
#include <segre/series.hpp>

namespace segre
{

// Solve F(p, x) = 0 for x = x(p) with x(0) = 0, where F is a square system
// of series over (params, unknowns) vanishing at the origin. Returns one
// series per unknown, over the parameter variables (in the order in which
// they appear in the system's variable list), at the system's cap.
//
// Newton on jets: each step solves J(p, x) dx = F(p, x) in the series
// ring, doubling the number of correct orders. The residual F(p, x(p)) is
// checked to vanish up to the cap before returning.
inline std::map<std::string, TruncatedSeries> solve_implicit(const std::vector<TruncatedSeries> &system,
                                                             const std::vector<std::string> &unknowns)
{
    if (system.empty() || system.size() != unknowns.size()) {
        throw domain_error("solve_implicit needs a square, non-empty system");
    }
    const TruncatedSeries &ref = system.front();
    for (const auto &f : system) {
        if (!f.same_space(ref)) {
            throw alignment_error("system equations over different spaces");
        }
        if (!f.constant_term().is_zero()) {
            throw domain_error("system does not vanish at the base point");
        }
    }
    const int cap = ref.cap();
    std::vector<int> unk_idx;
    for (const auto &u : unknowns) {
        unk_idx.push_back(ref.index_of(u));
    }
    VarList params;
    for (const auto &v : ref.vars()) {
        if (std::find(unknowns.begin(), unknowns.end(), v) == unknowns.end()) {
            params.push_back(v);
        }
    }
    if (params.empty()) {
        throw domain_error("solve_implicit needs at least one parameter");
    }
    const std::size_t n = system.size();

    // Jacobian with respect to the unknowns, exact at the base point.
    SeriesMatrix jac(n);
    ExactMatrix j0(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
            jac[i].push_back(system[i].derivative(unk_idx[k]));
            j0[i].push_back(jac[i].back().constant_term());
        }
    }
    GaussianRational d0 = det_exact(j0);
    if (d0.is_zero()) {
        throw nondegeneracy_error("Jacobian singular at the base point", d0.to_string());
    }

    std::vector<TruncatedSeries> images;
    for (const auto &v : ref.vars()) {
        if (std::find(unknowns.begin(), unknowns.end(), v) != unknowns.end()) {
            images.emplace_back(params, cap);
        } else {
            images.push_back(TruncatedSeries::variable(params, cap, v));
        }
    }
    auto residual = [&] {
        std::vector<TruncatedSeries> r;
        for (const auto &f : system) {
            r.push_back(compose(f, images));
        }
        return r;
    };

    for (int good = 0; good < cap; good = 2 * good + 1) {
        std::vector<TruncatedSeries> r = residual();
        if (std::all_of(r.begin(), r.end(), [](const TruncatedSeries &s) { return s.is_zero(); })) {
            break;
        }
        // The Jacobian loses one order to differentiation; since the residual
        // has positive valuation, its missing top degree cannot reach the
        // correction below the cap.
        SeriesMatrix jx(n);
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                TruncatedSeries e = cap == 0 ? jac[i][k] : compose(jac[i][k].assume_cap(cap), images);
                jx[i].push_back(e.cap() == cap ? e : e.assume_cap(cap));
            }
        }
        std::vector<TruncatedSeries> dx = solve_series(std::move(jx), std::move(r));
        for (std::size_t k = 0; k < n; ++k) {
            images[std::size_t(unk_idx[k])] -= dx[k];
        }
    }

    for (const auto &r : residual()) {
        if (!r.is_zero()) {
            throw internal_error("solve_implicit residual does not vanish: " + r.to_string());
        }
    }
    std::map<std::string, TruncatedSeries> out;
    for (std::size_t k = 0; k < n; ++k) {
        out.emplace(unknowns[k], images[std::size_t(unk_idx[k])]);
    }
    return out;
}

} // namespace segre
