#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include <segre/errors.hpp>
#include <segre/obstruction.hpp>

namespace segre
{

// Cached gamma sequences, keyed by (n, m, d). The basis of a factor depends
// on (n, m, d) only, so so does its gamma sequence.
struct GammaTable {
    int version = 0;
    std::string provenance;
    std::map<std::tuple<int, int, int>, std::vector<Multiindex>> entries;

    const std::vector<Multiindex> *find(int n, int m, int d) const
    {
        auto it = entries.find({n, m, d});
        return it == entries.end() ? nullptr : &it->second;
    }
};

inline constexpr int gamma_table_version = 1;

inline nlohmann::json gamma_table_to_json(const GammaTable &t)
{
    nlohmann::json j;
    j["version"] = t.version;
    j["provenance"] = t.provenance;
    j["entries"] = nlohmann::json::array();
    for (const auto &[key, gammas] : t.entries) {
        const auto &[n, m, d] = key;
        nlohmann::json e;
        e["n"] = n;
        e["m"] = m;
        e["d"] = d;
        e["s"] = gammas.size();
        e["gammas"] = gammas;
        j["entries"].push_back(e);
    }
    return j;
}

inline GammaTable gamma_table_from_json(const nlohmann::json &j)
{
    GammaTable t;
    try {
        t.version = j.at("version").get<int>();
        if (t.version != gamma_table_version) {
            throw data_error("gamma table version " + std::to_string(t.version) + " is not supported (expected " +
                             std::to_string(gamma_table_version) + ")");
        }
        t.provenance = j.value("provenance", "");
        for (const auto &e : j.at("entries")) {
            const int n = e.at("n").get<int>();
            const int m = e.at("m").get<int>();
            const int d = e.at("d").get<int>();
            auto gammas = e.at("gammas").get<std::vector<Multiindex>>();
            if (e.contains("s") && e.at("s").get<std::size_t>() != gammas.size()) {
                throw data_error("gamma table entry (" + std::to_string(n) + "," + std::to_string(m) + "," +
                                 std::to_string(d) + ") lists s that does not match its gammas");
            }
            t.entries[{n, m, d}] = std::move(gammas);
        }
    } catch (const nlohmann::json::exception &ex) {
        throw data_error(std::string("malformed gamma table: ") + ex.what());
    }
    return t;
}

inline GammaTable load_gamma_table(const std::string &path)
{
    std::ifstream in(path);
    if (!in) {
        throw data_error("cannot open gamma table '" + path + "'");
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &ex) {
        throw data_error("gamma table '" + path + "' is not valid JSON: " + ex.what());
    }
    return gamma_table_from_json(j);
}

namespace detail
{

inline std::vector<Multiindex> graded_indices(int n, int count)
{
    std::vector<Multiindex> out;
    for (int l = 1; int(out.size()) < count; ++l) {
        for (auto &g : multiindices_of_degree(n, l)) {
            if (int(out.size()) < count) {
                out.push_back(g);
            }
        }
    }
    return out;
}

} // namespace detail

// The shipped table (identical to data/gamma_table.json). Each entry is the
// result of search_gammas on random_formal_system(n, 8, seed 11).
inline GammaTable default_gamma_table()
{
    GammaTable t;
    t.version = gamma_table_version;
    t.provenance = "search_gammas on random_formal_system(n, degree 8, seed 11), budget 100000";
    t.entries[{1, 1, 3}] = consecutive_gammas(5);
    t.entries[{1, 2, 6}] = consecutive_gammas(15);
    t.entries[{2, 2, 4}] = detail::graded_indices(2, 38);
    return t;
}

// Gamma sequence for a spec from the table; nullptr when absent.
inline const std::vector<Multiindex> *lookup_gammas(const GammaTable &t, const ObstructionSpec &spec)
{
    const auto *g = t.find(spec.n, spec.m, spec.d());
    if (g && g->size() != std::size_t(spec.s())) {
        throw data_error("gamma table entry (" + std::to_string(spec.n) + "," + std::to_string(spec.m) + "," +
                         std::to_string(spec.d()) + ") has " + std::to_string(g->size()) + " gammas, the basis needs " +
                         std::to_string(spec.s()));
    }
    return g;
}

} // namespace segre
