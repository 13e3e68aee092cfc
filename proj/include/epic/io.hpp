#pragma once

// JSON reading and writing for tabular MDPs, named rewards and coverage distributions.
//
// MDP document:
//   {"n_states": S, "n_actions": A, "discount": g,
//    "transition": [S][A][S], "initial_dist": [S],
//    "rewards": {"name": [S][A][S], ...}}
// Coverage document:
//   {"joint": [S][A][S], "state_dist": [S], "action_dist": [A]}
// where the two marginals are optional and default to those of `joint`.

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "epic/core.hpp"

namespace epic {

struct TabularProblem {
    TabularMdp mdp;
    std::map<std::string, RewardTable> rewards;
};

namespace detail {

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* key,
                                           const std::string& where) {
    if (!j.is_object() || !j.contains(key))
        throw ValidationError(where + ": missing field '" + key + "'");
    return j.at(key);
}

inline std::vector<double> flatten_numbers(const nlohmann::json& j,
                                           const std::vector<std::size_t>& dims,
                                           const std::string& what) {
    std::vector<double> out;
    out.reserve([&] {
        std::size_t n = 1;
        for (auto d : dims) n *= d;
        return n;
    }());
    auto rec = [&](auto&& self, const nlohmann::json& node, std::size_t depth) -> void {
        if (depth == dims.size()) {
            if (!node.is_number()) throw ValidationError(what + ": expected a number");
            out.push_back(node.get<double>());
            return;
        }
        if (!node.is_array() || node.size() != dims[depth])
            throw DimensionError(what + ": expected an array of length " +
                                 std::to_string(dims[depth]) + " at depth " +
                                 std::to_string(depth));
        for (const auto& child : node) self(self, child, depth + 1);
    };
    rec(rec, j, 0);
    return out;
}

inline nlohmann::json nest_numbers(const std::vector<double>& flat,
                                   const std::vector<std::size_t>& dims) {
    std::size_t pos = 0;
    auto rec = [&](auto&& self, std::size_t depth) -> nlohmann::json {
        if (depth == dims.size()) return flat[pos++];
        nlohmann::json arr = nlohmann::json::array();
        for (std::size_t i = 0; i < dims[depth]; ++i) arr.push_back(self(self, depth + 1));
        return arr;
    };
    return rec(rec, 0);
}

inline nlohmann::json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError("malformed JSON in '" + path.string() + "': " + e.what());
    }
}

} // namespace detail

inline TabularProblem tabular_problem_from_json(const nlohmann::json& j) {
    const std::string where = "MDP document";
    const auto& ns_j = detail::require_field(j, "n_states", where);
    const auto& na_j = detail::require_field(j, "n_actions", where);
    if (!ns_j.is_number_unsigned() || !na_j.is_number_unsigned())
        throw ValidationError(where + ": n_states and n_actions must be positive integers");
    const auto ns = ns_j.get<std::size_t>(), na = na_j.get<std::size_t>();
    if (ns == 0 || na == 0) throw ValidationError(where + ": n_states and n_actions must be positive");
    const auto& g = detail::require_field(j, "discount", where);
    if (!g.is_number()) throw ValidationError(where + ": discount must be a number");
    auto transition =
        detail::flatten_numbers(detail::require_field(j, "transition", where), {ns, na, ns},
                                "transition");
    auto initial = detail::flatten_numbers(detail::require_field(j, "initial_dist", where), {ns},
                                           "initial_dist");
    TabularProblem out{TabularMdp(ns, na, std::move(transition), std::move(initial),
                                  g.get<double>()),
                       {}};
    if (j.contains("rewards")) {
        const auto& rw = j.at("rewards");
        if (!rw.is_object()) throw ValidationError(where + ": 'rewards' must be an object");
        for (const auto& [name, values] : rw.items())
            out.rewards.emplace(name, RewardTable(out.mdp.shape(),
                                                  detail::flatten_numbers(values, {ns, na, ns},
                                                                          "reward '" + name + "'")));
    }
    return out;
}

inline TabularProblem load_tabular_problem(const std::filesystem::path& path) {
    return tabular_problem_from_json(detail::read_json_file(path));
}

inline nlohmann::json to_json(const TabularMdp& mdp,
                              const std::map<std::string, RewardTable>& rewards = {}) {
    const auto ns = mdp.n_states(), na = mdp.n_actions();
    nlohmann::json j;
    j["n_states"] = ns;
    j["n_actions"] = na;
    j["discount"] = mdp.discount();
    j["transition"] = detail::nest_numbers(mdp.transition(), {ns, na, ns});
    j["initial_dist"] = mdp.initial_dist();
    j["rewards"] = nlohmann::json::object();
    for (const auto& [name, r] : rewards) {
        if (!(r.shape() == mdp.shape()))
            throw DimensionError("reward '" + name + "' does not match the MDP shape");
        j["rewards"][name] = detail::nest_numbers(r.values(), {ns, na, ns});
    }
    return j;
}

inline CoverageDistribution coverage_from_json(const nlohmann::json& j, TransitionShape shape) {
    auto joint = detail::flatten_numbers(detail::require_field(j, "joint", "coverage document"),
                                         {shape.n_states, shape.n_actions, shape.n_states},
                                         "coverage joint");
    auto base = CoverageDistribution::from_joint(shape, joint);
    auto ds = j.contains("state_dist")
                  ? detail::flatten_numbers(j.at("state_dist"), {shape.n_states}, "state_dist")
                  : base.state_dist();
    auto da = j.contains("action_dist")
                  ? detail::flatten_numbers(j.at("action_dist"), {shape.n_actions}, "action_dist")
                  : base.action_dist();
    return {shape, std::move(joint), std::move(ds), std::move(da)};
}

inline CoverageDistribution load_coverage(const std::filesystem::path& path, TransitionShape shape) {
    return coverage_from_json(detail::read_json_file(path), shape);
}

} // namespace epic
