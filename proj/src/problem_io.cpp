#include "nep/problem_io.hpp"

#include <fstream>
#include <stdexcept>

#include "nep/asymptotics.hpp"

namespace nep::io {

ProblemSpec problem_from_json(const nlohmann::json& j) {
    if (!j.contains("head") || !j.contains("necks"))
        throw std::invalid_argument("problem file needs 'head' and 'necks'");
    const nlohmann::json& h = j.at("head");
    const std::string kind = h.at("kind").get<std::string>();
    HeadDomain head = HeadDomain::unit_disk();
    if (kind == "unit-disk") {
        // already built
    } else if (kind == "curve") {
        std::vector<Vec2> pts;
        for (const auto& p : h.at("points"))
            pts.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
        head = HeadDomain::from_points(pts);
    } else {
        throw std::invalid_argument("unknown head kind '" + kind + "'");
    }
    ProblemSpec spec{head, {}};
    for (const auto& n : j.at("necks")) {
        NeckSpec ns;
        ns.s = n.at("angle_or_s").get<double>();
        ns.epsilon = n.at("epsilon").get<double>();
        ns.length = n.at("length").get<double>();
        spec.necks.push_back(ns);
    }
    return spec;
}

ProblemSpec load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open problem file '" + path + "'");
    nlohmann::json j;
    in >> j;
    return problem_from_json(j);
}

nlohmann::json to_json(const ProblemSpec& spec) {
    nlohmann::json j;
    j["head"]["kind"] = spec.head.is_unit_disk() ? "unit-disk" : "curve";
    if (!spec.head.is_unit_disk()) {
        nlohmann::json pts = nlohmann::json::array();
        const int M = 512;
        for (int k = 0; k < M; ++k) {
            const Vec2 p = spec.head.point(2.0 * M_PI * k / M);
            pts.push_back({p.x, p.y});
        }
        j["head"]["points"] = pts;
    }
    j["necks"] = nlohmann::json::array();
    for (const NeckSpec& n : spec.necks)
        j["necks"].push_back({{"angle_or_s", n.s}, {"epsilon", n.epsilon}, {"length", n.length}});
    return j;
}

nlohmann::json to_json(const mc::WalkerStats& st) {
    nlohmann::json j{{"mean", st.mean_fpt},
                     {"stderr", st.std_error},
                     {"n", st.n_walkers},
                     {"dt", st.dt},
                     {"seed", st.seed},
                     {"absorbed_fraction", st.absorbed_fraction}};
    if (st.budget_exceeded > 0) j["budget_exceeded"] = st.budget_exceeded;
    return j;
}

nlohmann::json to_json(const bie::ComparisonRecord& rec) {
    return {{"u_asym", rec.u_asym}, {"u_bie", rec.u_bie}, {"rel_err", rec.rel_err}};
}

nlohmann::json asymptotic_record(const asym::AsymptoticSolution& sol,
                                 const std::vector<Vec2>& pts,
                                 const std::vector<double>& values) {
    nlohmann::json j;
    j["C"] = sol.constants.C;
    j["C_eps"] = sol.constants.C_eps;
    j["T"] = sol.factors.T;
    j["F"] = sol.factors.F;
    if (std::isfinite(sol.C_const)) j["Cconst"] = sol.C_const;
    j["error_order"] = sol.error_order;
    nlohmann::json at = nlohmann::json::array();
    for (size_t k = 0; k < pts.size(); ++k)
        at.push_back({{"x", pts[k].x}, {"y", pts[k].y}, {"u", values[k]}});
    j["u_at"] = at;
    return j;
}

}  // namespace nep::io
