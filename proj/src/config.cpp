#include "hyperfe2/config.hpp"

#include <fstream>
#include <map>
#include <set>

namespace hyperfe2 {

using nlohmann::json;

const char* run_mode_name(RunMode mode)
{
    switch (mode) {
    case RunMode::HighFidelity: return "hf";
    case RunMode::Reduced: return "rom";
    case RunMode::GaussPointHyper: return "ecm";
    case RunMode::ElementHyper: return "eheim";
    }
    fail("invalid run mode enum");
}

RunMode run_mode_from_name(const std::string& name)
{
    if (name == "hf") return RunMode::HighFidelity;
    if (name == "rom") return RunMode::Reduced;
    if (name == "ecm") return RunMode::GaussPointHyper;
    if (name == "eheim") return RunMode::ElementHyper;
    fail("config.mode: unknown mode '", name, "' (expected hf|rom|ecm|eheim)");
}

namespace {

void reject_unknown(const json& j, const std::string& where,
                    const std::set<std::string>& known)
{
    for (const auto& [key, value] : j.items())
        if (!known.count(key))
            fail("config.", where, ": unknown key '", key, "'");
}

double get_number(const json& j, const std::string& where, const char* key,
                  std::optional<double> fallback = {})
{
    if (!j.contains(key)) {
        if (fallback)
            return *fallback;
        fail("config.", where, ": missing field '", key, "'");
    }
    require(j[key].is_number(), "config.", where, ".", key, ": expected a number");
    return j[key].get<double>();
}

int comp_from_string(const std::string& s, const std::string& where)
{
    if (s == "x") return 0;
    if (s == "y") return 1;
    if (s == "both") return 2;
    fail("config.", where, ": component must be x|y|both, got '", s, "'");
}

const char* comp_to_string(int comp)
{
    return comp == 0 ? "x" : (comp == 1 ? "y" : "both");
}

RegionBox parse_box(const json& j, const std::string& where)
{
    require(j.is_array() && j.size() == 4, "config.", where,
            ": box must be [x0, y0, x1, y1]");
    RegionBox box;
    box.lo = Vec2(j[0].get<double>(), j[1].get<double>());
    box.hi = Vec2(j[2].get<double>(), j[3].get<double>());
    return box;
}

json box_to_json(const RegionBox& box)
{
    return json::array({ box.lo[0], box.lo[1], box.hi[0], box.hi[1] });
}

Material parse_material(const json& j, const std::string& where)
{
    require(j.is_object(), "config.", where, ": expected an object");
    const std::string type = j.value("type", "elastic");

    ElasticParams elastic;
    elastic.youngs = get_number(j, where, "youngs");
    elastic.poisson = get_number(j, where, "poisson", 0.3);
    elastic.plane_stress = j.value("plane_stress", false);

    Material m;
    if (type == "elastic") {
        reject_unknown(j, where, { "type", "youngs", "poisson", "plane_stress" });
        elastic.check();
        m.model = elastic;
    } else if (type == "j2") {
        reject_unknown(j, where,
                       { "type", "youngs", "poisson", "plane_stress", "yield0",
                         "hardening" });
        J2Params p;
        p.elastic = elastic;
        p.yield0 = get_number(j, where, "yield0");
        p.hardening = get_number(j, where, "hardening", 0.0);
        p.check();
        m.model = p;
    } else if (type == "vevp") {
        reject_unknown(j, where,
                       { "type", "youngs", "poisson", "plane_stress", "branches",
                         "visc_drag", "rate_exponent", "yield0", "hard_modulus",
                         "hard_exponent", "damage_resistance", "damage_exponent",
                         "integration" });
        VevpParams p;
        p.elastic = elastic;
        if (j.contains("branches")) {
            for (const auto& b : j["branches"]) {
                reject_unknown(b, where + ".branches", { "modulus", "viscosity" });
                p.branches.push_back({ b.at("modulus").get<double>(),
                                       b.at("viscosity").get<double>() });
            }
        }
        p.visc_drag = get_number(j, where, "visc_drag");
        p.rate_exponent = get_number(j, where, "rate_exponent", 1.0);
        p.yield0 = get_number(j, where, "yield0");
        p.hard_modulus = get_number(j, where, "hard_modulus", 0.0);
        p.hard_exponent = get_number(j, where, "hard_exponent", 1.0);
        p.damage_resistance = get_number(j, where, "damage_resistance");
        p.damage_exponent = get_number(j, where, "damage_exponent", 1.0);
        const std::string scheme = j.value("integration", "implex");
        if (scheme == "implex")
            p.implex = true;
        else if (scheme == "implicit")
            p.implex = false;
        else
            fail("config.", where, ".integration: expected implicit|implex");
        p.check();
        m.model = p;
    } else {
        fail("config.", where, ".type: unknown material type '", type, "'");
    }
    return m;
}

json material_to_json(const Material& m)
{
    json j;
    if (const auto* el = std::get_if<ElasticParams>(&m.model)) {
        j["type"] = "elastic";
        j["youngs"] = el->youngs;
        j["poisson"] = el->poisson;
        j["plane_stress"] = el->plane_stress;
    } else if (const auto* p = std::get_if<J2Params>(&m.model)) {
        j["type"] = "j2";
        j["youngs"] = p->elastic.youngs;
        j["poisson"] = p->elastic.poisson;
        j["plane_stress"] = p->elastic.plane_stress;
        j["yield0"] = p->yield0;
        j["hardening"] = p->hardening;
    } else {
        const auto& v = std::get<VevpParams>(m.model);
        j["type"] = "vevp";
        j["youngs"] = v.elastic.youngs;
        j["poisson"] = v.elastic.poisson;
        j["plane_stress"] = v.elastic.plane_stress;
        j["branches"] = json::array();
        for (const KelvinBranch& b : v.branches)
            j["branches"].push_back(
                { { "modulus", b.modulus }, { "viscosity", b.viscosity } });
        j["visc_drag"] = v.visc_drag;
        j["rate_exponent"] = v.rate_exponent;
        j["yield0"] = v.yield0;
        j["hard_modulus"] = v.hard_modulus;
        j["hard_exponent"] = v.hard_exponent;
        j["damage_resistance"] = v.damage_resistance;
        j["damage_exponent"] = v.damage_exponent;
        j["integration"] = v.implex ? "implex" : "implicit";
    }
    return j;
}

BcConfig parse_bc(const json& j, const std::string& where, double t_end)
{
    reject_unknown(j, where, { "box", "comp", "amplitude", "table" });
    BcConfig bc;
    bc.box = parse_box(j.at("box"), where + ".box");
    bc.comp = comp_from_string(j.value("comp", "both"), where + ".comp");
    if (j.contains("table")) {
        require(!j.contains("amplitude"), "config.", where,
                ": give either amplitude or table, not both");
        for (const auto& row : j["table"]) {
            require(row.is_array() && row.size() == 2, "config.", where,
                    ".table: rows must be [t, value]");
            bc.value.samples.push_back({ row[0].get<double>(), row[1].get<double>() });
        }
        require(!bc.value.samples.empty(), "config.", where, ".table is empty");
    } else {
        bc.value = TimeTable::ramp(t_end, get_number(j, where, "amplitude"));
    }
    return bc;
}

json bc_to_json(const BcConfig& bc)
{
    json j;
    j["box"] = box_to_json(bc.box);
    j["comp"] = comp_to_string(bc.comp);
    j["table"] = json::array();
    for (const auto& s : bc.value.samples)
        j["table"].push_back(json::array({ s[0], s[1] }));
    return j;
}

} // namespace

std::vector<double> RunConfig::time_stations() const
{
    std::vector<double> t(steps);
    for (int i = 0; i < steps; ++i)
        t[i] = t_end * (i + 1) / static_cast<double>(steps);
    return t;
}

MacroProblem RunConfig::macro_problem(Mesh mesh) const
{
    MacroProblem p;
    p.mesh = std::move(mesh);
    for (const BcConfig& bc : dirichlet)
        p.dirichlet.push_back({ bc.box, bc.comp, bc.value });
    for (const BcConfig& bc : loads) {
        require(bc.comp != 2, "config.bcs.loads: component must be x or y");
        p.loads.push_back({ bc.box, bc.comp, bc.value });
    }
    p.times = time_stations();
    p.monitor = monitor;
    p.probes = probes;
    return p;
}

RunConfig parse_config_json(const json& j)
{
    reject_unknown(j, "",
                   { "macro_mesh", "rve_mesh", "materials", "mode", "solver",
                     "rom", "hyper", "sampling", "loading", "bcs", "monitor",
                     "probes", "tolerances", "pbc_tol", "anchor_node", "output" });

    RunConfig c;
    require(j.contains("rve_mesh"), "config: missing field 'rve_mesh'");
    c.rve_mesh = j.at("rve_mesh").get<std::string>();
    c.macro_mesh = j.value("macro_mesh", std::string());

    require(j.contains("materials") && j["materials"].is_object(),
            "config: missing \"materials\" object");
    std::map<int, Material> by_id;
    for (const auto& [key, value] : j["materials"].items()) {
        int id = -1;
        try {
            id = std::stoi(key);
        } catch (...) {
            fail("config.materials: key '", key, "' is not a material id");
        }
        by_id.emplace(id, parse_material(value, "materials." + key));
    }
    require(!by_id.empty(), "config.materials is empty");
    const int max_id = by_id.rbegin()->first;
    for (int id = 0; id <= max_id; ++id)
        require(by_id.count(id), "config.materials: id ", id,
                " missing (ids must be contiguous from 0)");
    for (auto& [id, m] : by_id)
        c.materials.push_back(std::move(m));

    c.mode = run_mode_from_name(j.value("mode", "hf"));
    const std::string solver = j.value("solver", "monolithic");
    if (solver == "monolithic")
        c.coupling = CouplingScheme::Monolithic;
    else if (solver == "staggered")
        c.coupling = CouplingScheme::Staggered;
    else
        fail("config.solver: expected monolithic|staggered");

    if (j.contains("rom")) {
        const json& r = j["rom"];
        reject_unknown(r, "rom", { "modes", "energy" });
        require(!(r.contains("modes") && r.contains("energy")),
                "config.rom: give either modes or energy, not both");
        if (r.contains("energy"))
            c.truncation.energy = r["energy"].get<double>();
        else
            c.truncation.count = r.value("modes", 8);
    } else {
        c.truncation.count = 8;
    }

    if (j.contains("hyper")) {
        const json& h = j["hyper"];
        reject_unknown(h, "hyper",
                       { "m_tilde", "sweep", "criteria", "source", "row_cutoff" });
        c.m_tilde = h.value("m_tilde", 0);
        if (h.contains("sweep"))
            c.m_tilde_sweep = h["sweep"].get<std::vector<int>>();
        if (h.contains("criteria"))
            c.criteria = CriterionSet::from_names(
                h["criteria"].get<std::vector<std::string>>());
        else
            c.criteria = CriterionSet::additional();
        const std::string source = h.value("source", "rom");
        if (source == "hf")
            c.hyper_snapshots_from_hf = true;
        else
            require(source == "rom", "config.hyper.source: expected rom|hf");
        c.row_cutoff = h.value("row_cutoff", 1e-10);
    } else {
        c.criteria = CriterionSet::additional();
    }
    if (c.mode == RunMode::GaussPointHyper || c.mode == RunMode::ElementHyper)
        require(c.m_tilde > 0 || !c.m_tilde_sweep.empty(),
                "config.hyper.m_tilde: required for mode '", run_mode_name(c.mode),
                "'");

    if (j.contains("sampling")) {
        const json& s = j["sampling"];
        reject_unknown(s, "sampling", { "clusters", "seed" });
        c.clusters = s.value("clusters", 8);
        require(c.clusters >= 1, "config.sampling.clusters must be positive");
        c.seed = s.value("seed", static_cast<std::uint64_t>(42));
    }

    if (j.contains("loading")) {
        const json& l = j["loading"];
        reject_unknown(l, "loading", { "t_end", "steps" });
        c.t_end = get_number(l, "loading", "t_end", 1.0);
        c.steps = l.value("steps", 20);
        require(c.t_end > 0.0 && c.steps > 0, "config.loading: t_end and steps must be positive");
    }

    if (j.contains("bcs")) {
        const json& b = j["bcs"];
        reject_unknown(b, "bcs", { "dirichlet", "loads" });
        if (b.contains("dirichlet"))
            for (size_t i = 0; i < b["dirichlet"].size(); ++i)
                c.dirichlet.push_back(parse_bc(b["dirichlet"][i],
                                               cat("bcs.dirichlet[", i, "]"),
                                               c.t_end));
        if (b.contains("loads"))
            for (size_t i = 0; i < b["loads"].size(); ++i)
                c.loads.push_back(parse_bc(b["loads"][i],
                                           cat("bcs.loads[", i, "]"), c.t_end));
    }

    if (j.contains("monitor")) {
        const json& m = j["monitor"];
        reject_unknown(m, "monitor", { "box", "comp" });
        c.monitor.region = parse_box(m.at("box"), "monitor.box");
        c.monitor.comp = comp_from_string(m.value("comp", "y"), "monitor.comp");
        require(c.monitor.comp != 2, "config.monitor.comp must be x or y");
    }

    if (j.contains("probes"))
        for (const auto& p : j["probes"]) {
            require(p.is_array() && p.size() == 2,
                    "config.probes: entries must be [element, gauss_point]");
            c.probes.emplace_back(p[0].get<int>(), p[1].get<int>());
        }

    if (j.contains("tolerances")) {
        const json& t = j["tolerances"];
        reject_unknown(t, "tolerances",
                       { "micro_rel", "micro_abs_scale", "micro_max_iter",
                         "macro_rel", "macro_max_iter" });
        c.micro_tol.rel = t.value("micro_rel", 1e-8);
        c.micro_tol.abs_scale = t.value("micro_abs_scale", 1e-10);
        c.micro_tol.max_iterations = t.value("micro_max_iter", 25);
        c.macro_rel_tol = t.value("macro_rel", 1e-6);
        c.macro_max_iterations = t.value("macro_max_iter", 25);
    }

    c.pbc_tol = j.value("pbc_tol", 1e-8);
    c.anchor_node = j.value("anchor_node", -1);
    c.output_dir = j.value("output", "out");
    return c;
}

RunConfig parse_config(const std::string& path)
{
    std::ifstream in(path);
    require(in.good(), "cannot open config file '", path, "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail("config file '", path, "': ", e.what());
    }
    return parse_config_json(j);
}

nlohmann::json config_to_json(const RunConfig& c)
{
    json j;
    j["macro_mesh"] = c.macro_mesh;
    j["rve_mesh"] = c.rve_mesh;
    j["materials"] = json::object();
    for (size_t i = 0; i < c.materials.size(); ++i)
        j["materials"][cat(i)] = material_to_json(c.materials[i]);
    j["mode"] = run_mode_name(c.mode);
    j["solver"] = c.coupling == CouplingScheme::Monolithic ? "monolithic"
                                                           : "staggered";
    if (c.truncation.energy)
        j["rom"] = { { "energy", *c.truncation.energy } };
    else
        j["rom"] = { { "modes", c.truncation.count.value_or(8) } };
    j["hyper"] = { { "m_tilde", c.m_tilde },
                   { "sweep", c.m_tilde_sweep },
                   { "criteria", c.criteria.names() },
                   { "source", c.hyper_snapshots_from_hf ? "hf" : "rom" },
                   { "row_cutoff", c.row_cutoff } };
    j["sampling"] = { { "clusters", c.clusters }, { "seed", c.seed } };
    j["loading"] = { { "t_end", c.t_end }, { "steps", c.steps } };
    j["bcs"] = json::object();
    j["bcs"]["dirichlet"] = json::array();
    for (const BcConfig& bc : c.dirichlet)
        j["bcs"]["dirichlet"].push_back(bc_to_json(bc));
    j["bcs"]["loads"] = json::array();
    for (const BcConfig& bc : c.loads)
        j["bcs"]["loads"].push_back(bc_to_json(bc));
    j["monitor"] = { { "box", box_to_json(c.monitor.region) },
                     { "comp", comp_to_string(c.monitor.comp) } };
    j["probes"] = json::array();
    for (const auto& [e, g] : c.probes)
        j["probes"].push_back(json::array({ e, g }));
    j["tolerances"] = { { "micro_rel", c.micro_tol.rel },
                        { "micro_abs_scale", c.micro_tol.abs_scale },
                        { "micro_max_iter", c.micro_tol.max_iterations },
                        { "macro_rel", c.macro_rel_tol },
                        { "macro_max_iter", c.macro_max_iterations } };
    j["pbc_tol"] = c.pbc_tol;
    j["anchor_node"] = c.anchor_node;
    j["output"] = c.output_dir;
    return j;
}

} // namespace hyperfe2
