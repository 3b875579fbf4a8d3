#include "optomech/io.hpp"

#include "optomech/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace optomech {

namespace {

struct RawValue {
    std::string text;
    int line = 0;
};

using RawMap = std::map<std::string, RawValue>;

const std::vector<std::string> required_keys = {
    "omega_m_hz", "mass_kg", "gamma_over_omega_m", "kappa_over_omega_m", "lambda_nm", "n_order", "power_w",
};

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const RawValue& v)
{
    double out = 0.0;
    const char* first = v.text.data();
    const char* last = first + v.text.size();
    const auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc() || res.ptr != last || !std::isfinite(out))
        throw ConfigError("config line " + std::to_string(v.line) + ": key '" + key + "' expects a number, got '" +
                              v.text + "'",
                          key, v.line);
    return out;
}

int to_int(const std::string& key, const RawValue& v)
{
    int out = 0;
    const char* first = v.text.data();
    const char* last = first + v.text.size();
    const auto res = std::from_chars(first, last, out);
    if (res.ec != std::errc() || res.ptr != last)
        throw ConfigError("config line " + std::to_string(v.line) + ": key '" + key + "' expects an integer, got '" +
                              v.text + "'",
                          key, v.line);
    return out;
}

void require(bool ok, const std::string& key, const RawValue& v, const char* what)
{
    if (!ok)
        throw ConfigError("config line " + std::to_string(v.line) + ": key '" + key + "' must be " + what, key,
                          v.line);
}

RawMap raw_from(const RunConfig& cfg)
{
    const auto& p = cfg.params;
    const auto& ic = cfg.integrator;
    RawMap raw;
    raw["omega_m_hz"] = {format_double(p.omega_m), 0};
    raw["mass_kg"] = {format_double(p.mass), 0};
    raw["gamma_over_omega_m"] = {format_double(p.gamma / p.omega_m), 0};
    raw["kappa_over_omega_m"] = {format_double(p.kappa / p.omega_m), 0};
    raw["lambda_nm"] = {format_double(p.lambda_l * 1e9), 0};
    raw["n_order"] = {std::to_string(p.n_order), 0};
    raw["power_w"] = {format_double(p.power), 0};
    raw["duffing_alpha_per_m2"] = {format_double(p.duffing_alpha), 0};
    raw["dt_base"] = {format_double(ic.dt_base), 0};
    raw["refine_factor"] = {std::to_string(ic.refine_factor), 0};
    if (cfg.refine_halfwidth_set) raw["refine_halfwidth_nm"] = {format_double(ic.refine_halfwidth * 1e9), 0};
    raw["window_margin"] = {std::to_string(ic.window_margin), 0};
    raw["ringdown_tolerance"] = {format_double(ic.ringdown_tolerance), 0};
    raw["ringdown_reach"] = {format_double(ic.ringdown_reach), 0};
    return raw;
}

RunConfig build(const RawMap& raw)
{
    for (const auto& key : required_keys) {
        if (!raw.count(key)) throw ConfigError("config: missing required key '" + key + "'", key, 0);
    }
    RunConfig cfg;
    SystemParams& p = cfg.params;
    auto get = [&](const std::string& key) -> const RawValue& { return raw.at(key); };

    p.omega_m = to_double("omega_m_hz", get("omega_m_hz"));
    require(p.omega_m > 0.0, "omega_m_hz", get("omega_m_hz"), "positive");
    p.mass = to_double("mass_kg", get("mass_kg"));
    require(p.mass > 0.0, "mass_kg", get("mass_kg"), "positive");
    const double g = to_double("gamma_over_omega_m", get("gamma_over_omega_m"));
    require(g >= 0.0, "gamma_over_omega_m", get("gamma_over_omega_m"), "non-negative");
    p.gamma = g * p.omega_m;
    const double k = to_double("kappa_over_omega_m", get("kappa_over_omega_m"));
    require(k > 0.0, "kappa_over_omega_m", get("kappa_over_omega_m"), "positive");
    p.kappa = k * p.omega_m;
    const double lam = to_double("lambda_nm", get("lambda_nm"));
    require(lam > 0.0, "lambda_nm", get("lambda_nm"), "positive");
    p.lambda_l = lam * 1e-9;
    p.n_order = to_int("n_order", get("n_order"));
    require(p.n_order >= 1, "n_order", get("n_order"), "at least 1");
    p.power = to_double("power_w", get("power_w"));
    require(p.power >= 0.0, "power_w", get("power_w"), "non-negative");
    if (raw.count("duffing_alpha_per_m2"))
        p.duffing_alpha = to_double("duffing_alpha_per_m2", get("duffing_alpha_per_m2"));

    IntegratorConfig& ic = cfg.integrator;
    ic = IntegratorConfig::defaults(p);
    if (raw.count("dt_base")) {
        ic.dt_base = to_double("dt_base", get("dt_base"));
        require(ic.dt_base > 0.0, "dt_base", get("dt_base"), "positive");
    }
    if (raw.count("refine_factor")) {
        ic.refine_factor = to_int("refine_factor", get("refine_factor"));
        require(ic.refine_factor >= 1, "refine_factor", get("refine_factor"), "at least 1");
    }
    if (raw.count("refine_halfwidth_nm")) {
        ic.refine_halfwidth = to_double("refine_halfwidth_nm", get("refine_halfwidth_nm")) * 1e-9;
        require(ic.refine_halfwidth > 0.0, "refine_halfwidth_nm", get("refine_halfwidth_nm"), "positive");
        cfg.refine_halfwidth_set = true;
    }
    if (raw.count("window_margin")) {
        ic.window_margin = to_int("window_margin", get("window_margin"));
        require(ic.window_margin >= 1, "window_margin", get("window_margin"), "at least 1");
    }
    if (raw.count("ringdown_tolerance")) {
        ic.ringdown_tolerance = to_double("ringdown_tolerance", get("ringdown_tolerance"));
        require(ic.ringdown_tolerance > 0.0, "ringdown_tolerance", get("ringdown_tolerance"), "positive");
    }
    if (raw.count("ringdown_reach")) {
        ic.ringdown_reach = to_double("ringdown_reach", get("ringdown_reach"));
        require(ic.ringdown_reach >= 1.0, "ringdown_reach", get("ringdown_reach"), "at least 1");
    }
    return cfg;
}

void check_key(const std::string& key, int line)
{
    static const std::set<std::string> known(config_keys().begin(), config_keys().end());
    if (!known.count(key))
        throw ConfigError("config line " + std::to_string(line) + ": unknown key '" + key + "'", key, line);
}

void put(std::ostream& out, double v, bool last = false)
{
    out << format_double(v) << (last ? '\n' : ',');
}

} // namespace

const std::vector<std::string>& config_keys()
{
    static const std::vector<std::string> keys = {
        "omega_m_hz", "mass_kg",        "gamma_over_omega_m",  "kappa_over_omega_m", "lambda_nm",
        "n_order",    "power_w",        "duffing_alpha_per_m2", "dt_base",           "refine_factor",
        "refine_halfwidth_nm", "window_margin", "ringdown_tolerance", "ringdown_reach",
    };
    return keys;
}

std::string format_double(double v)
{
    if (std::isnan(v)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

RunConfig parse_config(std::istream& in)
{
    RawMap raw;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(number) + ": expected key = value", line, number);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(number) + ": empty key", "", number);
        check_key(key, number);
        if (raw.count(key))
            throw ConfigError("config line " + std::to_string(number) + ": duplicate key '" + key + "'", key, number);
        if (value.empty())
            throw ConfigError("config line " + std::to_string(number) + ": key '" + key + "' has no value", key,
                              number);
        raw[key] = {value, number};
    }
    return build(raw);
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'", "", 0);
    return parse_config(in);
}

RunConfig default_config()
{
    RunConfig cfg;
    cfg.params = SystemParams::desk_defaults();
    cfg.integrator = IntegratorConfig::defaults(cfg.params);
    return cfg;
}

void apply_overrides(RunConfig& cfg, const std::map<std::string, std::string>& overrides)
{
    if (overrides.empty()) return;
    RawMap raw = raw_from(cfg);
    for (const auto& [key, value] : overrides) {
        check_key(key, 0);
        raw[key] = {trim(value), 0};
    }
    cfg = build(raw);
}

void write_config(std::ostream& out, const RunConfig& cfg)
{
    for (const auto& [key, value] : raw_from(cfg)) out << key << " = " << value.text << '\n';
}

namespace csv {

void write_trajectory(std::ostream& out, const Trajectory& traj)
{
    out << trajectory_header << '\n';
    for (const auto& s : traj.samples) {
        put(out, s.t);
        put(out, s.x);
        put(out, s.p);
        put(out, s.photons);
        put(out, s.work);
        put(out, s.dissipated, true);
    }
}

void write_photons(std::ostream& out, const Trajectory& traj)
{
    out << photons_header << '\n';
    for (const auto& s : traj.samples) {
        put(out, s.t);
        put(out, s.photons, true);
    }
}

void write_limit_cycle(std::ostream& out, const LimitCycle& cycle)
{
    out << limit_cycle_header << '\n';
    for (const auto& pt : cycle.points) {
        put(out, pt.x);
        put(out, pt.p, true);
    }
}

void write_mode_dump(std::ostream& out, const Trajectory& traj)
{
    out << mode_dump_header << '\n';
    for (const auto& m : traj.mode_dump) {
        put(out, m.t);
        out << m.k << ',';
        put(out, m.alpha.real());
        put(out, m.alpha.imag(), true);
    }
}

void write_branch_table(std::ostream& out, const SweepResult& result)
{
    out << branch_header << '\n';
    for (const auto& pt : result.points) {
        int id = 0;
        for (const auto& b : pt.ensemble.branches.branches) {
            put(out, pt.value);
            put(out, b.center);
            put(out, b.representative.a_min);
            put(out, b.representative.a_max);
            out << id++ << ',' << b.count << '\n';
        }
    }
}

void write_fixed_cycles(std::ostream& out, double power, const KickMap& km, const std::vector<FixedCycle>& cycles,
                        bool audit)
{
    out << (audit ? fixed_cycle_audit_header : fixed_cycle_header) << '\n';
    for (const auto& c : cycles) {
        const BalanceAudit b = km.balance_audit(c);
        put(out, power);
        put(out, c.a_min);
        put(out, c.a_max);
        put(out, c.a_bar);
        out << (c.stable ? 1 : 0) << ',';
        if (!audit) {
            put(out, b.residual, true);
            continue;
        }
        put(out, b.residual);
        put(out, b.lhs);
        put(out, b.rhs);
        put(out, c.slope);
        out << (c.advisory ? 1 : 0) << '\n';
    }
}

void write_attractor(std::ostream& out, const SweepResult& result)
{
    out << (result.variable == SweepVariable::Power ? attractor_header : duffing_header) << '\n';
    for (const auto& r : attractor_rows(result)) {
        put(out, r.value);
        put(out, r.a_bar);
        out << r.branch_id << ',' << r.n_seeds << ',' << r.status << '\n';
    }
}

void write_trace(std::ostream& out, const BranchTrace& trace)
{
    out << attractor_header << '\n';
    for (const auto& e : trace.entries) {
        put(out, e.value);
        put(out, e.a_bar);
        out << 0 << ',' << 1 << ',' << (e.branch_jump ? "branch_jump" : to_string(e.status)) << '\n';
    }
}

void write_comparison(std::ostream& out, const ComparisonReport& report)
{
    out << comparison_header << '\n';
    for (const auto& r : report.rows) {
        put(out, r.power);
        put(out, r.a_bar_full);
        put(out, r.a_bar_kickmap);
        put(out, r.rel_diff);
        out << (r.matched ? 1 : 0) << '\n';
    }
}

Table read(std::istream& in)
{
    Table t;
    std::string line;
    bool first = true;
    auto split = [](const std::string& l) {
        std::vector<std::string> cells;
        std::stringstream ss(l);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
        if (!l.empty() && l.back() == ',') cells.emplace_back();
        return cells;
    };
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (first) {
            t.header = split(line);
            first = false;
            continue;
        }
        auto cells = split(line);
        if (cells.size() != t.header.size())
            throw Error("csv row " + std::to_string(t.rows.size() + 1) + " has " + std::to_string(cells.size()) +
                        " cells, header has " + std::to_string(t.header.size()));
        t.rows.push_back(std::move(cells));
    }
    return t;
}

std::string validate(const Table& table, const std::string& expected_header,
                     const std::vector<std::string>& numeric_columns)
{
    std::string joined;
    for (std::size_t i = 0; i < table.header.size(); ++i) joined += (i ? "," : "") + table.header[i];
    if (joined != expected_header) return "header '" + joined + "' != '" + expected_header + "'";
    for (const auto& col : numeric_columns) {
        std::size_t idx = table.header.size();
        for (std::size_t i = 0; i < table.header.size(); ++i) {
            if (table.header[i] == col) idx = i;
        }
        if (idx == table.header.size()) return "missing column '" + col + "'";
        for (std::size_t r = 0; r < table.rows.size(); ++r) {
            const std::string& cell = table.rows[r][idx];
            if (cell == "nan") continue;
            double v = 0.0;
            const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
                return "row " + std::to_string(r + 1) + " column '" + col + "' is not numeric: '" + cell + "'";
        }
    }
    return {};
}

} // namespace csv

} // namespace optomech
