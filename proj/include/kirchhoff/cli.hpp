#pragma once

// Command-line front end: argument parsing, dispatch and output writing.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "kirchhoff.hpp"
#include "verify.hpp"

namespace kirchhoff::cli {

using json = nlohmann::ordered_json;

enum class Command { GroundState, Thresholds, Minimize, Sweep, Verify };

inline const char* to_string(Command c)
{
    switch (c) {
    case Command::GroundState: return "groundstate";
    case Command::Thresholds: return "thresholds";
    case Command::Minimize: return "minimize";
    case Command::Sweep: return "sweep";
    case Command::Verify: return "verify";
    }
    return "?";
}

struct RunConfig {
    Command command = Command::Verify;
    int N = 1;
    double p = 2, a = 1, b = 1, beta = 1, tol = 1e-4;
    bool critical = false;
    std::string potential = "zero";
    std::string grid = "4096,40";
    std::string out, field, json_out, config;
    std::vector<std::string> sets;      // key=value overrides of the config file
    FlowConfig flow;
    bool quick = false;
    unsigned long seed = 20240611;
    std::vector<int> only;
    json echo;                          // the flags as given, for the metadata block
};

inline Potential parse_potential(const std::string& s)
{
    std::vector<std::string> parts;
    std::stringstream ss(s);
    for (std::string t; std::getline(ss, t, ':');)
        parts.push_back(t);
    auto num = [&](std::size_t i) {
        try {
            std::size_t n = 0;
            const double d = std::stod(parts.at(i), &n);
            if (n != parts[i].size())
                throw std::invalid_argument(s);
            return d;
        } catch (const std::exception&) {
            throw UsageError("--potential: bad number in '" + s + "'");
        }
    };
    if (parts.size() == 1 && parts[0] == "zero")
        return Potential::zero();
    if (!parts.empty() && parts[0] == "harmonic" && (parts.size() == 2 || parts.size() == 3)) {
        const double k = num(1);
        if (!(k > 0))
            throw UsageError("--potential: harmonic strength must be positive");
        return Potential::harmonic(k, parts.size() == 3 ? num(2) : 0.0);
    }
    if (parts.size() == 2 && parts[0] == "power") {
        const double e = num(1);
        if (!(e > 0))
            throw UsageError("--potential: power exponent must be positive");
        return Potential::power(e);
    }
    throw UsageError("--potential must be zero, harmonic:k[:c] or power:s, got '" + s + "'");
}

// "M,R" on a line grid for N = 1, a radial grid otherwise.
inline GridSpec parse_grid(const std::string& s, int N)
{
    const auto comma = s.find(',');
    if (comma == std::string::npos)
        throw UsageError("--grid expects M,R, got '" + s + "'");
    GridSpec g;
    g.N = N;
    g.kind = N == 1 ? GridKind::FullLine1D : GridKind::RadialHalfLine;
    try {
        std::size_t n1 = 0, n2 = 0;
        const std::string ms = s.substr(0, comma), rs = s.substr(comma + 1);
        const long M = std::stol(ms, &n1);
        g.R = std::stod(rs, &n2);
        if (n1 != ms.size() || n2 != rs.size() || M < 3)
            throw std::invalid_argument(s);
        g.M = std::size_t(M);
    } catch (const std::exception&) {
        throw UsageError("--grid expects M,R with M >= 3, got '" + s + "'");
    }
    if (!(g.R > 0))
        throw UsageError("--grid: R must be positive");
    return g;
}

inline json grid_json(const GridSpec& g)
{
    return json{{"N", g.N}, {"kind", to_string(g.kind)}, {"R", g.R}, {"M", g.M}};
}

inline json metadata(const RunConfig& rc, const json& grid)
{
    return json{{"version", version}, {"command", to_string(rc.command)}, {"config", rc.echo}, {"grid", grid}};
}

// Writes to a sibling temporary, then renames over the target.
inline void write_atomic(const std::string& path, const std::function<void(std::ostream&)>& body)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw UsageError("cannot write output file '" + path + "'");
        body(f);
        f.flush();
        if (!f)
            throw Error("write failed for '" + path + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec)
        throw Error("cannot move output into place at '" + path + "': " + ec.message());
}

inline void write_json(const std::string& path, const json& j)
{
    write_atomic(path, [&](std::ostream& os) { os << j.dump(2) << "\n"; });
}

inline void write_field(const std::string& path, const Field& u, const json& meta)
{
    write_atomic(path, [&](std::ostream& os) { write_csv(os, u); });
    write_json(path + ".meta.json", meta);
}

inline std::string csv_number(double x)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline void setup_logging()
{
    auto lg = spdlog::get("kirchhoff");
    if (!lg) {
        lg = std::make_shared<spdlog::logger>("kirchhoff", std::make_shared<spdlog::sinks::stderr_sink_mt>());
        spdlog::register_logger(lg);
    }
    lg->set_pattern("[%l] %v");
    const char* env = std::getenv("KIRCHHOFF_LOG");
    const std::string lvl = env ? env : "error";
    if (lvl == "error")
        lg->set_level(spdlog::level::err);
    else if (lvl == "info")
        lg->set_level(spdlog::level::info);
    else if (lvl == "debug")
        lg->set_level(spdlog::level::debug);
    else
        throw UsageError("KIRCHHOFF_LOG must be error, info or debug, got '" + lvl + "'");
}

inline std::shared_ptr<spdlog::logger> log() { return spdlog::get("kirchhoff"); }

// ---- sweep configuration ----

inline SweepSpec sweep_spec_from(const KeyValues& kv)
{
    SweepSpec sp;
    sp.N = int(kv.integer("dim", 1));
    sp.a = kv.num("a", 1);
    sp.b = kv.num("b", 1);
    if (kv.has("beta") && kv.has("beta_factor"))
        throw ConfigError("give either beta or beta_factor, not both");
    if (kv.has("beta_factor")) {
        if (sp.N < 1 || sp.N > 3)
            throw ConfigError("sweeps need dim in 1..3");
        const double f = kv.num("beta_factor", 1);
        sp.beta = f * beta_p(sp.b, shoot_ground_state(sp.N, 8.0 / sp.N, 1e-4));
    } else {
        sp.beta = kv.num("beta", 1);
    }
    try {
        sp.V = parse_potential(kv.str("potential", "zero"));
    } catch (const UsageError& e) {
        throw ConfigError(e.what());
    }
    sp.deltas = kv.list("deltas", sp.deltas);
    const auto grid = kv.list("grid", {double(sp.grid.M), sp.grid.R});
    if (grid.size() != 2 || grid[0] < 3 || grid[0] != double(long(grid[0])))
        throw ConfigError("grid must be M,R");
    sp.grid = {sp.N, sp.N == 1 ? GridKind::FullLine1D : GridKind::RadialHalfLine, grid[1], std::size_t(grid[0])};
    sp.rescaled = kv.flag("rescaled", sp.rescaled);
    sp.w_extent = kv.num("w_extent", sp.w_extent);
    sp.w_nodes = std::size_t(kv.integer("w_nodes", long(sp.w_nodes)));
    sp.with_free = kv.flag("with_free", sp.with_free);
    sp.richardson = kv.flag("richardson", sp.richardson);
    sp.flow.dt = kv.num("dt", sp.flow.dt);
    sp.flow.max_iters = int(kv.integer("max_iters", sp.flow.max_iters));
    sp.flow.multistart = int(kv.integer("multistart", sp.flow.multistart));
    sp.flow.energy_tol = kv.num("energy_tol", sp.flow.energy_tol);
    sp.flow.grad_tol = kv.num("grad_tol", sp.flow.grad_tol);
    if (auto u = kv.unused(); !u.empty())
        throw ConfigError("unknown config key '" + u.front() + "'");
    sp.validate();
    return sp;
}

inline const std::vector<std::string>& sweep_columns()
{
    static const std::vector<std::string> cols{"p", "delta", "d_measured", "d_asym", "ratio_d", "r_p", "eps_p", "T",
                                               "T_sq_over_rp", "interaction_scaled_over_rp", "lambda_eps4", "V_term",
                                               "profile_dist", "center_x"};
    return cols;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRecord>& rs)
{
    const auto& cols = sweep_columns();
    for (std::size_t i = 0; i < cols.size(); ++i)
        os << (i ? "," : "") << cols[i];
    os << "\n";
    for (const auto& r : rs) {
        const double v[] = {r.p, r.delta, r.d_measured, r.d_asym, r.ratio_d, r.r_p, r.eps_p, r.T,
                            r.T_sq_over_rp, r.interaction_scaled_over_rp, r.lambda_eps4, r.V_term,
                            r.profile_dist, r.center_x};
        for (std::size_t i = 0; i < std::size(v); ++i)
            os << (i ? "," : "") << csv_number(v[i]);
        os << "\n";
    }
}

// ---- parsing ----

// Returns nullopt after printing help.
inline std::optional<RunConfig> parse_args(int argc, const char* const* argv, std::ostream& out)
{
    CLI::App app{"Kirchhoff constrained-minimization laboratory", "kirchhoff"};
    app.require_subcommand(1);
    RunConfig rc;

    auto* gs = app.add_subcommand("groundstate", "shoot the ground state and report its integrals");
    gs->add_option("--dim", rc.N, "dimension N")->required();
    gs->add_option("--p", rc.p, "exponent p")->required();
    gs->add_option("--tol", rc.tol, "Pohozaev residual tolerance");
    gs->add_option("--out", rc.out, "profile CSV");
    gs->add_option("--json", rc.json_out, "also write the summary here");

    auto* th = app.add_subcommand("thresholds", "existence thresholds as JSON");
    th->add_option("--dim", rc.N)->required();
    th->add_option("--p", rc.p)->required();
    th->add_option("--a", rc.a);
    th->add_option("--b", rc.b);
    th->add_flag("--critical", rc.critical, "include the critical-exponent threshold");
    th->add_option("--json", rc.json_out);

    auto* mn = app.add_subcommand("minimize", "constrained minimization by normalized gradient flow");
    mn->add_option("--dim", rc.N)->required();
    mn->add_option("--p", rc.p)->required();
    mn->add_option("--a", rc.a);
    mn->add_option("--b", rc.b);
    mn->add_option("--beta", rc.beta)->required();
    mn->add_option("--potential", rc.potential, "zero | harmonic:k[:c] | power:s");
    mn->add_option("--grid", rc.grid, "M,R");
    mn->add_option("--out", rc.out, "result JSON")->required();
    mn->add_option("--field", rc.field, "minimizer CSV");
    mn->add_option("--dt", rc.flow.dt);
    mn->add_option("--max-iters", rc.flow.max_iters);
    mn->add_option("--multistart", rc.flow.multistart);
    mn->add_option("--energy-tol", rc.flow.energy_tol);
    mn->add_option("--grad-tol", rc.flow.grad_tol);

    auto* sw = app.add_subcommand("sweep", "blow-up sweep p -> 8/N");
    sw->add_option("--config", rc.config, "key=value file")->required();
    sw->add_option("--out", rc.out, "records CSV")->required();
    sw->add_option("--set", rc.sets, "override a config key (key=value)");

    auto* vf = app.add_subcommand("verify", "run the acceptance battery");
    vf->add_flag("--quick", rc.quick, "one-dimensional closed-form subset");
    vf->add_option("--seed", rc.seed, "seed for random test fields");
    vf->add_option("--only", rc.only, "criterion ids to run");

    std::vector<std::string> args;
    for (int i = argc - 1; i > 0; --i)
        args.emplace_back(argv[i]);
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return std::nullopt;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return std::nullopt;
    } catch (const CLI::ParseError& e) {
        throw UsageError(e.what());
    }

    CLI::App* sub = app.get_subcommands().front();
    if (sub == gs)
        rc.command = Command::GroundState;
    else if (sub == th)
        rc.command = Command::Thresholds;
    else if (sub == mn)
        rc.command = Command::Minimize;
    else if (sub == sw)
        rc.command = Command::Sweep;
    else
        rc.command = Command::Verify;

    rc.echo = json::object();
    for (const CLI::Option* o : sub->get_options()) {
        if (o->get_name() == "--help" || o->count() == 0)
            continue;
        const auto res = o->results();
        if (o->get_expected_max() == 0)
            rc.echo[o->get_name()] = true;
        else if (res.size() == 1)
            rc.echo[o->get_name()] = res.front();
        else
            rc.echo[o->get_name()] = res;
    }

    // preconditions, checked before any work starts
    switch (rc.command) {
    case Command::GroundState:
        check_exponent(rc.N, rc.p);
        if (!(rc.tol > 0))
            throw UsageError("--tol must be positive");
        break;
    case Command::Thresholds:
        if (rc.N < 1 || rc.N > 4)
            throw UsageError("--dim must be in 1..4");
        if (rc.p > 8.0 / rc.N + exponent_tol)
            throw UsageError("--p exceeds 8/N");
        if (!(rc.N == 4 && near(rc.p, 2.0)))
            check_exponent(rc.N, rc.p);
        if (!(rc.a > 0) || !(rc.b > 0))
            throw UsageError("--a and --b must be positive");
        break;
    case Command::Minimize: {
        ModelParams m{rc.a, rc.b, rc.beta, rc.p, rc.N};
        m.validate();
        rc.flow.validate();
        parse_potential(rc.potential);
        parse_grid(rc.grid, rc.N);
        break;
    }
    case Command::Sweep:
        for (const auto& s : rc.sets)
            if (s.find('=') == std::string::npos)
                throw UsageError("--set expects key=value, got '" + s + "'");
        break;
    case Command::Verify:
        for (int id : rc.only)
            if (id < 1 || id > 11)
                throw UsageError("--only takes criterion ids 1..11");
        break;
    }
    return rc;
}

// ---- commands ----

inline json ground_state_summary(const GroundStateProfile& g)
{
    return json{{"N", g.N},
                {"p", g.p},
                {"l2_norm_sq", g.l2_norm_sq},
                {"dirichlet", g.dirichlet},
                {"lp2_norm", g.lp2_norm},
                {"shoot_height", g.shoot_height},
                {"residuals", {{"pohozaev_1", g.pohozaev_res1}, {"pohozaev_2", g.pohozaev_res2}}}};
}

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json threshold_json(const ThresholdReport& r)
{
    return json{{"N", r.N},
                {"p", r.p},
                {"a", r.a},
                {"b", r.b},
                {"l2_norm_sq", r.l2_norm_sq},
                {"beta_tilde", opt_json(r.beta_tilde)},
                {"beta_p", opt_json(r.beta_p)},
                {"beta_star_critical", opt_json(r.beta_star_critical)},
                {"sobolev_S", opt_json(r.sobolev_S)}};
}

inline int run_groundstate(const RunConfig& rc, std::ostream& out)
{
    log()->info("shooting ground state N={} p={}", rc.N, rc.p);
    auto g = shoot_ground_state(rc.N, rc.p, rc.tol);
    json j = ground_state_summary(g);
    j["metadata"] = metadata(rc, grid_json(g.profile.grid->spec()));
    if (!rc.out.empty())
        write_field(rc.out, g.profile, j["metadata"]);
    if (!rc.json_out.empty())
        write_json(rc.json_out, j);
    out << j.dump(2) << "\n";
    return 0;
}

inline int run_thresholds(const RunConfig& rc, std::ostream& out)
{
    auto r = threshold_report(rc.N, rc.p, rc.a, rc.b, rc.critical);
    json j = threshold_json(r);
    j["metadata"] = metadata(rc, nullptr);
    if (!rc.json_out.empty())
        write_json(rc.json_out, j);
    out << j.dump(2) << "\n";
    return 0;
}

inline int run_minimize(const RunConfig& rc, std::ostream& out)
{
    ModelParams m{rc.a, rc.b, rc.beta, rc.p, rc.N};
    const Potential V = parse_potential(rc.potential);
    const GridSpec gspec = parse_grid(rc.grid, rc.N);
    auto g = build_grid(gspec);
    V.on(*g);

    const bool sobolev_critical = rc.N == 4 && near(rc.p, 2.0);
    std::optional<GroundStateProfile> gs;
    if (!sobolev_critical)
        gs = shoot_ground_state(rc.N, rc.p, 1e-4);
    const auto rep = threshold_report(rc.N, rc.p, rc.a, rc.b, true);
    json verdict;
    try {
        const auto v = classify_existence(rc.N, rc.p, rc.beta, rc.a, rc.b, !V.is_zero(), rep);
        verdict = json{{"regime", to_string(v.regime)}, {"reason", v.reason}};
    } catch (const UsageError& e) {
        verdict = json{{"regime", nullptr}, {"reason", e.what()}};
    }

    FlowConfig cfg = rc.flow;
    cfg.divergence_T_max = default_divergence_cap(m, *g, rep.beta_p);
    log()->info("minimizing on {} nodes, {} starts", gspec.M, cfg.multistart);
    auto r = multistart_minimize(m, V, g, cfg, gs ? &*gs : nullptr);

    const auto& e = r.energy;
    json j{{"status", to_string(r.status)},
           {"energy", e.total},
           {"energy_terms",
            {{"kinetic", e.kinetic}, {"kirchhoff", e.kirchhoff}, {"potential", e.potential}, {"interaction", e.interaction}}},
           {"T", e.T},
           {"lp2", e.lp2},
           {"V_term", e.V_term},
           {"lambda", r.lambda},
           {"grad_residual", r.grad_residual},
           {"iterations", r.iterations},
           {"start_index", r.start_index},
           {"max_mass_defect", r.max_mass_defect},
           {"max_energy_rise", r.max_energy_rise},
           {"min_value", r.min_value},
           {"rms_radius", rms_radius(r.u_final)},
           {"thresholds", threshold_json(rep)},
           {"existence", verdict},
           {"potential", V.describe()}};
    j["metadata"] = metadata(rc, grid_json(gspec));
    write_json(rc.out, j);
    if (!rc.field.empty())
        write_field(rc.field, r.u_final, j["metadata"]);
    out << to_string(r.status) << " energy=" << csv_number(e.total) << "\n";
    return 0;
}

inline int run_sweep_cmd(const RunConfig& rc, std::ostream& out)
{
    KeyValues kv = KeyValues::load(rc.config);
    for (const auto& s : rc.sets) {
        const auto eq = s.find('=');
        kv.set(s.substr(0, eq), s.substr(eq + 1));
    }
    const SweepSpec sp = sweep_spec_from(kv);
    log()->info("sweep over {} points", sp.deltas.size());
    auto rs = run_sweep(sp);

    json echo = rc.echo;
    echo["file"] = json::object();
    for (const auto& [k, v] : kv.entries())
        echo["file"][k] = v;
    RunConfig rc2 = rc;
    rc2.echo = echo;
    json meta = metadata(rc2, grid_json(sp.grid));
    meta["beta"] = sp.beta;
    meta["statuses"] = json::array();
    for (const auto& r : rs)
        meta["statuses"].push_back(to_string(r.status));
    write_atomic(rc.out, [&](std::ostream& os) { write_sweep_csv(os, rs); });
    write_json(rc.out + ".meta.json", meta);
    out << "wrote " << rs.size() << " records to " << rc.out << "\n";
    return 0;
}

inline int run_verify(const RunConfig& rc, std::ostream& out)
{
    verify::Options o;
    o.quick = rc.quick;
    o.seed = rc.seed;
    bool all = true;
    for (const auto& e : verify::battery(o)) {
        if (!rc.only.empty() && std::find(rc.only.begin(), rc.only.end(), e.id) == rc.only.end())
            continue;
        const auto c = verify::run_check(e);
        all = all && c.pass;
        out << verify::format_line(c) << std::endl;
    }
    out << (all ? "all checks passed" : "some checks FAILED") << "\n";
    return all ? 0 : 1;
}

inline int run(const RunConfig& rc, std::ostream& out)
{
    switch (rc.command) {
    case Command::GroundState: return run_groundstate(rc, out);
    case Command::Thresholds: return run_thresholds(rc, out);
    case Command::Minimize: return run_minimize(rc, out);
    case Command::Sweep: return run_sweep_cmd(rc, out);
    case Command::Verify: return run_verify(rc, out);
    }
    return 2;
}

// Exit codes: 0 success, 1 numerical failure, 2 usage error.
inline int main(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    try {
        setup_logging();
        auto rc = parse_args(argc, argv, out);
        if (!rc)
            return 0;
        return run(*rc, out);
    } catch (const Error& e) {
        err << "kirchhoff: " << (e.usage() ? "usage error: " : "error: ") << e.what() << "\n";
        return e.usage() ? 2 : 1;
    } catch (const std::exception& e) {
        err << "kirchhoff: error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace kirchhoff::cli
