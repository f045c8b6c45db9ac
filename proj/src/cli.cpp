#include "qpw/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "qpw/borel.hpp"
#include "qpw/freq.hpp"

namespace qpw {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void require_keys(const json& obj, const std::string& where,
                  const std::vector<std::string>& allowed) {
    if (!obj.is_object())
        throw ConfigError("config: " + where + " must be an object");
    for (const auto& [key, value] : obj.items()) {
        bool ok = false;
        for (const std::string& a : allowed)
            if (key == a) ok = true;
        if (!ok)
            throw ConfigError("config: unknown key '" + key + "' in " +
                              where);
    }
}

template <typename T>
void read_into(const json& obj, const char* key, T& out) {
    if (obj.contains(key)) {
        try {
            out = obj.at(key).get<T>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("config: bad value for '") + key +
                              "': " + e.what());
        }
    }
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream os(p);
    if (!os) throw std::runtime_error("cannot write " + p.string());
    os << content;
}

fs::path prepare_outdir(const RunConfig& cfg) {
    fs::path dir(cfg.output_dir);
    fs::create_directories(dir);
    write_file(dir / "resolved_config.json", dump_config(cfg));
    return dir;
}

json config_to_json(const RunConfig& cfg) {
    json f = json::array();
    for (const auto& [mode, c] : cfg.f_modes)
        f.push_back({{"mode", mode}, {"re", c.real()}, {"im", c.imag()}});
    return json{
        {"problem",
         {{"d", cfg.d},
          {"g", cfg.g_coeffs},
          {"f", f},
          {"omega", cfg.omega},
          {"c0_guess", cfg.c0_guess}}},
        {"series",
         {{"K", cfg.K},
          {"trunc_policy",
           cfg.trunc.kind == TruncPolicy::Kind::exact ? "exact" : "tail_cut"},
          {"tail_eps_rel", cfg.trunc.tail_eps_rel}}},
        {"resum",
         {{"L", cfg.L},
          {"M", cfg.M},
          {"eps", cfg.resum_eps},
          {"t0", cfg.t0},
          {"t1", cfg.t1},
          {"dt", cfg.dt},
          {"quad_abs_tol", cfg.quad_abs_tol},
          {"quad_rel_tol", cfg.quad_rel_tol},
          {"pole_guard", cfg.pole_guard},
          {"remainder",
           {{"t", cfg.rem_t},
            {"N_min", cfg.rem_N_min},
            {"N_max", cfg.rem_N_max},
            {"eps_min", cfg.rem_eps_min},
            {"eps_max", cfg.rem_eps_max},
            {"eps_count", cfg.rem_eps_count}}}}},
        {"freq",
         {{"n_max", cfg.n_max},
          {"tau", cfg.tau},
          {"dioph_N", cfg.dioph_N},
          {"check_range", cfg.check_range}}},
        {"dynamics",
         {{"eps", cfg.dyn_eps},
          {"T", cfg.T},
          {"transient", cfg.transient},
          {"sample_dt", cfg.sample_dt},
          {"rtol", cfg.integ.rtol},
          {"atol", cfg.integ.atol},
          {"h_init", cfg.integ.h_init},
          {"h_min", cfg.integ.h_min},
          {"h_max", cfg.integ.h_max},
          {"probe",
           {{"radius", cfg.probe.radius},
            {"n_samples", cfg.probe.n_samples},
            {"seed", cfg.probe.seed},
            {"T_end", cfg.probe.T_end},
            {"converge_tol", cfg.probe.converge_tol}}}}},
        {"diagrams", {{"k_max", cfg.k_max}}},
        {"verify",
         {{"checks", cfg.verify.names},
          {"vertex_factor", cfg.verify.vertex_factor},
          {"heavy", cfg.verify.heavy}}},
        {"output_dir", cfg.output_dir}};
}

}  // namespace

std::string dump_config(const RunConfig& cfg) {
    return config_to_json(cfg).dump(2) + "\n";
}

RunConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    RunConfig cfg;
    require_keys(j, "top level",
                 {"problem", "series", "resum", "freq", "dynamics",
                  "diagrams", "verify", "output_dir"});
    if (j.contains("problem")) {
        const json& p = j["problem"];
        require_keys(p, "problem", {"d", "g", "f", "omega", "c0_guess"});
        read_into(p, "d", cfg.d);
        read_into(p, "g", cfg.g_coeffs);
        read_into(p, "omega", cfg.omega);
        read_into(p, "c0_guess", cfg.c0_guess);
        if (p.contains("f")) {
            cfg.f_modes.clear();
            if (!p["f"].is_array())
                throw ConfigError("config: problem.f must be an array");
            for (const json& e : p["f"]) {
                require_keys(e, "problem.f entry", {"mode", "re", "im"});
                Mode mode;
                double re = 0.0, im = 0.0;
                read_into(e, "mode", mode);
                read_into(e, "re", re);
                read_into(e, "im", im);
                if (mode.empty())
                    throw ConfigError("config: empty mode in problem.f");
                cfg.f_modes.push_back({mode, Complex(re, im)});
            }
        }
        if (cfg.d < 1) throw ConfigError("config: d >= 1 required");
        if (static_cast<int>(cfg.omega.size()) != cfg.d)
            throw ConfigError("config: omega length must equal d");
        for (const auto& [mode, c] : cfg.f_modes)
            if (static_cast<int>(mode.size()) != cfg.d)
                throw ConfigError("config: f mode dimension mismatch");
    }
    if (j.contains("series")) {
        const json& s = j["series"];
        require_keys(s, "series", {"K", "trunc_policy", "tail_eps_rel"});
        read_into(s, "K", cfg.K);
        std::string pol = "exact";
        read_into(s, "trunc_policy", pol);
        if (pol == "exact")
            cfg.trunc.kind = TruncPolicy::Kind::exact;
        else if (pol == "tail_cut")
            cfg.trunc.kind = TruncPolicy::Kind::tail_cut;
        else
            throw ConfigError("config: trunc_policy must be exact|tail_cut");
        read_into(s, "tail_eps_rel", cfg.trunc.tail_eps_rel);
        if (cfg.K < 0) throw ConfigError("config: K >= 0");
    }
    if (j.contains("resum")) {
        const json& r = j["resum"];
        require_keys(r, "resum",
                     {"L", "M", "eps", "t0", "t1", "dt", "quad_abs_tol",
                      "quad_rel_tol", "pole_guard", "remainder"});
        read_into(r, "L", cfg.L);
        read_into(r, "M", cfg.M);
        read_into(r, "eps", cfg.resum_eps);
        read_into(r, "t0", cfg.t0);
        read_into(r, "t1", cfg.t1);
        read_into(r, "dt", cfg.dt);
        read_into(r, "quad_abs_tol", cfg.quad_abs_tol);
        read_into(r, "quad_rel_tol", cfg.quad_rel_tol);
        read_into(r, "pole_guard", cfg.pole_guard);
        if (r.contains("remainder")) {
            const json& m = r["remainder"];
            require_keys(m, "resum.remainder",
                         {"t", "N_min", "N_max", "eps_min", "eps_max",
                          "eps_count"});
            read_into(m, "t", cfg.rem_t);
            read_into(m, "N_min", cfg.rem_N_min);
            read_into(m, "N_max", cfg.rem_N_max);
            read_into(m, "eps_min", cfg.rem_eps_min);
            read_into(m, "eps_max", cfg.rem_eps_max);
            read_into(m, "eps_count", cfg.rem_eps_count);
        }
    }
    if (j.contains("freq")) {
        const json& f = j["freq"];
        require_keys(f, "freq", {"n_max", "tau", "dioph_N", "check_range"});
        read_into(f, "n_max", cfg.n_max);
        read_into(f, "tau", cfg.tau);
        read_into(f, "dioph_N", cfg.dioph_N);
        read_into(f, "check_range", cfg.check_range);
    }
    if (j.contains("dynamics")) {
        const json& dyn = j["dynamics"];
        require_keys(dyn, "dynamics",
                     {"eps", "T", "transient", "sample_dt", "rtol", "atol",
                      "h_init", "h_min", "h_max", "probe"});
        read_into(dyn, "eps", cfg.dyn_eps);
        read_into(dyn, "T", cfg.T);
        read_into(dyn, "transient", cfg.transient);
        read_into(dyn, "sample_dt", cfg.sample_dt);
        read_into(dyn, "rtol", cfg.integ.rtol);
        read_into(dyn, "atol", cfg.integ.atol);
        read_into(dyn, "h_init", cfg.integ.h_init);
        read_into(dyn, "h_min", cfg.integ.h_min);
        read_into(dyn, "h_max", cfg.integ.h_max);
        if (dyn.contains("probe")) {
            const json& pr = dyn["probe"];
            require_keys(pr, "dynamics.probe",
                         {"radius", "n_samples", "seed", "T_end",
                          "converge_tol"});
            read_into(pr, "radius", cfg.probe.radius);
            read_into(pr, "n_samples", cfg.probe.n_samples);
            read_into(pr, "seed", cfg.probe.seed);
            read_into(pr, "T_end", cfg.probe.T_end);
            read_into(pr, "converge_tol", cfg.probe.converge_tol);
        }
        if (!(cfg.integ.rtol > 0.0) || !(cfg.integ.atol > 0.0))
            throw ConfigError("config: tolerances must be positive");
        if (!(cfg.integ.h_min < cfg.integ.h_init))
            throw ConfigError("config: h_min < h_init required");
    }
    if (j.contains("diagrams")) {
        const json& d = j["diagrams"];
        require_keys(d, "diagrams", {"k_max"});
        read_into(d, "k_max", cfg.k_max);
    }
    if (j.contains("verify")) {
        const json& v = j["verify"];
        require_keys(v, "verify", {"checks", "vertex_factor", "heavy"});
        read_into(v, "checks", cfg.verify.names);
        read_into(v, "vertex_factor", cfg.verify.vertex_factor);
        read_into(v, "heavy", cfg.verify.heavy);
    }
    read_into(j, "output_dir", cfg.output_dir);
    cfg.verify.tree_k_max = cfg.k_max;
    cfg.verify.seed = cfg.probe.seed;
    cfg.probe.integ = cfg.integ;
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(is)),
                     std::istreambuf_iterator<char>());
    return parse_config(text);
}

TrigSeries forcing_series(const RunConfig& cfg) {
    TrigSeries f(cfg.d);
    for (const auto& [mode, c] : cfg.f_modes) f.set(mode, f.at(mode) + c);
    if (f.reality_defect() > 1e-12)
        throw ConfigError("config: forcing coefficients are not a real series");
    return f;
}

FrequencyVector frequency(const RunConfig& cfg) {
    FrequencyOptions opts;
    opts.check_range = cfg.check_range;
    return FrequencyVector(cfg.omega, opts);
}

// ---------------------------------------------------------------------------

int cmd_series(const RunConfig& cfg) {
    fs::path dir = prepare_outdir(cfg);
    FrequencyVector omega = frequency(cfg);
    TrigSeries f = forcing_series(cfg);
    Nonlinearity g(cfg.g_coeffs);
    PerturbationSeries s =
        compute_series(g, f, omega, cfg.K, cfg.trunc, cfg.c0_guess);

    json orders = json::array();
    for (int k = 0; k <= s.max_order(); ++k) {
        json modes = json::array();
        for (const auto& [nu, c] : s.order(k).coeffs())
            modes.push_back({nu, c.real(), c.imag()});
        orders.push_back({{"k", k},
                          {"modes", modes},
                          {"dropped_mass", s.dropped_mass()[k]}});
    }
    json doc = {{"d", cfg.d},
                {"omega", cfg.omega},
                {"c0", s.equilibrium().c0},
                {"gprime_c0", s.equilibrium().gprime_c0},
                {"K", s.max_order()},
                {"orders", orders}};
    write_file(dir / "series.json", doc.dump(2) + "\n");

    std::string csv = "k,sup_coeff,slack,a1,eps2\n";
    if (cfg.K >= 4) {
        GrowthFit fit = growth_fit(s);
        for (size_t i = 0; i < fit.ks.size(); ++i) {
            csv += std::to_string(fit.ks[i]) + "," +
                   fmt(s.order(fit.ks[i]).max_abs()) + "," +
                   fmt(fit.slacks[i]) + "," + fmt(fit.A1) + "," +
                   fmt(fit.eps2) + "\n";
        }
    }
    write_file(dir / "growth.csv", csv);
    return 0;
}

int cmd_bryuno(const RunConfig& cfg) {
    fs::path dir = prepare_outdir(cfg);
    FrequencyVector omega = frequency(cfg);
    BrunoSummary bs = bryuno_sum(omega, cfg.n_max);
    json doc = {{"d", cfg.d},          {"omega", cfg.omega},
                {"n_max", bs.n_max},   {"alphas", bs.alphas},
                {"increments", bs.increments},
                {"partial_sums", bs.partial_sums},
                {"methods", bs.methods}};
    write_file(dir / "bryuno.json", doc.dump(2) + "\n");

    DiophantineWitness w = diophantine_fit(omega, cfg.tau, cfg.dioph_N);
    bool valid = check_witness(omega, w);
    json dio = {{"tau", w.tau},
                {"N_checked", w.N_checked},
                {"C0", w.C0},
                {"argmin", w.argmin},
                {"revalidated", valid}};
    write_file(dir / "diophantine.json", dio.dump(2) + "\n");
    return valid ? 0 : 4;
}

int cmd_resum(const RunConfig& cfg) {
    fs::path dir = prepare_outdir(cfg);
    FrequencyVector omega = frequency(cfg);
    TrigSeries f = forcing_series(cfg);
    Nonlinearity g(cfg.g_coeffs);
    PerturbationSeries s =
        compute_series(g, f, omega, cfg.K, cfg.trunc, cfg.c0_guess);

    LaplaceOptions lopts;
    lopts.abs_tol = cfg.quad_abs_tol;
    lopts.rel_tol = cfg.quad_rel_tol;
    lopts.pole_guard = cfg.pole_guard;
    std::vector<double> grid;
    for (double t = cfg.t0; t <= cfg.t1 + 1e-12; t += cfg.dt)
        grid.push_back(t);
    std::vector<ResumPoint> pts =
        resum_solution(s, cfg.resum_eps, grid, cfg.L, cfg.M, lopts);
    std::string csv = "t,truncated,resummed,quad_err,pole_warning\n";
    for (const ResumPoint& p : pts)
        csv += fmt(p.t) + "," + fmt(p.truncated) + "," + fmt(p.resummed) +
               "," + fmt(p.quad_err) + "," +
               (p.pole_warning ? "1" : "0") + "\n";
    write_file(dir / "resum.csv", csv);

    const auto reference = [&](double eps) {
        return resum_solution(s, eps, {cfg.rem_t}, cfg.L, cfg.M, lopts)[0]
            .resummed;
    };
    std::vector<int> Ns;
    for (int N = cfg.rem_N_min; N <= cfg.rem_N_max; ++N) Ns.push_back(N);
    std::vector<double> epss;
    for (int i = 0; i < cfg.rem_eps_count; ++i)
        epss.push_back(cfg.rem_eps_min *
                       std::pow(cfg.rem_eps_max / cfg.rem_eps_min,
                                i / std::max(1.0, cfg.rem_eps_count - 1.0)));
    RemainderScan scan = remainder_scan(s, reference, cfg.rem_t, Ns, epss);
    std::string rcsv = "N,eps,remainder,q_N\n";
    for (const RemainderRow& r : scan.rows)
        rcsv += std::to_string(r.N) + "," + fmt(r.eps) + "," +
                fmt(r.remainder) + "," + fmt(r.qN) + "\n";
    write_file(dir / "remainder.csv", rcsv);
    return 0;
}

int cmd_verify(const RunConfig& cfg) {
    fs::path dir = prepare_outdir(cfg);
    std::vector<CheckResult> results = run_verification(cfg.verify);
    bool all = true;
    json checks = json::array();
    for (const CheckResult& r : results) {
        all = all && r.pass;
        checks.push_back({{"name", r.name},
                          {"pass", r.pass},
                          {"metric", r.metric},
                          {"tol", r.tol},
                          {"detail", r.detail}});
        std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << " (metric "
                  << r.metric << ", tol " << r.tol << ")\n";
    }
    json doc = {{"checks", checks}, {"all_pass", all}};
    write_file(dir / "verify.json", doc.dump(2) + "\n");

    // probe + trajectory artifacts for the configured problem
    FrequencyVector omega = frequency(cfg);
    TrigSeries f = forcing_series(cfg);
    Nonlinearity g(cfg.g_coeffs);
    PerturbationSeries s =
        compute_series(g, f, omega, cfg.K, cfg.trunc, cfg.c0_guess);
    double x0 = evaluate(s, cfg.dyn_eps, 0.0);
    double v0 = evaluate_velocity(s, cfg.dyn_eps, 0.0);
    Trajectory traj = integrate(g, f, omega, cfg.dyn_eps, x0, v0, cfg.T,
                                cfg.integ, cfg.sample_dt);
    std::string tcsv = "t,x,v\n";
    for (const OdeState& st : traj.samples)
        tcsv += fmt(st.t) + "," + fmt(st.x) + "," + fmt(st.v) + "\n";
    write_file(dir / "trajectory.csv", tcsv);

    AttractorReport rep =
        attractivity_probe(g, f, omega, cfg.dyn_eps, x0, v0,
                           s.equilibrium().gprime_c0, cfg.probe);
    json samples = json::array();
    for (const ProbeSample& ps : rep.samples)
        samples.push_back({{"dx0", ps.dx0},
                           {"dv0", ps.dv0},
                           {"converged", ps.converged},
                           {"failed", ps.integration_failed},
                           {"tail_distance", ps.tail_distance},
                           {"decay_exponent", ps.decay_exponent}});
    json probe = {{"applicable", rep.applicable},
                  {"gprime_c0", rep.gprime_c0},
                  {"lambda_slow", rep.lambda_slow},
                  {"lambda_fast", rep.lambda_fast},
                  {"n_samples", rep.n_samples},
                  {"n_converged", rep.n_converged},
                  {"n_failed", rep.n_failed},
                  {"worst_tail_distance", rep.worst_tail_distance},
                  {"mean_decay_exponent", rep.mean_decay_exponent},
                  {"T_end", rep.T_end},
                  {"converge_tol", rep.converge_tol},
                  {"samples", samples}};
    write_file(dir / "probe.json", probe.dump(2) + "\n");
    return all ? 0 : 4;
}

int run_cli(const std::vector<std::string>& args) {
    // args: subcommand --config PATH [--out DIR] [--seed N]
    try {
        if (args.empty()) throw ConfigError("usage: qpw <command> --config PATH");
        std::string cmd = args[0];
        std::string config_path;
        std::string out_override;
        std::string seed_override;
        for (size_t i = 1; i < args.size(); ++i) {
            const std::string& a = args[i];
            const auto next = [&]() -> std::string {
                if (i + 1 >= args.size())
                    throw ConfigError("missing value for " + a);
                return args[++i];
            };
            if (a == "--config")
                config_path = next();
            else if (a == "--out")
                out_override = next();
            else if (a == "--seed")
                seed_override = next();
            else
                throw ConfigError("unknown flag " + a);
        }
        if (config_path.empty())
            throw ConfigError("--config PATH is required");
        RunConfig cfg = load_config(config_path);
        if (!out_override.empty()) cfg.output_dir = out_override;
        if (!seed_override.empty()) {
            cfg.probe.seed = std::stoull(seed_override);
            cfg.verify.seed = cfg.probe.seed;
        }
        if (const char* w = std::getenv("QPW_WORKERS")) {
            int n = std::atoi(w);
            if (n < 1)
                throw ConfigError("QPW_WORKERS must be a positive integer");
        }
        if (cmd == "series") return cmd_series(cfg);
        if (cmd == "bryuno") return cmd_bryuno(cfg);
        if (cmd == "resum") return cmd_resum(cfg);
        if (cmd == "verify") return cmd_verify(cfg);
        throw ConfigError("unknown command '" + cmd +
                          "' (series|bryuno|resum|verify)");
    } catch (const ConfigError& e) {
        std::cerr << json{{"error", "config"}, {"message", e.what()}}.dump()
                  << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << json{{"error", "config"}, {"message", e.what()}}.dump()
                  << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "numerical"}, {"message", e.what()}}.dump()
                  << "\n";
        return 3;
    }
}

}  // namespace qpw
