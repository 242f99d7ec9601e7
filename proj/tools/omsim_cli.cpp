// omsim command-line interface: run cooling / entanglement / scheme
// trajectories, steady-state sweeps, pump optimization, and the oracle
// cross-checks from flat JSON config files; emit CSV + JSON results.
//
// Exit codes: 0 success, 2 config error, 3 validation/domain error,
// 4 integration failure, 5 infeasible optimization, 6 horizon too short,
// 1 anything else.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "omsim/blue.hpp"
#include "omsim/core.hpp"
#include "omsim/oracle.hpp"
#include "omsim/red.hpp"
#include "omsim/scheme.hpp"

using json = nlohmann::ordered_json;
using namespace omsim;

namespace {

struct Cli {
    std::string config_path;
    std::string out_path;
    std::vector<std::string> overrides;
    bool strict = false;
};

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json load_config(const Cli& cli) {
    json cfg = json::object();
    if (!cli.config_path.empty()) {
        std::ifstream in(cli.config_path);
        if (!in) throw ValidationError("cannot open config file: " + cli.config_path);
        try {
            in >> cfg;
        } catch (const std::exception& e) {
            throw ValidationError(std::string("config parse error: ") + e.what());
        }
        if (!cfg.is_object()) throw ValidationError("config must be a JSON object");
    }
    for (const auto& kv : cli.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ValidationError("--set expects key=value, got: " + kv);
        const std::string key = kv.substr(0, eq);
        const std::string val = kv.substr(eq + 1);
        try {
            cfg[key] = json::parse(val);
        } catch (...) {
            cfg[key] = val;  // bare strings are allowed unquoted
        }
    }
    return cfg;
}

class ConfigReader {
  public:
    ConfigReader(const json& cfg, bool strict) : cfg_(cfg), strict_(strict) {}

    double number(const std::string& key, double dflt) {
        mark(key);
        if (!cfg_.contains(key)) return dflt;
        if (!cfg_[key].is_number())
            throw ValidationError("config key '" + key + "' must be a number");
        return cfg_[key].get<double>();
    }
    std::optional<double> maybe_number(const std::string& key) {
        mark(key);
        if (!cfg_.contains(key)) return std::nullopt;
        if (!cfg_[key].is_number())
            throw ValidationError("config key '" + key + "' must be a number");
        return cfg_[key].get<double>();
    }
    bool boolean(const std::string& key, bool dflt) {
        mark(key);
        if (!cfg_.contains(key)) return dflt;
        if (!cfg_[key].is_boolean())
            throw ValidationError("config key '" + key + "' must be a boolean");
        return cfg_[key].get<bool>();
    }
    std::string text(const std::string& key, const std::string& dflt) {
        mark(key);
        if (!cfg_.contains(key)) return dflt;
        if (!cfg_[key].is_string())
            throw ValidationError("config key '" + key + "' must be a string");
        return cfg_[key].get<std::string>();
    }
    std::vector<double> numbers(const std::string& key, std::vector<double> dflt) {
        mark(key);
        if (!cfg_.contains(key)) return dflt;
        if (!cfg_[key].is_array())
            throw ValidationError("config key '" + key + "' must be an array");
        return cfg_[key].get<std::vector<double>>();
    }
    std::vector<std::pair<double, double>> pairs(const std::string& key) {
        mark(key);
        std::vector<std::pair<double, double>> out;
        if (!cfg_.contains(key)) return out;
        for (const auto& e : cfg_[key]) {
            if (!e.is_array() || e.size() != 2)
                throw ValidationError("config key '" + key + "' must hold [t, g] pairs");
            out.emplace_back(e[0].get<double>(), e[1].get<double>());
        }
        return out;
    }

    void finish() const {
        for (auto it = cfg_.begin(); it != cfg_.end(); ++it) {
            if (seen_.count(it.key())) continue;
            if (strict_)
                throw ValidationError("unknown config key: " + it.key());
            std::cerr << "warning: ignoring unknown config key: " << it.key() << "\n";
        }
    }

  private:
    void mark(const std::string& key) { seen_.insert(key); }
    const json& cfg_;
    bool strict_;
    std::set<std::string> seen_;
};

struct CommonParams {
    double zeta;
    double n_c_b;
    double n_m_b;
    IntegratorConfig ode;
    double t_max;
    std::size_t samples;
};

CommonParams read_common(ConfigReader& r, double default_t_max = 10.0) {
    CommonParams c;
    const auto zeta = r.maybe_number("zeta");
    const auto kappa = r.maybe_number("kappa");
    const auto gamma_m = r.maybe_number("gamma_m");
    if (zeta) {
        c.zeta = *zeta;  // direct value wins over (kappa, gamma_m)
    } else if (kappa && gamma_m) {
        SystemParams p;
        p.kappa = *kappa;
        p.gamma_m = *gamma_m;
        p.validate();
        c.zeta = p.zeta();
    } else {
        throw ValidationError("config must provide zeta or both kappa and gamma_m");
    }
    if (!(c.zeta > -1.0 && c.zeta <= 1.0))
        throw ValidationError("zeta must lie in (-1, 1]");

    const auto ncb = r.maybe_number("n_c_bath");
    const auto nmb = r.maybe_number("n_m_bath");
    const auto T = r.maybe_number("bath_temperature_K");
    const auto om = r.maybe_number("omega_m");
    const auto oc = r.maybe_number("omega_c");
    // Direct occupations win over (omega, T) conversion.
    if (nmb)
        c.n_m_b = *nmb;
    else if (T && om)
        c.n_m_b = occupation_from_temperature(*om, *T);
    else
        throw ValidationError("config must provide n_m_bath or omega_m + bath_temperature_K");
    if (ncb)
        c.n_c_b = *ncb;
    else if (T && oc)
        c.n_c_b = occupation_from_temperature(*oc, *T);
    else
        c.n_c_b = 0.0;

    c.ode.rel_tol = r.number("rel_tol", 1e-9);
    c.ode.abs_tol = r.number("abs_tol", 1e-12);
    c.ode.h_init = r.number("h_init", 1e-4);
    c.ode.h_min = r.number("h_min", 1e-12);
    c.ode.h_max = r.number("h_max", 0.1);
    c.ode.max_steps = static_cast<std::size_t>(r.number("max_steps", 1e7));
    c.t_max = r.number("t_max", default_t_max);
    c.samples = static_cast<std::size_t>(r.number("samples", 2001));
    if (c.samples < 2) throw ValidationError("samples must be >= 2");
    return c;
}

PumpProfile read_profile(ConfigReader& r, Sideband sb, const char* g_key) {
    PumpProfile p;
    p.sideband = sb;
    p.detuning_over_gamma_plus = r.number("detuning_over_gamma_plus", 0.0);
    p.phi_L = r.number("phi_L", 0.0);
    const auto segs = r.pairs("segments");
    if (!segs.empty()) {
        for (const auto& [t, g] : segs) p.segments.push_back({t, g});
    } else {
        p.segments = {{0.0, r.number(g_key, 0.0)}};
    }
    p.validate();
    return p;
}

// CSV sink: --out file, or stdout when no path was given (summary then goes
// to stderr so the two streams stay separable).
struct CsvOut {
    explicit CsvOut(const std::string& path) {
        if (!path.empty()) {
            file.open(path, std::ios::binary);
            if (!file) throw ValidationError("cannot open output file: " + path);
        }
    }
    std::ostream& stream() { return file.is_open() ? file : std::cout; }
    bool to_stdout() const { return !file.is_open(); }
    std::ofstream file;
};

void print_summary(const json& summary, bool csv_went_to_stdout) {
    (csv_went_to_stdout ? std::cerr : std::cout) << summary.dump(2) << "\n";
}

// ---------------------------------------------------------------------------

int cmd_cool(ConfigReader& r, const Cli& cli) {
    const CommonParams c = read_common(r);
    const PumpProfile prof = read_profile(r, Sideband::Red, "g_r");
    r.finish();

    BtsState init{0.0, 0.0, c.n_c_b, c.n_m_b};  // thermal equilibrium launch
    const auto grid = uniform_grid(0.0, c.t_max, c.samples);
    const BtsRunResult run = integrate_bts(c.zeta, prof, c.n_c_b, c.n_m_b, init, 0.0,
                                           c.t_max, c.ode, grid);

    CsvOut out(cli.out_path);
    auto& os = out.stream();
    os << "t_tilde,theta,phi_B,n_c_th,n_m_th,n_c,n_m,delta12sq\n";
    for (std::size_t i = 0; i < run.trajectory.size(); ++i) {
        const auto& s = run.trajectory.states[i];
        const auto& o = run.trajectory.observables[i];
        os << fmt17(run.trajectory.times[i]) << ',' << fmt17(s.theta) << ','
           << fmt17(s.phi_B) << ',' << fmt17(s.n_c_th) << ',' << fmt17(s.n_m_th) << ','
           << fmt17(o.n_c) << ',' << fmt17(o.n_m) << ',' << fmt17(o.delta12sq) << '\n';
    }

    json summary;
    summary["command"] = "cool";
    const double g_final = prof.g_at(c.t_max);
    if (prof.detuning_over_gamma_plus == 0.0) {
        const BtsSteadyState ss = bts_steady_state(g_final, c.zeta, c.n_c_b, c.n_m_b);
        const BtsState& fin = run.final_state;
        const double dev = std::max(
            {std::abs(principal_mixing_angle(fin.theta) - ss.theta) /
                 std::max(std::abs(ss.theta), 1e-12),
             std::abs(fin.n_c_th - ss.n_c_th) / std::max(ss.n_c_th, 1e-12),
             std::abs(fin.n_m_th - ss.n_m_th) / std::max(ss.n_m_th, 1e-12)});
        summary["steady_state"] = {{"theta", ss.theta},
                                   {"n_c_th", ss.n_c_th},
                                   {"n_m_th", ss.n_m_th}};
        summary["final_rel_deviation_from_steady"] = dev;
    }
    summary["final"] = {{"theta", run.final_state.theta},
                        {"phi_B", run.final_state.phi_B},
                        {"n_c_th", run.final_state.n_c_th},
                        {"n_m_th", run.final_state.n_m_th}};
    json bridges = json::array();
    for (const auto& [a, b] : run.bridge_intervals) bridges.push_back({a, b});
    summary["moment_bridge_intervals"] = bridges;
    print_summary(summary, out.to_stdout());
    return 0;
}

int cmd_entangle(ConfigReader& r, const Cli& cli) {
    const CommonParams c = read_common(r);
    const bool cooled = r.boolean("cooled_start", true);
    const double g_r = r.number("g_r", 0.0);
    const PumpProfile prof = read_profile(r, Sideband::Blue, "g_b");
    r.finish();

    TmstsState init;
    if (cooled) {
        init = cooled_initial_state(c.zeta, c.n_m_b, c.n_c_b, g_r);
    } else {
        init = TmstsState{0.0, -0.5 * std::numbers::pi, c.n_c_b, c.n_m_b};
    }
    const auto grid = uniform_grid(0.0, c.t_max, c.samples);
    std::vector<Event> events{make_delta12_event("entangled", 1.0, EventDirection::Both)};
    const BlueRunResult run = integrate_tmsts(c.zeta, prof, c.n_c_b, c.n_m_b, init, 0.0,
                                              c.t_max, c.ode, grid, events);

    CsvOut out(cli.out_path);
    auto& os = out.stream();
    os << "t_tilde,u,n_c_th,n_m_th,delta12sq\n";
    for (std::size_t i = 0; i < run.trajectory.size(); ++i) {
        const auto& s = run.trajectory.states[i];
        const auto& o = run.trajectory.observables[i];
        os << fmt17(run.trajectory.times[i]) << ',' << fmt17(s.u) << ','
           << fmt17(s.n_c_th) << ',' << fmt17(s.n_m_th) << ',' << fmt17(o.delta12sq)
           << '\n';
    }

    json summary;
    summary["command"] = "entangle";
    double dmin = run.trajectory.observables[0].delta12sq, tmin = 0.0;
    for (std::size_t i = 0; i < run.trajectory.size(); ++i)
        if (run.trajectory.observables[i].delta12sq < dmin) {
            dmin = run.trajectory.observables[i].delta12sq;
            tmin = run.trajectory.times[i];
        }
    summary["delta12_min"] = dmin;
    summary["t_at_min"] = tmin;
    std::vector<double> cs;
    for (const auto& x : run.crossings)
        if (x.name == "entangled") cs.push_back(x.t_tilde);
    std::sort(cs.begin(), cs.end());
    if (cs.size() >= 2) {
        summary["window"] = {{"t_enter", cs[0]}, {"t_exit", cs[1]}, {"tau", cs[1] - cs[0]}};
    } else {
        summary["window"] = nullptr;
    }
    const double gth = blue_threshold(c.zeta);
    const double g0 = prof.g_at(c.t_max);
    summary["g_threshold"] = gth;
    if (g0 < gth) {
        const auto ss = tmsts_steady_state(g0, c.zeta, 0.5 * (c.n_m_b + c.n_c_b),
                                           c.n_m_b - c.n_c_b);
        summary["steady_state"] = {{"u", ss.u},
                                   {"n_bar_th", ss.n_bar_th},
                                   {"delta_n_th", ss.delta_n_th},
                                   {"delta12sq", ss.delta12sq}};
    }
    print_summary(summary, out.to_stdout());
    return 0;
}

int cmd_scheme(ConfigReader& r, const Cli& cli) {
    const CommonParams c = read_common(r, 20.0);
    SchemeConfig sc;
    sc.zeta = c.zeta;
    sc.n_m_b = c.n_m_b;
    sc.n_c_b = c.n_c_b;
    sc.ode = c.ode;
    sc.horizon = r.number("horizon", c.t_max);
    sc.samples = c.samples;
    sc.g_r = r.number("g_r", 0.0);
    sc.g_b = r.number("g_b", 0.0);
    sc.target_variance = r.number("target_variance", 1.0);
    sc.g_cap = r.number("g_cap", 1e3);
    sc.explicit_relax = r.boolean("explicit_relax", false);
    sc.relax_time = r.number("relax_time", 2.0);
    r.finish();

    const SchemeRun run = run_scheme(sc);
    json summary;
    summary["command"] = "scheme";
    summary["delta12_min"] = run.result.delta12_min;
    summary["t_at_min"] = run.result.t_at_min;
    summary["ever_entangled"] = run.result.ever_entangled;
    summary["tau_entangled"] = run.result.tau_entangled;
    summary["t_enter_entangled"] = run.result.t_enter_entangled;
    summary["t_exit_entangled"] = run.result.t_exit_entangled;
    summary["reached_target"] = run.result.reached_target;
    summary["tau_below_target"] = run.result.tau_below_target;
    summary["t_enter_target"] = run.result.t_enter_target;
    summary["t_exit_target"] = run.result.t_exit_target;
    summary["runaway_truncated"] = run.result.runaway_truncated;
    summary["multi_window"] = run.result.multi_window;

    if (!cli.out_path.empty()) {
        CsvOut out(cli.out_path);
        auto& os = out.stream();
        os << "t_tilde,u,n_c_th,n_m_th,delta12sq\n";
        for (std::size_t i = 0; i < run.trajectory.size(); ++i) {
            const auto& s = run.trajectory.states[i];
            os << fmt17(run.trajectory.times[i]) << ',' << fmt17(s.u) << ','
               << fmt17(s.n_c_th) << ',' << fmt17(s.n_m_th) << ','
               << fmt17(run.trajectory.observables[i].delta12sq) << '\n';
        }
    }
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_sweep(ConfigReader& r, const Cli& cli) {
    const auto zeta_grid = r.numbers("zeta_values", {});
    const auto g_grid = r.numbers("g_r_values", {});
    const double n_m_b = r.number("n_m_bath", 0.0);
    const double n_c_b = r.number("n_c_bath", 0.0);
    const double omega_m = r.number("omega_m", 2.0 * std::numbers::pi * 1e7);
    r.finish();
    if (zeta_grid.empty() || g_grid.empty())
        throw ValidationError("sweep needs zeta_values and g_r_values arrays");

    const auto cells = sweep_cooling_heatmap(zeta_grid, g_grid, n_m_b, n_c_b, omega_m);

    CsvOut out(cli.out_path);
    auto& os = out.stream();
    os << "zeta\\g_r";
    for (double g : g_grid) os << ',' << fmt17(g);
    os << '\n';
    for (std::size_t i = 0; i < zeta_grid.size(); ++i) {
        os << fmt17(zeta_grid[i]);
        for (std::size_t j = 0; j < g_grid.size(); ++j) os << ',' << fmt17(cells[i][j]);
        os << '\n';
    }

    json summary;
    summary["command"] = "sweep";
    summary["rows"] = zeta_grid.size();
    summary["cols"] = g_grid.size();
    double tmin = cells[0][0], tmax = cells[0][0];
    for (const auto& row : cells)
        for (double v : row) {
            tmin = std::min(tmin, v);
            tmax = std::max(tmax, v);
        }
    summary["T_eff_min_K"] = tmin;
    summary["T_eff_max_K"] = tmax;
    print_summary(summary, out.to_stdout());
    return 0;
}

int cmd_optimize(ConfigReader& r, const Cli& cli) {
    (void)cli;
    const CommonParams c = read_common(r, 20.0);
    auto targets = r.numbers("targets", {});
    if (targets.empty()) targets = {r.number("target_variance", 0.8)};
    const double horizon = r.number("horizon", c.t_max);
    const double g_cap = r.number("g_cap", 1e3);
    r.finish();

    json rows = json::array();
    for (double target : targets) {
        const double gb = g_bound(c.zeta, c.n_m_b, target);
        const double gm = find_g_min(c.zeta, c.n_m_b, target, horizon, g_cap);
        const Optimum opt = find_g_opt(c.zeta, c.n_m_b, target, horizon, g_cap);
        rows.push_back({{"target", target},
                        {"g_bound", gb},
                        {"g_min", gm},
                        {"g_opt", opt.g_opt},
                        {"tau_max", opt.tau_max},
                        {"multimodal", opt.multimodal}});
    }
    json summary;
    summary["command"] = "optimize";
    summary["zeta"] = c.zeta;
    summary["n_m_bath"] = c.n_m_b;
    summary["targets"] = rows;
    std::cout << summary.dump(2) << "\n";
    return 0;
}

int cmd_oracle_check(ConfigReader& r, const Cli& cli) {
    (void)cli;
    const CommonParams c = read_common(r, 5.0);
    const std::string mode = r.text("oracle_mode", "both");
    const std::string side = r.text("sideband", "red");
    const Sideband sb = side == "blue" ? Sideband::Blue : Sideband::Red;
    const double g = r.number(sb == Sideband::Red ? "g_r" : "g_b", 1.0);
    const double dtp = r.number("detuning_over_gamma_plus", 0.0);
    const int dims_c = static_cast<int>(r.number("dims_c", 10));
    const int dims_m = static_cast<int>(r.number("dims_m", 10));
    const double tol_moment = r.number("oracle_tol_moment", 1e-6);
    const double tol_fock = r.number("oracle_tol_fock", 1e-3);
    const bool cooled = r.boolean("cooled_start", false);
    r.finish();

    const auto grid = uniform_grid(0.0, c.t_max, std::min<std::size_t>(c.samples, 201));
    IntegratorConfig tight = c.ode;
    tight.rel_tol = std::min(tight.rel_tol, 1e-11);
    tight.abs_tol = std::min(tight.abs_tol, 1e-13);

    json summary;
    summary["command"] = "oracle-check";
    bool pass = true;

    PumpProfile prof;
    prof.sideband = sb;
    prof.segments = {{0.0, g}};
    prof.detuning_over_gamma_plus = sb == Sideband::Red ? dtp : 0.0;
    prof.validate();

    // Mapped-ansatz observable series on the sample grid.
    std::map<std::string, std::vector<double>> ansatz;
    std::vector<double> a_times;
    if (sb == Sideband::Red) {
        BtsState init{0.0, 0.0, c.n_c_b, c.n_m_b};
        const auto run =
            integrate_bts(c.zeta, prof, c.n_c_b, c.n_m_b, init, 0.0, c.t_max, tight, grid);
        a_times = run.trajectory.times;
        for (const auto& s : run.trajectory.states) {
            const MomentSet m = bts_moments(s);
            ansatz["N_c"].push_back(m.N_c);
            ansatz["N_m"].push_back(m.N_m);
            ansatz["re_corr"].push_back(m.C.real());
            ansatz["im_corr"].push_back(m.C.imag());
        }
    } else {
        TmstsState init = cooled ? cooled_initial_state(c.zeta, c.n_m_b, c.n_c_b)
                                 : TmstsState{0.0, -0.5 * std::numbers::pi, c.n_c_b,
                                              c.n_m_b};
        const auto run = integrate_tmsts(c.zeta, prof, c.n_c_b, c.n_m_b, init, 0.0,
                                         c.t_max, tight, grid);
        a_times = run.trajectory.times;
        for (const auto& s : run.trajectory.states) {
            const MomentSet m = tmsts_moments(s);
            ansatz["N_c"].push_back(m.N_c);
            ansatz["N_m"].push_back(m.N_m);
            ansatz["re_corr"].push_back(m.S.real());
            ansatz["im_corr"].push_back(m.S.imag());
        }
    }

    if (mode == "moment" || mode == "both") {
        MomentSet m0;
        if (sb == Sideband::Red) {
            m0 = bts_moments(BtsState{0.0, 0.0, c.n_c_b, c.n_m_b});
        } else {
            TmstsState init = cooled ? cooled_initial_state(c.zeta, c.n_m_b, c.n_c_b)
                                     : TmstsState{0.0, -0.5 * std::numbers::pi, c.n_c_b,
                                                  c.n_m_b};
            m0 = tmsts_moments(init);
        }
        const MomentRun mr = integrate_moments(c.zeta, prof, c.n_c_b, c.n_m_b, m0, 0.0,
                                               c.t_max, tight, grid);
        std::map<std::string, std::vector<double>> om;
        for (const auto& m : mr.moments) {
            const cplx z = sb == Sideband::Red ? m.C : m.S;
            om["N_c"].push_back(m.N_c);
            om["N_m"].push_back(m.N_m);
            om["re_corr"].push_back(z.real());
            om["im_corr"].push_back(z.imag());
        }
        const DeviationReport rep =
            compare_trajectories(a_times, ansatz, mr.times, om, tol_moment);
        json jr;
        for (const auto& d : rep.per_series)
            jr[d.name] = {{"max_abs", d.max_abs}, {"scale", d.scale}, {"rel", d.rel}};
        summary["moment"] = {{"max_rel", rep.max_rel}, {"tol", rep.tol},
                             {"pass", rep.pass}, {"series", jr}};
        pass = pass && rep.pass;
    }

    if (mode == "fock" || mode == "both") {
        FockParams fp;
        fp.dims_c = dims_c;
        fp.dims_m = dims_m;
        fp.sideband = sb;
        fp.zeta = c.zeta;
        fp.g = g;
        fp.detuning_ratio = prof.detuning_over_gamma_plus;
        fp.n_c_b = c.n_c_b;
        fp.n_m_b = c.n_m_b;
        FockDensity rho0;
        if (sb == Sideband::Red) {
            rho0 = fock_thermal(dims_c, dims_m, c.n_c_b, c.n_m_b);
        } else {
            const TmstsState init = cooled ? cooled_initial_state(c.zeta, c.n_m_b, c.n_c_b)
                                           : TmstsState{0.0, -0.5 * std::numbers::pi,
                                                        c.n_c_b, c.n_m_b};
            rho0 = fock_thermal(dims_c, dims_m, init.n_c_th, init.n_m_th);
        }
        IntegratorConfig fcfg = c.ode;
        fcfg.rel_tol = std::min(fcfg.rel_tol, 1e-9);
        const FockRun fr = integrate_fock(fp, rho0, 0.0, c.t_max, fcfg, grid);
        std::map<std::string, std::vector<double>> om;
        for (const auto& m : fr.moments) {
            const cplx z = sb == Sideband::Red ? m.C : m.S;
            om["N_c"].push_back(m.N_c);
            om["N_m"].push_back(m.N_m);
            om["re_corr"].push_back(z.real());
            om["im_corr"].push_back(z.imag());
        }
        const DeviationReport rep =
            compare_trajectories(fr.times, om, a_times, ansatz, tol_fock);
        json jr;
        for (const auto& d : rep.per_series)
            jr[d.name] = {{"max_abs", d.max_abs}, {"scale", d.scale}, {"rel", d.rel}};
        summary["fock"] = {{"max_rel", rep.max_rel},
                           {"tol", rep.tol},
                           {"pass", rep.pass},
                           {"trace_drift", fr.trace_drift},
                           {"max_top_layer", fr.max_top_layer},
                           {"trusted", fr.trusted},
                           {"series", jr}};
        pass = pass && rep.pass;
    }

    summary["pass"] = pass;
    std::cout << summary.dump(2) << "\n";
    return pass ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-mode optomechanical cooling/entanglement simulator"};
    app.require_subcommand(1);
    Cli cli;
    app.add_option("--config", cli.config_path, "JSON config file (flat key-value)");
    app.add_option("--out", cli.out_path, "CSV output path (default: stdout)");
    app.add_option("--set", cli.overrides, "override a config key, key=value (repeatable)");
    app.add_flag("--strict", cli.strict, "unknown config keys are errors");

    auto* sc_cool = app.add_subcommand("cool", "red-sideband cooling trajectory");
    auto* sc_ent = app.add_subcommand("entangle", "blue-sideband entanglement trajectory");
    auto* sc_scheme = app.add_subcommand("scheme", "cool-then-entangle pipeline summary");
    auto* sc_sweep = app.add_subcommand("sweep", "steady-state temperature heatmap");
    auto* sc_opt = app.add_subcommand("optimize", "pump-strength optimization per target");
    auto* sc_orc = app.add_subcommand("oracle-check", "ansatz vs oracle deviation report");
    for (auto* sc : {sc_cool, sc_ent, sc_scheme, sc_sweep, sc_opt, sc_orc})
        sc->fallthrough();

    CLI11_PARSE(app, argc, argv);

    try {
        const json cfg = load_config(cli);
        ConfigReader reader(cfg, cli.strict);
        if (sc_cool->parsed()) return cmd_cool(reader, cli);
        if (sc_ent->parsed()) return cmd_entangle(reader, cli);
        if (sc_scheme->parsed()) return cmd_scheme(reader, cli);
        if (sc_sweep->parsed()) return cmd_sweep(reader, cli);
        if (sc_opt->parsed()) return cmd_optimize(reader, cli);
        if (sc_orc->parsed()) return cmd_oracle_check(reader, cli);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const HorizonError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 6;
    } catch (const InfeasibleError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 5;
    } catch (const SingularityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const UnstableRegimeError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DegenerateSteadyStateError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
