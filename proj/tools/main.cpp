#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dstab/hybrid.hpp"
#include "dstab/parser.hpp"
#include "dstab/solver.hpp"
#include "dstab/stability.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using namespace dstab;

std::string fmt(double d) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", d);
    return buf;
}

struct Report {
    std::string verdict;
    std::vector<std::pair<std::string, std::string>> kv;

    void add(const std::string& k, const std::string& v) { kv.emplace_back(k, v); }
    void add(const std::string& k, double v) { add(k, fmt(v)); }
    void add(const std::string& k, long long v) { add(k, std::to_string(v)); }
};

void emit(const Report& r, std::chrono::steady_clock::time_point start) {
    std::cout << "verdict: " << r.verdict << "\n";
    for (const auto& [k, v] : r.kv) std::cout << k << ": " << v << "\n";
    std::cout << "version: " << kVersion << "\n";
    std::chrono::duration<double, std::milli> w =
        std::chrono::steady_clock::now() - start;
    std::cout << "wall-ms: " << fmt(w.count()) << "\n";
}

std::string witness_str(const std::map<std::string, double>& w) {
    if (w.empty()) return "none";
    std::string out;
    for (const auto& [k, v] : w) {
        if (!out.empty()) out += " ";
        out += k + "=" + fmt(v);
    }
    return out;
}

void add_stats(Report& r, const SolverStats& s) {
    r.add("nodes", s.nodes);
    r.add("atom-evals", s.atom_evals);
    r.add("splits", s.splits);
    r.add("rounds", static_cast<long long>(s.rounds));
    r.add("max-depth", static_cast<long long>(s.deepest_floor));
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int default_workers() {
    if (const char* env = std::getenv("DSTAB_WORKERS")) {
        int w = std::atoi(env);
        if (w > 0) return w;
    }
    return 1;
}

struct SolverFlags {
    double delta = 0.01;
    double precision = 1e-3;
    int workers = default_workers();
    bool deterministic = true;
    bool trace = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--delta", delta, "perturbation bound")
            ->capture_default_str();
        cmd->add_option("--precision", precision, "flow enclosure tolerance")
            ->capture_default_str();
        cmd->add_option("--workers", workers, "solver worker threads")
            ->capture_default_str();
        cmd->add_flag("--deterministic,!--no-deterministic", deterministic,
                      "fixed top-level split, reproducible reports");
        cmd->add_flag("--trace", trace, "solver trace on stderr");
    }

    SolverConfig config() const {
        SolverConfig cfg;
        cfg.delta = delta;
        cfg.flow_tol = precision;
        cfg.workers = workers;
        cfg.deterministic = deterministic;
        cfg.trace = trace;
        return cfg;
    }

    void echo(Report& r) const {
        r.add("delta", delta);
        r.add("precision", precision);
        r.add("deterministic", deterministic ? "true" : "false");
    }
};

struct StabilityFlags {
    StabilityParams p;

    void attach(CLI::App* cmd) {
        cmd->add_option("--eps-min", p.eps_min, "smallest disturbance radius")
            ->capture_default_str();
        cmd->add_option("--eps-max", p.eps_max, "largest disturbance radius")
            ->capture_default_str();
        cmd->add_option("--delta-floor", p.dl_floor, "response radius floor")
            ->capture_default_str();
        cmd->add_option("--time-bound", p.horizon, "time window T")
            ->capture_default_str();
        cmd->add_option("--conv-time", p.conv_horizon, "convergence time T'")
            ->capture_default_str();
        cmd->add_option("--conv-radius", p.dprime_max, "basin radius bound d")
            ->capture_default_str();
        cmd->add_option("--dprime-floor", p.dprime_floor, "basin radius floor")
            ->capture_default_str();
        cmd->add_option("--conv-eps-min", p.epsp_min, "limit tolerance floor")
            ->capture_default_str();
        cmd->add_option("--conv-eps-max", p.epsp_max, "limit tolerance bound")
            ->capture_default_str();
        cmd->add_option("--conv-window-min", p.dpp_min, "late-window floor")
            ->capture_default_str();
        cmd->add_option("--conv-window-max", p.dpp_max, "late-window bound")
            ->capture_default_str();
        cmd->add_option("--exclusion", p.region_r, "Lyapunov exclusion radius")
            ->capture_default_str();
    }

    void echo(Report& r, bool asymptotic) const {
        r.add("eps-min", p.eps_min);
        r.add("eps-max", p.eps_max);
        r.add("delta-floor", p.dl_floor);
        r.add("time-bound", p.horizon);
        if (asymptotic) {
            r.add("conv-time", p.conv_horizon);
            r.add("conv-radius", p.dprime_max);
            r.add("dprime-floor", p.dprime_floor);
            r.add("conv-eps-min", p.epsp_min);
            r.add("conv-eps-max", p.epsp_max);
            r.add("conv-window-min", p.dpp_min);
            r.add("conv-window-max", p.dpp_max);
        }
    }
};

StabilityKind kind_of(const std::string& s) {
    if (s == "lyapunov") return StabilityKind::Lyapunov;
    if (s == "asymptotic") return StabilityKind::Asymptotic;
    if (s == "asymptotic-in-large") return StabilityKind::AsymptoticInLarge;
    throw CLI::ValidationError("--kind", "unknown stability kind: " + s);
}

std::shared_ptr<const OdeSystem> single_system(const ParsedFile& pf) {
    if (pf.systems.size() != 1)
        throw std::invalid_argument("file must define exactly one system block");
    return pf.systems[0];
}

int cmd_decide(const std::string& path, const SolverFlags& sf) {
    auto start = std::chrono::steady_clock::now();
    ParsedFile pf = parse_file(read_file(path));
    if (pf.sentences.size() != 1)
        throw std::invalid_argument("file must contain exactly one sentence");
    SystemRegistry reg;
    for (const auto& s : pf.systems) reg.add(s);

    auto v = decide(pf.sentences[0], sf.config(), &reg);
    Report r;
    r.verdict = result_name(v.result);
    sf.echo(r);
    r.add("complexity", classify(pf.sentences[0]).str());
    r.add("witness", witness_str(v.witness));
    add_stats(r, v.stats);
    emit(r, start);
    return v.result == DecideResult::DeltaTrue ? 0 : 1;
}

int cmd_check_stability(const std::string& path, const std::string& kind,
                        const SolverFlags& sf, const StabilityFlags& st) {
    auto start = std::chrono::steady_clock::now();
    auto sys = single_system(parse_file(read_file(path)));
    SystemRegistry reg;
    reg.add(sys);
    StabilityKind k = kind_of(kind);

    auto v = check_stability(k, *sys, st.p, sf.config(), reg);
    Report r;
    r.verdict = v.stable ? "stable" : "delta-unstable";
    r.add("system", sys->name());
    r.add("kind", kind);
    sf.echo(r);
    st.echo(r, k != StabilityKind::Lyapunov);
    r.add("complexity", v.complexity.str());
    r.add("witness", witness_str(v.solver.witness));
    add_stats(r, v.solver.stats);
    emit(r, start);
    return v.stable ? 0 : 1;
}

int cmd_lyap(const std::string& path, const std::string& tmpl,
             const std::string& param_box, bool strict, const SolverFlags& sf,
             const StabilityFlags& st) {
    auto start = std::chrono::steady_clock::now();
    auto sys = single_system(parse_file(read_file(path)));
    SystemRegistry reg;
    reg.add(sys);
    TermPtr v = parse_term(tmpl);
    Box dom = parse_box(param_box);

    auto res = lyapunov_test(*sys, v, {}, dom, st.p.region_r, strict,
                             sf.config(), reg);
    Report r;
    r.verdict = res.success ? "success" : "delta-fail";
    r.add("system", sys->name());
    r.add("template", to_string(v));
    sf.echo(r);
    r.add("exclusion", st.p.region_r);
    r.add("strict", strict ? "true" : "false");
    r.add("complexity", res.complexity.str());
    r.add("witness", witness_str(res.params));
    add_stats(r, res.solver.stats);
    emit(r, start);
    return res.success ? 0 : 1;
}

int cmd_hybrid(const std::string& path, int k_steps, bool no_invariants,
               bool no_init, double max_dwell, const SolverFlags& sf,
               const StabilityFlags& st) {
    auto start = std::chrono::steady_clock::now();
    std::shared_ptr<const HybridAutomaton> aut;
    if (path == "bouncingball") {
        aut = std::make_shared<HybridAutomaton>(bouncing_ball());
    } else {
        ParsedFile pf = parse_file(read_file(path));
        if (pf.automata.size() != 1)
            throw std::invalid_argument("file must define exactly one automaton");
        aut = pf.automata[0];
    }
    SystemRegistry reg;
    ReachOptions opt;
    opt.include_invariants = !no_invariants;
    opt.include_init = !no_init;
    opt.max_dwell = max_dwell;

    auto v = check_hybrid_stability(*aut, st.p, sf.config(), reg, k_steps, opt);
    Report r;
    r.verdict = v.stable ? "stable" : "delta-unstable";
    r.add("automaton", aut->name());
    r.add("k-steps", static_cast<long long>(k_steps));
    sf.echo(r);
    st.echo(r, false);
    for (std::size_t i = 0; i < v.paths.size(); ++i) {
        std::string label;
        for (const auto& q : v.paths[i].path) {
            if (!label.empty()) label += "->";
            label += q;
        }
        r.add("path-" + std::to_string(i),
              label + " = " + (v.paths[i].stable ? "stable" : "delta-unstable"));
    }
    emit(r, start);
    return v.stable ? 0 : 1;
}

std::vector<double> parse_schedule(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i] <= out[i - 1])
            throw std::invalid_argument("schedule must be strictly increasing");
    return out;
}

int cmd_deepen(const std::string& path, const std::string& kind,
               const std::string& schedule, const std::string& dprime_schedule,
               double budget, const SolverFlags& sf, const StabilityFlags& st) {
    auto start = std::chrono::steady_clock::now();
    auto sys = single_system(parse_file(read_file(path)));
    SystemRegistry reg;
    reg.add(sys);
    auto ts = parse_schedule(schedule);

    DeepenResult res;
    if (kind == "lyapunov") {
        res = deepen_lyapunov(*sys, st.p, sf.config(), reg, ts, budget);
    } else if (kind == "asymptotic") {
        res = deepen_asymptotic(*sys, st.p, sf.config(), reg,
                                parse_schedule(dprime_schedule), ts, budget);
    } else {
        throw CLI::ValidationError("--kind", "unknown deepen kind: " + kind);
    }

    Report r;
    r.verdict = res.found ? "delta-unstable-at T=" + fmt(res.steps.back().horizon)
                          : "exhausted";
    r.add("system", sys->name());
    r.add("kind", kind);
    sf.echo(r);
    for (std::size_t i = 0; i < res.steps.size(); ++i) {
        const auto& s = res.steps[i];
        std::string line = "T=" + fmt(s.horizon);
        if (s.dprime) line += " dprime=" + fmt(*s.dprime);
        line += s.stable ? " stable" : " delta-unstable";
        r.add("step-" + std::to_string(i), line);
    }
    emit(r, start);
    return res.found ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"delta-complete stability analysis for nonlinear and hybrid systems"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("dstab ") + kVersion);

    std::string file, kind = "lyapunov", tmpl, param_box = "p in [0.5,2]";
    std::string schedule = "1,2,4,8", dprime_schedule = "";
    int k_steps = 1;
    bool strict = true, no_invariants = false, no_init = false;
    double max_dwell = 10.0, budget = 0.0;
    SolverFlags sf;
    StabilityFlags st;

    auto* c_decide = app.add_subcommand("decide", "delta-decide one sentence");
    c_decide->add_option("file", file, "sentence file")->required();
    sf.attach(c_decide);

    auto* c_stab = app.add_subcommand("check-stability", "stability of a system");
    c_stab->add_option("file", file, "system file")->required();
    c_stab->add_option("--kind", kind,
                       "lyapunov | asymptotic | asymptotic-in-large")
        ->capture_default_str();
    sf.attach(c_stab);
    st.attach(c_stab);

    auto* c_lyap = app.add_subcommand("lyap", "Lyapunov template test");
    c_lyap->add_option("file", file, "system file")->required();
    c_lyap->add_option("--template", tmpl, "candidate V over params and state")
        ->required();
    c_lyap->add_option("--param-box", param_box, "e.g. \"p in [0.5,2]\"")
        ->capture_default_str();
    c_lyap->add_flag("--strict,!--no-strict", strict,
                     "strict decrease (asymptotic form)");
    sf.attach(c_lyap);
    st.attach(c_lyap);

    auto* c_hyb = app.add_subcommand("hybrid", "stability of a hybrid automaton");
    c_hyb->add_option("file", file, "automaton file or 'bouncingball'")->required();
    c_hyb->add_option("--k-steps", k_steps, "max discrete transitions")
        ->capture_default_str();
    c_hyb->add_flag("--no-invariants", no_invariants, "drop mode invariants");
    c_hyb->add_flag("--no-init", no_init, "paths may start in any mode");
    c_hyb->add_option("--max-dwell", max_dwell, "per-mode dwell bound")
        ->capture_default_str();
    sf.attach(c_hyb);
    st.attach(c_hyb);

    auto* c_deep = app.add_subcommand("deepen", "widen the time bound stepwise");
    c_deep->add_option("file", file, "system file")->required();
    c_deep->add_option("--kind", kind, "lyapunov | asymptotic")
        ->capture_default_str();
    c_deep->add_option("--schedule", schedule, "increasing T values, comma separated")
        ->capture_default_str();
    c_deep->add_option("--dprime-schedule", dprime_schedule,
                       "basin radii for asymptotic deepening");
    c_deep->add_option("--budget", budget, "wall-clock budget in seconds (0 = none)")
        ->capture_default_str();
    sf.attach(c_deep);
    st.attach(c_deep);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (c_decide->parsed()) return cmd_decide(file, sf);
        if (c_stab->parsed()) return cmd_check_stability(file, kind, sf, st);
        if (c_lyap->parsed()) return cmd_lyap(file, tmpl, param_box, strict, sf, st);
        if (c_hyb->parsed())
            return cmd_hybrid(file, k_steps, no_invariants, no_init, max_dwell,
                              sf, st);
        if (c_deep->parsed())
            return cmd_deepen(file, kind, schedule, dprime_schedule, budget, sf, st);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const CLI::Error& e) {
        std::cerr << "error: " << e.get_name() << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
