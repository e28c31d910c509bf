#include "commands.hpp"

#include "cvqit/atomlight.hpp"
#include "cvqit/broadcast.hpp"
#include "cvqit/entanglement.hpp"
#include "cvqit/nongauss.hpp"
#include "cvqit/qkd.hpp"
#include "cvqit/table.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

namespace cvqit::cli {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw PreconditionError("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

json num(double v) { return std::isfinite(v) ? json(v) : json(format_number(v)); }

struct Output {
    std::string path;
    std::string format = "csv";
};

void add_output(CLI::App* app, Output& o, bool table = true) {
    app->add_option("--out", o.path, "output file (stdout when omitted)");
    if (table) app->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

void write(const Output& o, const std::string& text, std::ostream& out) {
    if (o.path.empty()) {
        out << text;
        return;
    }
    std::ofstream f(o.path, std::ios::binary);
    if (!f) throw PreconditionError("cannot write " + o.path);
    f << text;
}

void emit(const Output& o, ResultTable& t, const json& config, std::ostream& out) {
    t.meta["version"] = kVersion;
    t.meta["config"] = config;
    write(o, o.format == "json" ? t.to_json().dump(2) + "\n" : t.to_csv(), out);
}

void emit_json(const Output& o, json j, const json& config, std::ostream& out) {
    j["version"] = kVersion;
    j["config"] = config;
    write(o, j.dump(2) + "\n", out);
}

std::vector<double> linspace(double lo, double hi, int n) {
    if (n < 1) throw PreconditionError("grid size must be positive");
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
    return v;
}

broadcast::SigmaModel parse_sigma(const std::vector<std::string>& tok) {
    broadcast::SigmaModel sm;
    if (tok.empty()) return sm;
    std::string kind = "const", value = tok.back();
    if (tok.size() >= 2 && (tok[tok.size() - 2] == "const" || tok[tok.size() - 2] == "prop")) kind = tok[tok.size() - 2];
    try {
        sm.value = std::stod(value);
    } catch (const std::exception&) {
        throw PreconditionError("--sigma expects 'const <c>', 'prop <f>' or a number");
    }
    sm.kind = kind == "prop" ? broadcast::SigmaModel::Prop : broadcast::SigmaModel::Const;
    if (sm.value < 0) throw PreconditionError("--sigma must be non-negative");
    return sm;
}

json sigma_json(const broadcast::SigmaModel& sm) {
    return {{"kind", sm.kind == broadcast::SigmaModel::Prop ? "prop" : "const"}, {"value", sm.value}};
}

// ---- qkd ----

struct QkdOpts {
    double lambda = 1, cx = 0, cp = 0, x0a = 1;
    std::string attack = "ind";
    int grid = 41;
    std::int64_t samples = 0;
    std::uint64_t seed = 1;
    Output out;
};

void run_qkd(const QkdOpts& o, std::ostream& out) {
    qkd::QkdState st{o.lambda, o.cx, o.cp};
    if (!st.physical(1e-9)) throw UnphysicalError("qkd: (lambda, cx, cp) is not a physical state");
    const auto attack = o.attack == "coh" ? qkd::Attack::FiniteCoherent : qkd::Attack::Individual;
    json config = {{"command", "qkd"}, {"lambda", o.lambda}, {"cx", o.cx}, {"cp", o.cp}, {"x0a", o.x0a},
                   {"attack", o.attack}, {"grid", o.grid}, {"samples", o.samples}, {"seed", o.seed}};
    ResultTable t({"x0A", "x0B", "eps", "overlap", "secure", "efficiency-contribution"});
    const double V = o.lambda / 2, C = o.cx / 2, det = V * V - C * C;
    auto density = [&](double a, double b) {
        return std::exp(-0.5 * (V * a * a - 2 * C * a * b + V * b * b) / det) / (2 * M_PI * std::sqrt(det));
    };
    for (double x0b : linspace(0, o.x0a + 4 * std::sqrt(o.lambda), o.grid)) {
        bool secure = st.nppt() && qkd::security_ok(st, o.x0a, x0b, attack);
        double contrib = secure ? 2 * (density(o.x0a, x0b) + density(o.x0a, -x0b)) : 0;
        t.add_row({o.x0a, x0b, qkd::error_probability(st, o.x0a, x0b), qkd::eve_overlap(st, o.x0a, x0b),
                   secure ? 1.0 : 0.0, contrib});
    }
    t.meta["log_negativity"] = st.log_negativity();
    t.meta["nppt"] = st.nppt();
    try {
        auto iv = qkd::acceptance_interval(st, o.x0a, attack);
        t.meta["interval"] = {{"lo", num(iv.lo)}, {"hi", num(iv.hi)}, {"unbounded", iv.unbounded},
                              {"alpha_or_beta", num(iv.alpha_or_beta)}, {"D", num(iv.D)}};
    } catch (const UnphysicalError&) {
        t.meta["interval"] = "infeasible";
    }
    t.meta["efficiency"] = qkd::efficiency(st, attack);
    if (o.samples > 0) {
        qkd::KeyRunConfig kc;
        kc.x0a = o.x0a;
        kc.samples = o.samples;
        kc.seed = o.seed;
        kc.attack = attack;
        auto kr = qkd::simulate_key_run(st, kc);
        t.meta["key_run"] = {{"accepted", kr.accepted}, {"empirical_eps", kr.empirical_eps},
                             {"predicted_eps", kr.predicted_eps}, {"accepted_fraction", kr.accepted_fraction}};
    }
    emit(o.out, t, config, out);
}

// ---- broadcast ----

struct BroadcastOpts {
    double a = 1.5, n = 1, x0 = 3, delta = 0, epsilon = 1e-7, lambda = 2;
    std::vector<std::string> sigma;
    int grid = 50, M = 20000, bit = 0;
    double x0_max = 4, delta_max = 4;
    std::uint64_t seed = 1;
    std::string strategy = "honest", traitor = "r0";
    Output out;
};

json broadcast_config(const std::string& sub, const BroadcastOpts& o) {
    return {{"command", "broadcast " + sub}, {"a", o.a}, {"n", o.n}, {"sigma", sigma_json(parse_sigma(o.sigma))},
            {"x0", o.x0}, {"delta", o.delta}, {"epsilon", o.epsilon}, {"grid", o.grid}, {"x0_max", o.x0_max},
            {"delta_max", o.delta_max}, {"seed", o.seed}};
}

void run_surface(const BroadcastOpts& o, std::ostream& out) {
    auto sm = parse_sigma(o.sigma);
    auto x0n = linspace(o.x0_max / o.grid, o.x0_max, o.grid);
    auto dn = linspace(0, o.delta_max, o.grid);
    auto pts = broadcast::useful_region(o.epsilon, sm, x0n, dn);
    ResultTable t({"x0n", "deltan", "a_min", "a_max", "eta"});
    const double nan = std::nan("");
    for (const auto& p : pts)
        t.add_row({p.x0n, p.deltan, p.a_min.value_or(nan), p.a_max.value_or(nan), p.feasible ? p.eta : nan});
    emit(o.out, t, broadcast_config("surface", o), out);
}

void run_ptilde(const BroadcastOpts& o, std::ostream& out) {
    if (!(o.a >= 1)) throw std::invalid_argument("broadcast: a must be >= 1");
    auto sm = parse_sigma(o.sigma);
    ResultTable t({"x0", "delta", "ptilde", "eta"});
    for (double x0 : linspace(o.x0_max / o.grid, o.x0_max, o.grid))
        for (double d : linspace(0, o.delta_max, o.grid)) {
            double p = broadcast::ptilde_realistic(o.a, o.n, sm.sigma(x0), x0, d);
            t.add_row({x0, d, p, broadcast::eta_bound(p)});
        }
    emit(o.out, t, broadcast_config("ptilde", o), out);
}

broadcast::StrategyKind parse_strategy(const std::string& s) {
    using K = broadcast::StrategyKind;
    static const std::map<std::string, K> m = {{"honest", K::Honest},
                                               {"shift", K::Shift},
                                               {"equivocate", K::SenderEquivocate},
                                               {"forge", K::SenderForge},
                                               {"receiver-lie", K::ReceiverLie},
                                               {"flag-spoil", K::FlagSpoil},
                                               {"hide-zeros", K::HideZeros}};
    return m.at(s);
}

void run_broadcast(const BroadcastOpts& o, std::ostream& out) {
    auto sm = parse_sigma(o.sigma);
    broadcast::ProtocolConfig pc;
    pc.x0 = o.x0;
    pc.sigma = o.sigma.empty() ? broadcast::ProtocolConfig{}.sigma : sm.sigma(o.x0);
    pc.delta = o.delta;
    pc.M_states = o.M;
    pc.seed = o.seed;
    pc.bit = o.bit;
    broadcast::Strategy st;
    st.kind = parse_strategy(o.strategy);
    st.traitor = o.traitor == "s" ? broadcast::Role::Sender
                                  : o.traitor == "r1" ? broadcast::Role::Receiver1 : broadcast::Role::Receiver0;
    st.lambda = o.lambda;
    auto tr = broadcast::run_protocol(broadcast::make_resource(o.a, o.n), pc, st);
    json config = broadcast_config("run", o);
    config["M"] = o.M;
    config["bit"] = o.bit;
    config["strategy"] = o.strategy;
    config["traitor"] = o.traitor;
    config["lambda"] = o.lambda;
    emit_json(o.out, tr.to_json(), config, out);
}

// ---- qcorr ----

struct QcorrOpts {
    int grid = 9, count = 200;
    double T = 1, r = 0.5, lambda = 2, r_max = 1;
    std::uint64_t seed = 1;
    Output out;
};

void run_qcorr(const std::string& family, const QcorrOpts& o, std::ostream& out) {
    json config = {{"command", "qcorr " + family}, {"grid", o.grid}, {"T", o.T}, {"r", o.r}, {"r_max", o.r_max}};
    ResultTable t({"param", "Q", "negativity", "best_theta", "best_phi"});
    auto row = [&](double param, const WignerPoly& w, double neg) {
        auto q = bit_correlation_Q(w);
        auto b = q.best.reduced();
        t.add_row({param, q.Q, neg, b.theta, b.phi});
    };
    if (family == "tms") {
        for (double r : linspace(0, o.r_max, o.grid))
            row(r, WignerPoly::gaussian(GaussianState::tms(r)), negativity_closed_form(Family::Tms, {r}));
    } else if (family == "bell") {
        for (double p : linspace(0, 1, o.grid)) row(p, bell(BellKind::PhiPlus, p), negativity_closed_form(Family::Bell, {p}));
    } else if (family == "psub") {
        for (double r : linspace(o.r_max / o.grid, o.r_max, o.grid))
            row(r, photon_subtracted(o.T, r), negativity_closed_form(Family::PhotonSubtracted, {o.T, r}));
    } else if (family == "mixture") {
        for (double p : linspace(0, 1, o.grid))
            row(p, mixture_with_vacuum(p, WignerPoly::gaussian(GaussianState::tms(o.r))),
                negativity_closed_form(Family::Mixture, {p, o.r}));
    } else if (family == "qutrit") {
        row(0, photonic_qutrit(), pure_state_negativity(photonic_qutrit_amplitudes()));
    } else if (family == "scatter") {
        config["count"] = o.count;
        config["lambda"] = o.lambda;
        config["seed"] = o.seed;
        for (const auto& p : random_gaussian_scatter(o.count, o.lambda, o.seed)) {
            // for a standard-form state the optimum is x-x or p-p, whichever correlation is larger
            double ang = std::abs(p.params.c_x) >= std::abs(p.params.c_p) ? 0 : M_PI / 2;
            t.add_row({p.purity, p.Q, p.negativity, ang, ang});
        }
    }
    emit(o.out, t, config, out);
}

// ---- atomlight ----

struct AtomOpts {
    int samples = 2, grid = 21;
    double kappa = 1, kappa_max = 2;
    std::string mode = "pairwise", graph;
    std::uint64_t seed = 1;
    bool trace = false;
    Output out;
};

json register_json(const atomlight::EnsembleRegister& r, bool trace) {
    json j;
    j["state"] = r.state.to_json();
    j["outcomes"] = r.outcomes;
    if (trace) {
        auto arr = json::array();
        for (const auto& s : r.trace) arr.push_back({{"stage", s.label}, {"state", s.state.to_json()}});
        j["trace"] = arr;
    }
    return j;
}

void run_eraser_surface(const AtomOpts& o, std::ostream& out) {
    json config = {{"command", "atomlight eraser-surface"}, {"samples", o.samples}, {"grid", o.grid},
                   {"kappa_max", o.kappa_max}, {"seed", o.seed}};
    ResultTable t({"kappa1", "kappa2", "negativity"});
    Rng rng(o.seed);
    Modes rest;
    for (int i = 1; i < o.samples; ++i) rest.push_back(i);
    for (double k1 : linspace(0, o.kappa_max, o.grid))
        for (double k2 : linspace(0, o.kappa_max, o.grid)) {
            auto r = atomlight::eraser_pipeline(o.samples, k1, k2, rng);
            t.add_row({k1, k2, negativity(r.state, ModePartition::split({0}, rest))});
        }
    emit(o.out, t, config, out);
}

void run_ghz(const AtomOpts& o, std::ostream& out) {
    json config = {{"command", "atomlight ghz"}, {"samples", o.samples}, {"kappa", o.kappa}, {"mode", o.mode},
                   {"seed", o.seed}};
    auto mode = o.mode == "single" ? atomlight::GhzMode::SinglePulse
                                   : o.mode == "optimal" ? atomlight::GhzMode::OptimalEven : atomlight::GhzMode::Pairwise;
    Rng rng(o.seed);
    auto r = atomlight::build_ghz(o.samples, o.kappa, mode, rng);
    const int N = o.samples;
    json j = register_json(r, o.trace);
    auto v = atomlight::verify_variances(r, {atomlight::sum_z(N), atomlight::y_difference(N, 0, 1)});
    j["var_sum_z"] = v[0];
    j["var_y1_minus_y2"] = v[1];
    std::vector<double> h(N, 0.0), g(N, 1.0);
    Modes A{0}, B;
    if (mode == atomlight::GhzMode::OptimalEven) {
        // alternating signs, bipartition odd | even samples
        for (int i = 0; i < N; ++i) h[i] = i % 2 == 0 ? 1 : -1;
        A.clear();
        for (int i = 0; i < N; ++i) (i % 2 == 0 ? A : B).push_back(i);
        j["var_alternating_y"] = atomlight::verify_variances(r, {atomlight::alternating_y(N)})[0];
    } else {
        h[0] = 1, h[1] = -1;
        for (int i = 1; i < N; ++i) B.push_back(i);
    }
    auto c = van_loock_furusawa(r.state, h, g, ModePartition::split(A, B));
    j["van_loock_furusawa"] = {{"lhs", c.lhs}, {"bound", c.bound}, {"violated", c.violated}};
    emit_json(o.out, j, config, out);
}

atomlight::Graph read_graph(const std::string& path) {
    std::istringstream in(read_file(path));
    atomlight::Graph g;
    std::string line;
    int declared = -1;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "vertices") {
            if (!(ls >> declared)) throw PreconditionError("graph: 'vertices' needs a count");
            continue;
        }
        int a = 0, b = 0;
        try {
            a = std::stoi(first);
        } catch (const std::exception&) {
            throw PreconditionError("graph: cannot parse line '" + line + "'");
        }
        if (!(ls >> b)) throw PreconditionError("graph: edge needs two vertices");
        g.edges.push_back({a, b});
        g.vertices = std::max({g.vertices, a + 1, b + 1});
    }
    if (declared >= 0) {
        if (declared < g.vertices) throw PreconditionError("graph: edge refers to an undeclared vertex");
        g.vertices = declared;
    }
    return g;
}

void run_cluster(const AtomOpts& o, std::ostream& out, std::ostream& err) {
    if (o.graph.empty()) throw PreconditionError("cluster: --graph is required");
    auto g = read_graph(o.graph);
    Rng rng(o.seed);
    auto res = atomlight::build_cluster(g, o.kappa, rng);
    if (!res.connected) err << "warning: graph is disconnected; the state splits into independent clusters\n";
    json edges = json::array();
    for (auto [a, b] : g.edges) edges.push_back({a, b});
    json config = {{"command", "atomlight cluster"}, {"vertices", g.vertices}, {"edges", edges},
                   {"kappa", o.kappa}, {"seed", o.seed}};
    json j = register_json(res.reg, o.trace);
    j["normalized_variances"] = res.variances;
    j["connected"] = res.connected;
    emit_json(o.out, j, config, out);
}

// ---- core ----

struct CoreOpts {
    double r = 0.5;
    std::string state;
    Output out;
};

void run_core_analyze(const CoreOpts& o, std::ostream& out) {
    auto s = GaussianState::from_json(json::parse(read_file(o.state)));
    json j;
    j["modes"] = s.modes();
    j["physical"] = check_physicality(s);
    j["symplectic_spectrum"] = symplectic_spectrum(s.gamma());
    if (check_physicality(s)) {
        j["purity"] = purity(s);
        if (s.modes() == 2) {
            auto sf = standard_form(s);
            j["standard_form"] = {{"lambda_a", sf.lambda_a}, {"lambda_b", sf.lambda_b}, {"c_x", sf.c_x}, {"c_p", sf.c_p}};
            j["log_negativity"] = log_negativity(s, ModePartition::split({0}, {1}));
            j["Q"] = gaussian_Q(sf);
        }
        if (s.modes() == 3) j["tripartite_class"] = to_string(classify_tripartite(s));
    }
    // file name only, so recorded outputs do not depend on where the input lives
    emit_json(o.out, j, {{"command", "core analyze"}, {"state", std::filesystem::path(o.state).filename().string()}}, out);
}

// ---- regress ----

bool close(double got, double want, double tol) {
    if (std::isnan(got) || std::isnan(want)) return std::isnan(got) && std::isnan(want);
    if (std::isinf(got) || std::isinf(want)) return got == want;
    return std::abs(got - want) <= tol * std::max(1.0, std::abs(want));
}

void compare_json(const json& got, const json& want, double tol, const std::string& where,
                  std::vector<std::string>& bad) {
    if (got.is_number() && want.is_number()) {
        if (!close(got.get<double>(), want.get<double>(), tol))
            bad.push_back(where + ": got " + got.dump() + ", expected " + want.dump());
    } else if (got.is_object() && want.is_object()) {
        for (auto it = want.begin(); it != want.end(); ++it) {
            if (it.key() == "version") continue;
            if (!got.contains(it.key())) bad.push_back(where + "/" + it.key() + ": missing");
            else compare_json(got[it.key()], it.value(), tol, where + "/" + it.key(), bad);
        }
        for (auto it = got.begin(); it != got.end(); ++it)
            if (!want.contains(it.key())) bad.push_back(where + "/" + it.key() + ": unexpected");
    } else if (got.is_array() && want.is_array()) {
        if (got.size() != want.size()) {
            bad.push_back(where + ": length " + std::to_string(got.size()) + " vs " + std::to_string(want.size()));
            return;
        }
        for (std::size_t i = 0; i < got.size(); ++i)
            compare_json(got[i], want[i], tol, where + "[" + std::to_string(i) + "]", bad);
    } else if (got != want) {
        bad.push_back(where + ": got " + got.dump() + ", expected " + want.dump());
    }
}

void compare_csv(const std::string& got, const std::string& want, double tol, std::vector<std::string>& bad) {
    auto g = parse_csv(got), w = parse_csv(want);
    if (g.size() != w.size()) {
        bad.push_back("row count " + std::to_string(g.size()) + " vs " + std::to_string(w.size()));
        return;
    }
    for (std::size_t r = 0; r < g.size(); ++r) {
        if (g[r].size() != w[r].size()) {
            bad.push_back("row " + std::to_string(r) + ": width differs");
            continue;
        }
        for (std::size_t c = 0; c < g[r].size(); ++c) {
            if (g[r][c] == w[r][c]) continue;
            bool ok = false;
            if (r > 0) {
                try {
                    ok = close(ResultTable::from_csv("h\n" + g[r][c]).rows.at(0).at(0),
                               ResultTable::from_csv("h\n" + w[r][c]).rows.at(0).at(0), tol);
                } catch (const std::exception&) {
                }
            }
            if (!ok)
                bad.push_back("row " + std::to_string(r) + " col " + std::to_string(c) + ": got " + g[r][c] +
                              ", expected " + w[r][c]);
        }
    }
}

int run_regress(const std::string& dir, std::optional<double> tol_override, bool update, std::ostream& out,
                std::ostream& err) {
    json manifest = json::parse(read_file(dir + "/manifest.json"));
    int failed = 0;
    for (const auto& entry : manifest) {
        const std::string name = entry.at("name");
        std::vector<std::string> args;
        for (std::string a : entry.at("args")) {
            auto pos = a.find("{dir}");
            if (pos != std::string::npos) a.replace(pos, 5, dir);
            args.push_back(a);
        }
        std::ostringstream got, diag;
        int code = run(args, got, diag);
        const std::string file = dir + "/" + entry.at("file").get<std::string>();
        if (code != 0) {
            out << "FAIL " << name << " (exit " << code << ": " << diag.str() << ")\n";
            ++failed;
            continue;
        }
        if (update) {
            std::ofstream(file, std::ios::binary) << got.str();
            out << "UPDATED " << name << "\n";
            continue;
        }
        const double tol = tol_override.value_or(entry.value("tol", 1e-9));
        std::vector<std::string> bad;
        const std::string want = read_file(file);
        if (file.size() > 5 && file.substr(file.size() - 5) == ".json")
            compare_json(json::parse(got.str()), json::parse(want), tol, "", bad);
        else
            compare_csv(got.str(), want, tol, bad);
        if (bad.empty()) {
            out << "PASS " << name << "\n";
        } else {
            ++failed;
            out << "FAIL " << name << " (" << bad.size() << " cells)\n";
            for (std::size_t i = 0; i < bad.size() && i < 20; ++i) out << "  " << bad[i] << "\n";
        }
    }
    if (failed) err << failed << " golden table(s) differ\n";
    return failed ? 1 : 0;
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::vector<std::string> rest;
    std::string cfg;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw CLI::ArgumentMismatch("--config needs a file");
            cfg = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            cfg = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (cfg.empty()) return rest;
    json j = json::parse(read_file(cfg));
    std::vector<std::string> path;
    std::size_t k = 0;
    while (k < rest.size() && k < 2 && rest[k].rfind("-", 0) != 0) path.push_back(rest[k++]);
    std::vector<std::string> extra;
    auto splice = [&](const json& ns) {
        for (auto it = ns.begin(); it != ns.end(); ++it) {
            const auto& v = it.value();
            if (v.is_object()) continue;
            if (v.is_boolean()) {
                if (v.get<bool>()) extra.push_back("--" + it.key());
                continue;
            }
            extra.push_back("--" + it.key());
            auto push = [&](const json& x) {
                extra.push_back(x.is_string() ? x.get<std::string>()
                                : x.is_number_integer() ? std::to_string(x.get<long long>())
                                                        : format_number(x.get<double>()));
            };
            if (v.is_array())
                for (const auto& x : v) push(x);
            else
                push(v);
        }
    };
    if (!path.empty() && j.contains(path[0])) {
        splice(j[path[0]]);
        if (path.size() > 1 && j[path[0]].contains(path[1])) splice(j[path[0]][path[1]]);
    }
    std::vector<std::string> outv(rest.begin(), rest.begin() + static_cast<long>(k));
    outv.insert(outv.end(), extra.begin(), extra.end());
    outv.insert(outv.end(), rest.begin() + static_cast<long>(k), rest.end());
    return outv;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"continuous-variable quantum information toolkit"};
    app.name("cvqit");
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.set_version_flag("--version", kVersion);
    std::function<void()> action;

    QkdOpts qo;
    auto* qkd_cmd = app.add_subcommand("qkd", "key distribution analytics for a symmetric two-mode state");
    qkd_cmd->add_option("--lambda", qo.lambda, "local variance lambda")->required();
    qkd_cmd->add_option("--cx", qo.cx, "x-x correlation");
    qkd_cmd->add_option("--cp", qo.cp, "p-p correlation magnitude");
    qkd_cmd->add_option("--x0a", qo.x0a, "Alice's outcome magnitude");
    qkd_cmd->add_option("--attack", qo.attack)->check(CLI::IsMember({"ind", "coh"}));
    qkd_cmd->add_option("--grid", qo.grid, "number of x0B points")->check(CLI::PositiveNumber);
    qkd_cmd->add_option("--samples", qo.samples, "Monte-Carlo key-run samples (0 skips)");
    qkd_cmd->add_option("--seed", qo.seed);
    add_output(qkd_cmd, qo.out);
    qkd_cmd->callback([&] { action = [&] { run_qkd(qo, out); }; });

    BroadcastOpts bo;
    auto* bc = app.add_subcommand("broadcast", "detectable broadcast with a three-mode Gaussian resource");
    bc->require_subcommand(1);
    auto bc_common = [&](CLI::App* c) {
        c->add_option("--a", bo.a, "resource parameter a");
        c->add_option("--n", bo.n, "thermal factor n");
        c->add_option("--sigma", bo.sigma, "pointer width: 'const c', 'prop f' or a number")
            ->expected(1, 2)
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
        c->add_option("--x0", bo.x0);
        c->add_option("--delta", bo.delta);
        c->add_option("--epsilon", bo.epsilon);
        c->add_option("--seed", bo.seed);
        c->add_option("--grid", bo.grid)->check(CLI::PositiveNumber);
        c->add_option("--x0-max", bo.x0_max)->check(CLI::PositiveNumber);
        c->add_option("--delta-max", bo.delta_max)->check(CLI::NonNegativeNumber);
    };
    auto* surf = bc->add_subcommand("surface", "useful-region boundary over (x0/sqrt n, delta/sqrt n)");
    bc_common(surf);
    add_output(surf, bo.out);
    surf->callback([&] { action = [&] { run_surface(bo, out); }; });
    auto* pt = bc->add_subcommand("ptilde", "conditional success probability on an (x0, delta) grid");
    bc_common(pt);
    add_output(pt, bo.out);
    pt->callback([&] { action = [&] { run_ptilde(bo, out); }; });
    auto* brun = bc->add_subcommand("run", "one protocol execution, JSON transcript");
    bc_common(brun);
    brun->add_option("--M", bo.M, "number of resource states")->check(CLI::PositiveNumber);
    brun->add_option("--bit", bo.bit)->check(CLI::IsMember({0, 1}));
    brun->add_option("--strategy", bo.strategy)
        ->check(CLI::IsMember({"honest", "shift", "equivocate", "forge", "receiver-lie", "flag-spoil", "hide-zeros"}));
    brun->add_option("--traitor", bo.traitor)->check(CLI::IsMember({"s", "r0", "r1"}));
    brun->add_option("--lambda", bo.lambda, "shift factor of the shift strategy");
    add_output(brun, bo.out, false);
    brun->callback([&] { action = [&] { run_broadcast(bo, out); }; });

    QcorrOpts co;
    std::string family;
    auto* qc = app.add_subcommand("qcorr", "bit-quadrature correlation Q for state families");
    qc->add_option("family", family)->required()->check(
        CLI::IsMember({"tms", "bell", "psub", "mixture", "qutrit", "scatter"}));
    qc->add_option("--grid", co.grid)->check(CLI::PositiveNumber);
    qc->add_option("--T", co.T, "transmissivity (psub)");
    qc->add_option("--r", co.r, "squeezing (mixture)");
    qc->add_option("--r-max", co.r_max, "largest squeezing (tms, psub)");
    qc->add_option("--count", co.count, "number of random states (scatter)")->check(CLI::PositiveNumber);
    qc->add_option("--lambda", co.lambda, "local variance (scatter)");
    qc->add_option("--seed", co.seed);
    add_output(qc, co.out);
    qc->callback([&] { action = [&] { run_qcorr(family, co, out); }; });

    AtomOpts ao;
    auto* at = app.add_subcommand("atomlight", "measurement-induced entanglement of atomic samples");
    at->require_subcommand(1);
    auto at_common = [&](CLI::App* c) {
        c->add_option("--kappa", ao.kappa, "coupling");
        c->add_option("--seed", ao.seed);
        c->add_flag("--trace", ao.trace, "include the state after every stage");
    };
    auto* es = at->add_subcommand("eraser-surface", "negativity after the eraser pulse over (kappa1, kappa2)");
    at_common(es);
    es->add_option("--samples", ao.samples)->check(CLI::Range(2, 16));
    es->add_option("--grid", ao.grid)->check(CLI::PositiveNumber);
    es->add_option("--kappa-max", ao.kappa_max)->check(CLI::PositiveNumber);
    add_output(es, ao.out);
    es->callback([&] { action = [&] { run_eraser_surface(ao, out); }; });
    auto* ghz = at->add_subcommand("ghz", "GHZ-like state of several samples");
    at_common(ghz);
    ghz->add_option("--samples", ao.samples)->check(CLI::Range(2, 16));
    ghz->add_option("--mode", ao.mode)->check(CLI::IsMember({"single", "pairwise", "optimal"}));
    add_output(ghz, ao.out, false);
    ghz->callback([&] { action = [&] { run_ghz(ao, out); }; });
    auto* cl = at->add_subcommand("cluster", "cluster state on a graph given as an edge list");
    at_common(cl);
    cl->add_option("--graph", ao.graph, "edge-list file, one 'a b' pair per line, zero-based")->required();
    add_output(cl, ao.out, false);
    cl->callback([&] { action = [&] { run_cluster(ao, out, err); }; });

    CoreOpts ko;
    auto* core = app.add_subcommand("core", "state algebra utilities");
    core->require_subcommand(1);
    auto* ktms = core->add_subcommand("tms", "two-mode squeezed vacuum as JSON");
    ktms->add_option("--r", ko.r);
    add_output(ktms, ko.out, false);
    ktms->callback([&] { action = [&] { write(ko.out, GaussianState::tms(ko.r).to_json().dump(2) + "\n", out); }; });
    auto* kan = core->add_subcommand("analyze", "invariants of a state given as JSON");
    kan->add_option("--state", ko.state)->required()->check(CLI::ExistingFile);
    add_output(kan, ko.out, false);
    kan->callback([&] { action = [&] { run_core_analyze(ko, out); }; });

    std::string golden;
    std::optional<double> tol;
    bool update = false;
    int regress_code = 0;
    auto* rg = app.add_subcommand("regress", "re-run the golden configurations and compare");
    rg->add_option("golden_dir", golden)->required()->check(CLI::ExistingDirectory);
    rg->add_option("--tolerance", tol, "override every per-table tolerance");
    rg->add_flag("--update", update, "rewrite the golden files");
    rg->callback([&] { action = [&] { regress_code = run_regress(golden, tol, update, out, err); }; });

    try {
        auto args = expand_config(raw_args);
        std::vector<std::string> rev(args.rbegin(), args.rend());
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    try {
        if (action) action();
        return regress_code;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const std::logic_error& e) {
        err << "invalid configuration: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "failure: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace cvqit::cli
