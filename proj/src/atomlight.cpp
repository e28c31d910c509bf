#include "cvqit/atomlight.hpp"

#include <cmath>
#include <numeric>

namespace cvqit::atomlight {

InterfaceConfig InterfaceConfig::uniform(int samples, double kappa, double angle) {
    return {samples, kappa, std::vector<double>(samples, angle)};
}

void InterfaceConfig::validate() const {
    if (samples < 1) throw PreconditionError("InterfaceConfig: need at least one sample");
    if (static_cast<int>(angles.size()) != samples)
        throw DimensionError("InterfaceConfig: one angle per sample required");
    if (!std::isfinite(kappa)) throw PreconditionError("InterfaceConfig: kappa must be finite");
}

EnsembleRegister EnsembleRegister::vacuum(int samples) {
    EnsembleRegister r;
    r.state = GaussianState::vacuum(samples);
    r.trace.push_back({"initial", r.state});
    return r;
}

SymplecticTransform pulse_symplectic(const InterfaceConfig& cfg) {
    cfg.validate();
    const int N = cfg.samples, D = 2 * N + 2;
    const int ly = 2 * N, lz = 2 * N + 1;
    Mat S = Mat::Identity(D, D);
    for (int i = 0; i < N; ++i) {
        const double c = std::cos(cfg.angles[i]), s = std::sin(cfg.angles[i]);
        S(y_index(i), lz) += cfg.kappa * c;
        S(z_index(i), lz) -= cfg.kappa * s;
        S(ly, z_index(i)) += cfg.kappa * c;
        S(ly, y_index(i)) += cfg.kappa * s;
    }
    return SymplecticTransform(S);
}

EnsembleRegister pulse_and_measure(const EnsembleRegister& reg, const InterfaceConfig& cfg, Rng& rng,
                                   std::optional<double> outcome, const std::string& label) {
    if (cfg.samples != reg.samples()) throw DimensionError("pulse_and_measure: sample count mismatch");
    GaussianState joint = tensor(reg.state, GaussianState::vacuum(1));
    joint = apply(pulse_symplectic(cfg), joint);
    std::optional<std::vector<double>> given;
    if (outcome) given = std::vector<double>{*outcome};
    HomodyneOutcome h = homodyne(joint, {cfg.samples}, {0.0}, given, rng);
    EnsembleRegister out = reg;
    out.state = h.post_state;
    out.outcomes.push_back(h.outcomes.front());
    out.trace.push_back({label, out.state});
    return out;
}

double epr_squeezing(double kappa) {
    const double k2 = kappa * kappa;
    return 0.5 * std::acosh((1 + k2) / std::sqrt(1 + 2 * k2));
}

double eraser_kappa2(double kappa1, int samples) {
    if (samples < 1) throw PreconditionError("eraser_kappa2: need at least one sample");
    return std::abs(kappa1) / std::sqrt(samples * kappa1 * kappa1 + 1);
}

EnsembleRegister eraser(const EnsembleRegister& after_first, double kappa2, Rng& rng) {
    return pulse_and_measure(after_first, InterfaceConfig::uniform(after_first.samples(), kappa2, M_PI / 2), rng,
                             std::nullopt, "eraser pulse");
}

EnsembleRegister eraser_pipeline(int samples, double kappa1, double kappa2, Rng& rng) {
    EnsembleRegister r = pulse_and_measure(EnsembleRegister::vacuum(samples),
                                           InterfaceConfig::uniform(samples, kappa1, 0.0), rng, std::nullopt,
                                           "entangling pulse");
    return eraser(r, kappa2, rng);
}

EnsembleRegister build_ghz(int samples, double kappa, GhzMode mode, Rng& rng) {
    if (samples < 2) throw PreconditionError("build_ghz: need at least two samples");
    if (mode == GhzMode::OptimalEven && samples % 2)
        throw PreconditionError("build_ghz: the two-pulse scheme is unsupported for an odd number of samples");
    EnsembleRegister r = pulse_and_measure(EnsembleRegister::vacuum(samples),
                                           InterfaceConfig::uniform(samples, kappa, 0.0), rng, std::nullopt,
                                           "sum pulse");
    if (mode == GhzMode::Pairwise) {
        for (int i = 0; i < samples; ++i)
            for (int j = i + 1; j < samples; ++j) {
                // beam only through i and j; the zero coupling elsewhere is set through kappa per sample
                InterfaceConfig c = InterfaceConfig::uniform(samples, kappa, 0.0);
                Mat S = Mat::Identity(2 * samples + 2, 2 * samples + 2);
                c.angles[i] = M_PI / 2;
                c.angles[j] = -M_PI / 2;
                Mat full = pulse_symplectic(c).matrix();
                for (int k : {i, j}) {
                    S(y_index(k), 2 * samples + 1) = full(y_index(k), 2 * samples + 1);
                    S(z_index(k), 2 * samples + 1) = full(z_index(k), 2 * samples + 1);
                    S(2 * samples, y_index(k)) = full(2 * samples, y_index(k));
                    S(2 * samples, z_index(k)) = full(2 * samples, z_index(k));
                }
                GaussianState joint = apply(SymplecticTransform(S), tensor(r.state, GaussianState::vacuum(1)));
                HomodyneOutcome h = homodyne(joint, {samples}, {0.0}, std::nullopt, rng);
                r.state = h.post_state;
                r.outcomes.push_back(h.outcomes.front());
                r.trace.push_back({"pair pulse " + std::to_string(i + 1) + "-" + std::to_string(j + 1), r.state});
            }
    } else if (mode == GhzMode::OptimalEven) {
        InterfaceConfig c = InterfaceConfig::uniform(samples, kappa, 0.0);
        for (int i = 0; i < samples; ++i) c.angles[i] = i % 2 == 0 ? M_PI / 2 : -M_PI / 2;
        r = pulse_and_measure(r, c, rng, std::nullopt, "alternating pulse");
    }
    return r;
}

std::vector<std::vector<int>> Graph::neighbours() const {
    std::vector<std::vector<int>> nb(vertices);
    for (auto [a, b] : edges) {
        if (a < 0 || b < 0 || a >= vertices || b >= vertices || a == b)
            throw PreconditionError("Graph: invalid edge");
        nb[a].push_back(b);
        nb[b].push_back(a);
    }
    return nb;
}

bool Graph::connected() const {
    if (vertices == 0) return true;
    auto nb = neighbours();
    std::vector<bool> seen(vertices, false);
    std::vector<int> stack{0};
    seen[0] = true;
    int count = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int w : nb[v])
            if (!seen[w]) seen[w] = true, ++count, stack.push_back(w);
    }
    return count == vertices;
}

Graph Graph::path(int n) {
    Graph g;
    g.vertices = n;
    for (int i = 0; i + 1 < n; ++i) g.edges.push_back({i, i + 1});
    return g;
}

Vec cluster_variable(const Graph& g, int a) {
    auto nb = g.neighbours();
    const double h = 1 / std::sqrt(2.0);
    Vec l = Vec::Zero(2 * g.vertices);
    l(y_index(a)) += h;
    l(z_index(a)) += h;
    for (int b : nb[a]) {
        l(y_index(b)) -= h;
        l(z_index(b)) += h;
    }
    return l;
}

ClusterResult build_cluster(const Graph& g, double kappa, Rng& rng) {
    if (g.vertices < 1) throw PreconditionError("build_cluster: empty graph");
    ClusterResult res;
    res.connected = g.connected();
    auto nb = g.neighbours();
    res.reg = EnsembleRegister::vacuum(g.vertices);
    const int N = g.vertices;
    for (int a = 0; a < N; ++a) {
        // light crosses a at +pi/4 and its neighbours at -pi/4, measuring J_z'(a) - sum J_y'(b)
        InterfaceConfig c = InterfaceConfig::uniform(N, kappa, 0.0);
        c.angles[a] = M_PI / 4;
        for (int b : nb[a]) c.angles[b] = -M_PI / 4;
        Mat full = pulse_symplectic(c).matrix();
        Mat S = Mat::Identity(2 * N + 2, 2 * N + 2);
        std::vector<int> lit = nb[a];
        lit.push_back(a);
        for (int k : lit) {
            S(y_index(k), 2 * N + 1) = full(y_index(k), 2 * N + 1);
            S(z_index(k), 2 * N + 1) = full(z_index(k), 2 * N + 1);
            S(2 * N, y_index(k)) = full(2 * N, y_index(k));
            S(2 * N, z_index(k)) = full(2 * N, z_index(k));
        }
        GaussianState joint = apply(SymplecticTransform(S), tensor(res.reg.state, GaussianState::vacuum(1)));
        HomodyneOutcome h = homodyne(joint, {N}, {0.0}, std::nullopt, rng);
        res.reg.state = h.post_state;
        res.reg.outcomes.push_back(h.outcomes.front());
        res.reg.trace.push_back({"vertex pulse " + std::to_string(a + 1), res.reg.state});
    }
    for (int a = 0; a < N; ++a) {
        Vec l = cluster_variable(g, a);
        double vac = l.squaredNorm() / 2;
        res.variances.push_back(variance(res.reg.state, l) / vac);
    }
    return res;
}

std::vector<double> verify_variances(const EnsembleRegister& reg, const std::vector<Vec>& forms) {
    std::vector<double> out;
    for (const auto& l : forms) {
        if (l.size() != 2 * reg.samples()) throw DimensionError("verify_variances: form has wrong length");
        out.push_back(variance(reg.state, l));
    }
    return out;
}

Vec sum_z(int samples) {
    Vec l = Vec::Zero(2 * samples);
    for (int i = 0; i < samples; ++i) l(z_index(i)) = 1;
    return l;
}

Vec sum_y(int samples) {
    Vec l = Vec::Zero(2 * samples);
    for (int i = 0; i < samples; ++i) l(y_index(i)) = 1;
    return l;
}

Vec y_difference(int samples, int i, int j) {
    Vec l = Vec::Zero(2 * samples);
    l(y_index(i)) = 1;
    l(y_index(j)) = -1;
    return l;
}

Vec alternating_y(int samples) {
    Vec l = Vec::Zero(2 * samples);
    for (int i = 0; i < samples; ++i) l(y_index(i)) = i % 2 == 0 ? 1 : -1;
    return l;
}

}  // namespace cvqit::atomlight
