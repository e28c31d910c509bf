#include "cvqit/broadcast.hpp"

#include "cvqit/entanglement.hpp"
#include "cvqit/ops.hpp"
#include "cvqit/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace cvqit::broadcast {

namespace {

struct Coeffs {
    double R, b, c;
};

Coeffs coeffs(double a) {
    if (!(a >= 1)) throw PreconditionError("broadcast: a must be >= 1");
    double R = std::sqrt(9 * a * a - 8);
    return {R, (5 * a - R) / 4, (a - R) / 4};
}

double logsumexp(const double* v, int n) {
    double m = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) m = std::max(m, v[i]);
    if (!std::isfinite(m)) return m;
    double s = 0;
    for (int i = 0; i < n; ++i) s += std::exp(v[i] - m);
    return m + std::log(s);
}

int bit_of(int pattern, int party) { return (pattern >> (2 - party)) & 1; }

}  // namespace

Mat gamma_a(double a) {
    const Coeffs k = coeffs(a);
    Mat g = Mat::Zero(6, 6);
    for (int i = 0; i < 3; ++i) {
        g(2 * i, 2 * i) = a;
        g(2 * i + 1, 2 * i + 1) = k.b;
        for (int j = 0; j < 3; ++j)
            if (i != j) {
                g(2 * i, 2 * j) = k.c;
                g(2 * i + 1, 2 * j + 1) = -k.c;
            }
    }
    return g;
}

Vec TripartiteResource::displacement(double x0) {
    Vec d = Vec::Zero(6);
    d(0) = d(2) = d(4) = -x0 / 3;
    return d;
}

GaussianState tritter_resource(double a, double n) {
    const Coeffs k = coeffs(a);
    if (!(n >= 1)) throw PreconditionError("broadcast: n must be >= 1");
    const double s = (3 * a - k.R) / 2;
    Mat g = Mat::Zero(6, 6);
    g(0, 0) = n * s;
    g(1, 1) = n / s;
    for (int m = 1; m < 3; ++m) {
        g(2 * m, 2 * m) = n / s;
        g(2 * m + 1, 2 * m + 1) = n * s;
    }
    return apply(tritter(), GaussianState(Vec::Zero(6), g));
}

TripartiteResource make_resource(double a, double n) {
    const Coeffs k = coeffs(a);
    if (!(n >= 1)) throw PreconditionError("broadcast: n must be >= 1");
    TripartiteResource r;
    r.a = a;
    r.n = n;
    r.b = k.b;
    r.c = k.c;
    Mat direct = n * gamma_a(a);
    GaussianState built = tritter_resource(a, n);
    double diff = (built.gamma() - direct).cwiseAbs().maxCoeff();
    // the tritter route squares the input squeezing, so rounding grows with the square of the scale
    const double scale = std::max(1.0, direct.cwiseAbs().maxCoeff());
    if (diff > 1e-12 * scale * scale)
        throw NumericError("make_resource: tritter and direct constructions disagree by " + std::to_string(diff));
    r.state = GaussianState(Vec::Zero(6), direct);
    return r;
}

bool consistent_pattern(int idx) {
    int zeros = 3 - ((idx >> 2) & 1) - ((idx >> 1) & 1) - (idx & 1);
    return zeros == 1;
}

PrimitiveProbabilities primitive_probs(const TripartiteResource& res, double x0, double sigma) {
    if (!(x0 > 0)) throw PreconditionError("primitive_probs: x0 must be positive");
    if (sigma < 0) throw PreconditionError("primitive_probs: sigma must be non-negative");
    if (res.n != 1) {
        // no closed form for the scaled state; the overlap handles it
        PrimitiveProbabilities pp;
        pp.tilde = pattern_probs(res, x0, sigma, 0, TripartiteResource::displacement(x0));
        pp.tilde_p = pp.tilde[pattern_index(0, 1, 1)];
        pp.tilde_delta1 = pp.tilde[pattern_index(1, 1, 1)];
        pp.tilde_delta2 = pp.tilde[pattern_index(0, 0, 0)];
        pp.tilde_delta3 = pp.tilde[pattern_index(0, 0, 1)];
        double s2 = sigma * sigma;
        if (sigma > 0) {
            Mat gm = Mat::Zero(6, 6);
            for (int i = 0; i < 3; ++i) {
                gm(2 * i, 2 * i) = s2;
                gm(2 * i + 1, 2 * i + 1) = 1 / s2;
            }
            Mat sum = res.state.gamma() + gm;
            Eigen::LLT<Mat> llt(sum);
            Vec d = TripartiteResource::displacement(x0);
            auto raw = [&](int pat) {
                Vec dm = Vec::Zero(6);
                for (int i = 0; i < 3; ++i) dm(2 * i) = bit_of(pat, i) ? -x0 : x0;
                Vec dd = dm - d;
                return std::pow((sum / 2).determinant(), -0.5) * std::exp(-dd.dot(llt.solve(dd)));
            };
            pp.p = raw(pattern_index(0, 1, 1));
            pp.delta1 = raw(pattern_index(1, 1, 1));
            pp.delta2 = raw(pattern_index(0, 0, 0));
            pp.delta3 = raw(pattern_index(0, 0, 1));
        }
        return pp;
    }
    const double a = res.a, b = res.b, c = res.c, R = std::sqrt(9 * a * a - 8);
    const double s2 = sigma * sigma, x2 = x0 * x0;
    const double K1 = s2 + (3 * a - R) / 2, K2 = s2 + (3 * a + R) / 4;
    const double ep = -8 * x2 / (3 * K2);
    const double e1 = -4 * x2 / (3 * K1);
    const double e2 = -16 * x2 / (3 * K1);
    const double e3 = -4 * x2 * (s2 + b) / (K1 * K2);

    PrimitiveProbabilities pp;
    if (sigma > 0) {
        const double is2 = 1 / s2;
        const double logC = std::log(8.0) - std::log(a - c + s2) - std::log(b + c + is2) -
                            0.5 * (std::log(a + 2 * c + s2) + std::log(b - 2 * c + is2));
        pp.p = std::exp(logC + ep);
        pp.delta1 = std::exp(logC + e1);
        pp.delta2 = std::exp(logC + e2);
        pp.delta3 = std::exp(logC + e3);
    }
    const double terms[8] = {ep, ep, ep, e1, e2, e3, e3, e3};
    const double lz = logsumexp(terms, 8);
    pp.tilde_p = std::exp(ep - lz);
    pp.tilde_delta1 = std::exp(e1 - lz);
    pp.tilde_delta2 = std::exp(e2 - lz);
    pp.tilde_delta3 = std::exp(e3 - lz);
    for (int i = 0; i < 8; ++i) {
        int zeros = 3 - bit_of(i, 0) - bit_of(i, 1) - bit_of(i, 2);
        pp.tilde[i] = zeros == 1 ? pp.tilde_p : zeros == 0 ? pp.tilde_delta1 : zeros == 3 ? pp.tilde_delta2 : pp.tilde_delta3;
    }
    return pp;
}

Patterns pattern_probs(const TripartiteResource& res, double x0, double sigma, double delta, const Vec& d) {
    if (d.size() != 6) throw DimensionError("pattern_probs: displacement must have 6 entries");
    if (sigma < 0) throw PreconditionError("pattern_probs: sigma must be non-negative");
    // x and p blocks decouple and only the x block carries pattern dependence
    Mat gx(3, 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) gx(i, j) = res.state.gamma()(2 * i, 2 * j);
    gx.diagonal().array() += sigma * sigma;
    Eigen::LLT<Mat> llt(gx);
    if (llt.info() != Eigen::Success) throw NumericError("pattern_probs: singular x block");
    double logw[8];
    for (int pat = 0; pat < 8; ++pat) {
        Vec dd(3);
        for (int i = 0; i < 3; ++i) {
            double mag = i == 0 ? x0 : x0 + delta;
            dd(i) = (bit_of(pat, i) ? -mag : mag) - d(2 * i);
        }
        logw[pat] = -dd.dot(llt.solve(dd));
    }
    double lz = logsumexp(logw, 8);
    Patterns out;
    for (int i = 0; i < 8; ++i) out[i] = std::exp(logw[i] - lz);
    return out;
}

double ptilde_realistic(double a, double n, double sigma, double x0, double delta) {
    if (!(n >= 1)) throw PreconditionError("ptilde_realistic: n must be >= 1");
    const double R = std::sqrt(9 * a * a - 8), s2 = sigma * sigma, s4 = s2 * s2, D = delta;
    const double den = 9 * n * (4 * s4 + 9 * a * s2 - R * s2 + 4);
    const double t1 = -4 * (D + x0) * (D * (4 * s2 + 7 * a - 3 * R) + (4 * s2 + 3 * a + R) * x0) / den;
    const double t2 = 4 * x0 * (4 * (a - R) * D + (4 * s2 + 9 * a - 5 * R) * x0) / den;
    const double t3 = -32 * (D + x0) * (D * (s2 + a) + (s2 + R) * x0) / den;
    return 1 / (3 + 3 * std::exp(t1) + std::exp(t2) + std::exp(t3));
}

double eta_bound(double ptilde) { return 1 - 9 * ptilde * ptilde; }

double threshold_crossover(double x0, double lo, double hi) {
    auto gap = [x0](double a) {
        auto pp = primitive_probs(make_resource(a, 1), x0, 0);
        double worst = std::max({pp.tilde_delta1, pp.tilde_delta2, pp.tilde_delta3});
        return std::log(pp.tilde_p) - std::log(worst);
    };
    double flo = gap(lo), fhi = gap(hi);
    if (flo * fhi > 0) throw NumericError("threshold_crossover: no sign change in bracket");
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        double mid = 0.5 * (lo + hi), fm = gap(mid);
        if ((fm > 0) == (fhi > 0)) hi = mid, fhi = fm;
        else lo = mid, flo = fm;
    }
    return 0.5 * (lo + hi);
}

RegionPoint useful_region_point(double epsilon, const SigmaModel& sm, double x0n, double deltan) {
    if (!(epsilon > 0)) throw PreconditionError("useful_region: epsilon must be positive");
    RegionPoint pt;
    pt.x0n = x0n;
    pt.deltan = deltan;
    const double sigma = sm.sigma(x0n);
    const double target = 1.0 / 3.0 - epsilon;
    auto g = [&](double a) { return ptilde_realistic(a, 1, sigma, x0n, deltan) - target; };
    const double lo = 1 + 1e-6, hi = 1e3;
    const int N = 4000;
    std::vector<double> as(N + 1), gs(N + 1);
    for (int i = 0; i <= N; ++i) {
        as[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / N);
        gs[i] = g(as[i]);
    }
    auto bisect = [&](double l, double h, double gl) {
        for (int it = 0; it < 100 && h - l > 1e-12 * h; ++it) {
            double m = 0.5 * (l + h), gm = g(m);
            if ((gm > 0) == (gl > 0)) l = m, gl = gm;
            else h = m;
        }
        return 0.5 * (l + h);
    };
    double best = -1;
    for (int i = 0; i < N; ++i) {
        if (gs[i] <= 0 && gs[i + 1] > 0 && !pt.a_min) pt.a_min = bisect(as[i], as[i + 1], gs[i]);
        if (gs[i] > 0 && gs[i + 1] <= 0) pt.a_max = bisect(as[i], as[i + 1], gs[i]);
        best = std::max(best, gs[i] + target);
    }
    best = std::max(best, gs[N] + target);
    pt.feasible = pt.a_min.has_value() || pt.a_max.has_value() || gs[0] > 0;
    pt.eta = eta_bound(std::min(best, 1.0 / 3.0));
    return pt;
}

std::vector<RegionPoint> useful_region(double epsilon, const SigmaModel& sm, const std::vector<double>& x0n,
                                       const std::vector<double>& deltan) {
    std::vector<RegionPoint> out(x0n.size() * deltan.size());
    parallel_for(static_cast<int>(out.size()), [&](int k) {
        out[k] = useful_region_point(epsilon, sm, x0n[k / deltan.size()], deltan[k % deltan.size()]);
    });
    return out;
}

Trit trit_encode(int first, int second) {
    if ((first != 0 && first != 1) || (second != 0 && second != 1))
        throw PreconditionError("trit_encode: bits must be 0 or 1");
    if (first == 1 && second == 0) return Trit::Zero;
    if (first == 0 && second == 1) return Trit::One;
    if (first == 1 && second == 1) return Trit::Two;
    return Trit::U;
}

const char* to_string(Trit t) {
    switch (t) {
        case Trit::Zero: return "0";
        case Trit::One: return "1";
        case Trit::Two: return "2";
        default: return "u";
    }
}

const char* to_string(Role r) {
    switch (r) {
        case Role::Sender: return "S";
        case Role::Receiver0: return "R0";
        default: return "R1";
    }
}

const char* to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::Honest: return "honest";
        case StrategyKind::Shift: return "shift";
        case StrategyKind::SenderEquivocate: return "sender-equivocate";
        case StrategyKind::SenderForge: return "sender-forge";
        case StrategyKind::ReceiverLie: return "receiver-lie";
        case StrategyKind::FlagSpoil: return "flag-spoil";
        default: return "hide-zeros";
    }
}

Strategy traitor_strategy_shift(double lambda, Role traitor) {
    Strategy s;
    s.traitor = traitor;
    s.lambda = lambda;
    s.kind = lambda == 1 ? StrategyKind::Honest : StrategyKind::Shift;
    return s;
}

Vec shifted_displacement(double x0, const Strategy& st) {
    Vec d = TripartiteResource::displacement(x0);
    if (st.kind == StrategyKind::Shift) d(2 * static_cast<int>(st.traitor)) *= st.lambda;
    return d;
}

bool ProtocolTranscript::contradictory() const { return verdict == Verdict::Inconsistent; }

nlohmann::json ProtocolTranscript::to_json() const {
    nlohmann::json j;
    auto msgs = nlohmann::json::array();
    for (const auto& m : log)
        msgs.push_back({{"round", m.round}, {"from", m.from}, {"to", m.to}, {"kind", m.kind}, {"size", m.size}});
    j["log"] = msgs;
    auto ps = nlohmann::json::array();
    for (const auto& p : parties)
        ps.push_back({{"role", to_string(p.role)},
                      {"honest", p.honest},
                      {"aborted", p.aborted},
                      {"decision", p.decision},
                      {"reason", p.reason}});
    j["parties"] = ps;
    j["verdict"] = verdict == Verdict::Agreement ? "agreement" : verdict == Verdict::Abort ? "abort" : "inconsistent";
    j["bit"] = agreed_bit;
    j["abort_reason"] = abort_reason;
    j["control_counts"] = observed_counts;
    return j;
}

// ---------------------------------------------------------------------------
// protocol engine

namespace {

using Index = std::vector<int>;

// probability table of trit triples (S, R0, R1) built from two independent systems
using TritTable = std::array<std::array<std::array<double, 4>, 4>, 4>;

TritTable trit_table(const Patterns& P) {
    TritTable t{};
    for (int p = 0; p < 8; ++p)
        for (int q = 0; q < 8; ++q) {
            int tr[3];
            for (int k = 0; k < 3; ++k) tr[k] = static_cast<int>(trit_encode(bit_of(p, k), bit_of(q, k)));
            t[tr[0]][tr[1]][tr[2]] += P[p] * P[q];
        }
    return t;
}

// one-sided counting bound: count exceeds n*e by more than z standard errors
bool excess(std::int64_t count, std::int64_t n, double e, double z) {
    double var = std::max(n * e * (1 - e), 1.0);
    return count > n * e + z * std::sqrt(var);
}

bool outside(std::int64_t count, std::int64_t n, double e, double z) {
    double var = std::max(n * e * (1 - e), 1.0);
    return std::abs(count - n * e) > z * std::sqrt(var);
}

class Engine {
public:
    Engine(const TripartiteResource& res, const ProtocolConfig& cfg, const Strategy& st)
        : res_(res), cfg_(cfg), st_(st), rng_(cfg.seed) {
        honest_ = pattern_probs(res, cfg.x0, cfg.sigma, cfg.delta, TripartiteResource::displacement(cfg.x0));
        shifted_ = pattern_probs(res, cfg.x0, cfg.sigma, cfg.delta, shifted_displacement(cfg.x0, st));
        trits_ = trit_table(honest_);
        traitor_ = st.kind == StrategyKind::Honest ? -1 : static_cast<int>(st.traitor);
        for (int k = 0; k < 3; ++k) {
            tr_.parties[k].role = static_cast<Role>(k);
            tr_.parties[k].honest = k != traitor_;
        }
    }

    ProtocolTranscript run();

private:
    const TripartiteResource& res_;
    ProtocolConfig cfg_;
    Strategy st_;
    Rng rng_;
    Patterns honest_{}, shifted_{};
    TritTable trits_{};
    int traitor_ = -1;
    ProtocolTranscript tr_;
    int round_ = 0;

    std::vector<int> pattern_;     // sampled outcome pattern per system
    std::vector<int> holder_;      // who measures the traitor's mode (-1 when its owner does)
    std::vector<bool> hit_[3];     // announced hits

    bool honest(int k) const { return k != traitor_; }
    int bit(int sys, int party) const { return bit_of(pattern_[sys], party); }

    void send(int from, int to, const std::string& kind, std::int64_t size) {
        tr_.log.push_back({round_, to_string(static_cast<Role>(from)), to_string(static_cast<Role>(to)), kind, size});
    }

    void abort_party(int k, const std::string& why) {
        auto& p = tr_.parties[k];
        if (p.aborted) return;
        p.aborted = true;
        p.reason = why;
    }

    bool any_honest_aborted() const {
        for (int k = 0; k < 3; ++k)
            if (honest(k) && tr_.parties[k].aborted) return true;
        return false;
    }

    // an honest party that aborts tells the others; honest parties always relay
    void propagate_abort() {
        ++round_;
        for (int k = 0; k < 3; ++k) {
            if (!honest(k) || !tr_.parties[k].aborted) continue;
            for (int j = 0; j < 3; ++j) {
                if (j == k) continue;
                send(k, j, "abort", 0);
                if (honest(j)) abort_party(j, "abort relayed from " + std::string(to_string(static_cast<Role>(k))));
            }
        }
    }

    Index take(Index& pool, std::int64_t count) {
        count = std::min<std::int64_t>(count, static_cast<std::int64_t>(pool.size()));
        Index out(pool.end() - count, pool.end());
        pool.resize(pool.size() - count);
        std::sort(out.begin(), out.end());
        return out;
    }

    bool check_patterns(const Index& sys, const std::vector<int>& observed_pattern) {
        std::array<std::int64_t, 8> cnt{};
        for (std::size_t i = 0; i < sys.size(); ++i) ++cnt[observed_pattern[i]];
        const std::int64_t n = static_cast<std::int64_t>(sys.size());
        for (int p = 0; p < 8; ++p) {
            tr_.observed_counts[p] += cnt[p];
            if (consistent_pattern(p) ? outside(cnt[p], n, honest_[p], cfg_.z) : excess(cnt[p], n, honest_[p], cfg_.z))
                return false;
        }
        return true;
    }

    void flag_round(const std::array<bool, 3>& pass, const std::string& tag);
    void distribution(Index& pool, Index& mhat);
    void broadcast_phase(const Index& W);
};

void Engine::flag_round(const std::array<bool, 3>& pass, const std::string& tag) {
    // direct round then a relay round, so a flag split by a traitor is seen by both honest parties
    std::array<std::array<int, 3>, 3> seen{};  // seen[receiver][origin]
    ++round_;
    for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j) {
            if (j == k) continue;
            int f = (pass[k] || !honest(k)) ? 1 : 0;
            if (!honest(k) && st_.kind == StrategyKind::FlagSpoil) f = j == (k + 1) % 3 ? 0 : 1;
            seen[j][k] = f;
            send(k, j, tag + "-flag", f);
        }
    ++round_;
    std::array<bool, 3> ok{true, true, true};
    for (int k = 0; k < 3; ++k) {
        if (!pass[k]) ok[k] = false;
        for (int j = 0; j < 3; ++j)
            if (j != k && !seen[k][j]) ok[k] = false;
    }
    for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 3; ++j) {
            if (j == k) continue;
            int third = 3 - j - k;
            send(k, j, tag + "-relay", seen[k][third]);
            if (!seen[k][third]) ok[j] = false;
        }
    for (int k = 0; k < 3; ++k)
        if (honest(k) && !ok[k]) abort_party(k, tag + ": failure flag received");
    propagate_abort();
}

void Engine::distribution(Index& pool, Index& mhat) {
    const int M = cfg_.M_states;
    const auto frac = static_cast<std::int64_t>(std::llround(cfg_.test_fraction * M));
    // i-1: R1 prepares and distributes
    ++round_;
    send(2, 0, "subsystems", M);
    send(2, 1, "subsystems", M);

    std::shuffle(pool.begin(), pool.end(), rng_);
    // i-2: K sets, S sends its modes on K_S to R0 and R0 sends its modes on K_R0 to S
    Index K_S = take(pool, frac), K_R0 = take(pool, frac);
    // ii-2: L^P_Q, party P hands its modes to Q
    Index L[3][3];
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q)
            if (p != q) L[p][q] = take(pool, frac);

    holder_.assign(M, -1);
    if (traitor_ >= 0) {
        if (traitor_ == 0)
            for (int s : K_S) holder_[s] = 1;
        if (traitor_ == 1)
            for (int s : K_R0) holder_[s] = 0;
        for (int q = 0; q < 3; ++q)
            if (q != traitor_)
                for (int s : L[traitor_][q]) holder_[s] = q;
    }
    // measurement: the traitor's shift only acts on modes it measures itself
    pattern_.resize(M);
    std::discrete_distribution<int> dh(honest_.begin(), honest_.end()), ds(shifted_.begin(), shifted_.end());
    for (int s = 0; s < M; ++s) {
        bool shifted = traitor_ >= 0 && st_.kind == StrategyKind::Shift && holder_[s] < 0;
        pattern_[s] = shifted ? ds(rng_) : dh(rng_);
    }

    ++round_;
    send(0, 1, "K-subsystems", static_cast<std::int64_t>(K_S.size()));
    send(1, 0, "K-subsystems", static_cast<std::int64_t>(K_R0.size()));
    if (static_cast<int>(K_S.size()) < cfg_.min_test || static_cast<int>(L[0][1].size()) < cfg_.min_test) {
        for (int k = 0; k < 3; ++k)
            if (honest(k)) abort_party(k, "insufficient samples for statistical tests");
        tr_.abort_reason = "insufficient samples";
        return;
    }
    ++round_;
    send(2, 1, "K-results", static_cast<std::int64_t>(K_S.size()));
    send(2, 0, "K-results", static_cast<std::int64_t>(K_R0.size()));
    std::array<bool, 3> pass{true, true, true};
    auto obs = [&](const Index& sys) {
        std::vector<int> v(sys.size());
        for (std::size_t i = 0; i < sys.size(); ++i) v[i] = pattern_[sys[i]];
        return v;
    };
    pass[1] = check_patterns(K_S, obs(K_S));
    pass[0] = check_patterns(K_R0, obs(K_R0));
    flag_round(pass, "i-3");
    if (any_honest_aborted()) {
        tr_.abort_reason = "distribution test";
        return;
    }

    // ii-3: hit announcements; everything measured here is a post-selected coincidence
    ++round_;
    for (int k = 0; k < 3; ++k) hit_[k].assign(M, false);
    for (int k = 0; k < 3; ++k) {
        std::int64_t hits = 0;
        for (int s = 0; s < M; ++s) {
            bool own = true;
            for (int p = 0; p < 3; ++p)
                for (int q = 0; q < 3; ++q)
                    if (p == k && q != k && std::binary_search(L[p][q].begin(), L[p][q].end(), s)) own = false;
            if (!own) continue;
            bool h = true;
            if (!honest(k) && st_.kind == StrategyKind::HideZeros && bit(s, k) == 0) h = false;
            hit_[k][s] = h;
            hits += h;
        }
        for (int j = 0; j < 3; ++j)
            if (j != k) send(k, j, "hits", hits);
    }

    // ii-4: Q checks the pair (own, P) on U = L^P_Q intersected with the third party's hits
    pass = {true, true, true};
    for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
            if (p == q) continue;
            int t = 3 - p - q;
            std::array<std::int64_t, 4> cnt{};
            std::array<double, 4> e{};
            for (int pat = 0; pat < 8; ++pat) e[2 * bit_of(pat, q) + bit_of(pat, p)] += honest_[pat];
            std::int64_t n = 0;
            for (int s : L[p][q]) {
                if (!hit_[t][s]) continue;
                ++cnt[2 * bit(s, q) + bit(s, p)];
                ++n;
            }
            if (n < cfg_.min_test) {
                pass[q] = false;
                continue;
            }
            for (int c = 0; c < 4; ++c) {
                bool bad = e[c] > 0.05 ? outside(cnt[c], n, e[c], cfg_.z) : excess(cnt[c], n, e[c], cfg_.z);
                if (bad) pass[q] = false;
            }
        }

    // M-hat: remaining systems announced by everybody
    for (int s : pool)
        if (hit_[0][s] && hit_[1][s] && hit_[2][s]) mhat.push_back(s);
    std::sort(mhat.begin(), mhat.end());

    // ii-5: own-bit frequency on M-hat
    for (int k = 0; k < 3; ++k) {
        double e0 = 0;
        for (int pat = 0; pat < 8; ++pat)
            if (bit_of(pat, k) == 0) e0 += honest_[pat];
        std::int64_t zeros = 0;
        for (int s : mhat) zeros += bit(s, k) == 0;
        if (static_cast<int>(mhat.size()) < cfg_.min_test ||
            outside(zeros, static_cast<std::int64_t>(mhat.size()), e0, cfg_.z))
            pass[k] = false;
    }

    // ii-6: each party picks V^P in M-hat and collects the other results there
    ++round_;
    Index rest = mhat;
    std::shuffle(rest.begin(), rest.end(), rng_);
    const auto vfrac = static_cast<std::int64_t>(std::llround(cfg_.test_fraction * mhat.size()));
    Index V[3];
    for (int k = 0; k < 3; ++k) {
        V[k] = take(rest, vfrac);
        for (int j = 0; j < 3; ++j)
            if (j != k) {
                send(k, j, "V-request", static_cast<std::int64_t>(V[k].size()));
                send(j, k, "V-results", static_cast<std::int64_t>(V[k].size()));
            }
        if (static_cast<int>(V[k].size()) < cfg_.min_test || !check_patterns(V[k], obs(V[k]))) pass[k] = false;
    }
    // ii-7
    flag_round(pass, "ii-7");
    if (any_honest_aborted()) {
        tr_.abort_reason = "distribution test";
        return;
    }
    std::sort(rest.begin(), rest.end());
    mhat = rest;
    if (mhat.size() % 2) mhat.pop_back();
}

void Engine::broadcast_phase(const Index& W) {
    const std::size_t nt = W.size() / 2;
    std::vector<int> trit[3];
    for (int k = 0; k < 3; ++k) {
        trit[k].resize(nt);
        for (std::size_t j = 0; j < nt; ++j)
            trit[k][j] = static_cast<int>(trit_encode(bit(W[2 * j], k), bit(W[2 * j + 1], k)));
    }
    // expectations from the honest model
    auto P3 = [&](int s, int r0, int r1) { return trits_[s][r0][r1]; };
    double pS[4] = {0, 0, 0, 0};
    for (int s = 0; s < 4; ++s)
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b) pS[s] += P3(s, a, b);
    // conflict rate: receiver holds the announced trit value on J
    auto conflict_rate = [&](int bval, int recv) {
        double num = 0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                if ((recv == 1 ? a : b) == bval) num += P3(bval, a, b);
        return num / pS[bval];
    };

    ++round_;
    const int b = cfg_.bit;
    int bsent[3] = {b, b, b};
    std::vector<int> J[3];
    auto honest_J = [&](int v) {
        std::vector<int> out;
        for (std::size_t j = 0; j < nt; ++j)
            if (trit[0][j] == v) out.push_back(static_cast<int>(j));
        return out;
    };
    J[1] = honest_J(b);
    J[2] = honest_J(b);
    if (traitor_ == 0 && (st_.kind == StrategyKind::SenderEquivocate || st_.kind == StrategyKind::SenderForge)) {
        bsent[2] = 1 - b;
        J[2] = honest_J(1 - b);
        if (st_.kind == StrategyKind::SenderForge) {
            std::vector<int> all(nt);
            std::iota(all.begin(), all.end(), 0);
            std::shuffle(all.begin(), all.end(), rng_);
            all.resize(std::min(all.size(), J[2].size()));
            std::sort(all.begin(), all.end());
            J[2] = all;
        }
    }
    for (int r = 1; r <= 2; ++r) {
        send(0, r, "order", bsent[r]);
        send(0, r, "index-set", static_cast<std::int64_t>(J[r].size()));
    }

    // iii-2: consistency of J_i with the receiver's own trits; -1 stands for the inconsistent flag
    int c[3] = {-1, -1, -1};
    for (int r = 1; r <= 2; ++r) {
        const int v = bsent[r];
        const auto n = static_cast<std::int64_t>(J[r].size());
        std::int64_t conflicts = 0;
        for (int j : J[r]) conflicts += trit[r][j] == v;
        bool size_ok = !outside(n, static_cast<std::int64_t>(nt), pS[v], cfg_.z);
        bool ok = size_ok && n >= cfg_.min_test && !excess(conflicts, n, conflict_rate(v, r), cfg_.z);
        c[r] = ok ? v : -1;
    }
    // iii-3: receivers swap flags
    ++round_;
    int told[3] = {0, c[1], c[2]};
    if (traitor_ == 1 && st_.kind == StrategyKind::ReceiverLie) told[1] = 1 - b;
    if (traitor_ == 2 && st_.kind == StrategyKind::ReceiverLie) told[2] = 1 - b;
    send(1, 2, "flag", told[1]);
    send(2, 1, "flag", told[2]);

    int decision[3] = {-1, -1, -1};
    for (int r = 1; r <= 2; ++r) {
        const int other = told[3 - r];
        if (c[r] >= 0 && c[r] == other) decision[r] = c[r];
        else if (c[r] < 0) decision[r] = other >= 0 ? other : 0;  // iii-4; both inconsistent falls back to 0
        else if (other < 0) decision[r] = c[r];
    }
    // iii-5: flags differ, R1 asks R0 to prove its flag
    if (decision[1] < 0 && decision[2] < 0 && c[1] >= 0 && c[2] >= 0) decision[1] = c[1];
    if (decision[2] < 0 && c[2] >= 0 && told[1] >= 0 && told[1] != c[2]) {
        const int c0 = told[1];
        std::vector<int> K;
        if (traitor_ == 1 && st_.kind == StrategyKind::ReceiverLie) {
            // best forgery available: R0's own trits equal to the true order
            for (std::size_t j = 0; j < nt; ++j)
                if (trit[1][j] == 1 - c0) K.push_back(static_cast<int>(j));
            std::shuffle(K.begin(), K.end(), rng_);
            K.resize(std::min<std::size_t>(K.size(), J[2].size() / 2 + 1));
            std::sort(K.begin(), K.end());
        } else {
            for (int j : J[1])
                if (trit[1][j] == 1 - c0) K.push_back(j);
        }
        ++round_;
        send(2, 1, "proof-request", 0);
        send(1, 2, "proof", static_cast<std::int64_t>(K.size()));
        // expected size and violation rate of an honest proof
        double pk = 0, bad = 0;
        for (int b2 = 0; b2 < 4; ++b2) {
            pk += P3(c0, 1 - c0, b2);
            if (b2 != 2) bad += P3(c0, 1 - c0, b2);
        }
        const double frac = pk / pS[c0];
        const double viol = pk > 0 ? bad / pk : 0;
        std::int64_t violations = 0;
        std::set<int> J1(J[2].begin(), J[2].end());
        for (int j : K) violations += (J1.count(j) > 0) || trit[2][j] != 2;
        const auto nk = static_cast<std::int64_t>(K.size());
        // R1 cannot see J0, so the size check uses the expected size of J0
        const double expect_k = frac * pS[c0] * nt;
        bool size_ok = nk >= cfg_.min_test && nk >= expect_k - cfg_.z * std::sqrt(std::max(expect_k, 1.0)) * 2;
        bool accepted = size_ok && !excess(violations, nk, viol, cfg_.z);
        decision[2] = accepted ? c0 : c[2];
    }
    if (decision[1] < 0) decision[1] = c[1] >= 0 ? c[1] : 0;
    if (decision[2] < 0) decision[2] = c[2] >= 0 ? c[2] : 0;
    for (int r = 1; r <= 2; ++r) tr_.parties[r].decision = decision[r];
}

ProtocolTranscript Engine::run() {
    if (cfg_.bit != 0 && cfg_.bit != 1) throw PreconditionError("run_protocol: bit must be 0 or 1");
    if (cfg_.M_states < 1) throw PreconditionError("run_protocol: M_states must be positive");
    Index pool(cfg_.M_states);
    std::iota(pool.begin(), pool.end(), 0);
    Index W;
    distribution(pool, W);
    if (!any_honest_aborted()) broadcast_phase(W);

    // verdict over the honest receivers
    std::vector<const PartyOutcome*> recv;
    for (int r = 1; r <= 2; ++r)
        if (honest(r)) recv.push_back(&tr_.parties[r]);
    bool all_abort = true, none_abort = true;
    for (auto* p : recv) {
        all_abort = all_abort && p->aborted;
        none_abort = none_abort && !p->aborted;
    }
    using V = ProtocolTranscript::Verdict;
    if (all_abort) {
        tr_.verdict = V::Abort;
    } else if (!none_abort) {
        tr_.verdict = V::Inconsistent;
    } else {
        int bitv = recv.front()->decision;
        bool same = true;
        for (auto* p : recv) same = same && p->decision == bitv;
        if (honest(0))
            for (auto* p : recv) same = same && p->decision == cfg_.bit;
        tr_.verdict = same ? V::Agreement : V::Inconsistent;
        tr_.agreed_bit = same ? bitv : -1;
    }
    if (tr_.verdict == V::Abort && tr_.abort_reason.empty()) tr_.abort_reason = "aborted";
    return tr_;
}

}  // namespace

ProtocolTranscript run_protocol(const TripartiteResource& res, const ProtocolConfig& cfg, const Strategy& strategy) {
    if (!(cfg.x0 > 0)) throw PreconditionError("run_protocol: x0 must be positive");
    Engine e(res, cfg, strategy);
    return e.run();
}

}  // namespace cvqit::broadcast
