#include "cvqit/qkd.hpp"

#include "cvqit/entanglement.hpp"
#include "cvqit/parallel.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

namespace cvqit::qkd {

QkdState QkdState::tms(double r) { return {std::cosh(2 * r), std::sinh(2 * r), std::sinh(2 * r)}; }

GaussianState QkdState::gaussian() const {
    return StandardFormParams{lambda, lambda, c_x, -c_p}.state();
}

bool QkdState::physical(double tol) const {
    return c_x >= std::abs(c_p) - tol && (lambda - c_x) * (lambda + c_p) >= 1 - tol;
}

bool QkdState::nppt() const { return (lambda - c_x) * (lambda - c_p) < 1; }

double QkdState::log_negativity() const {
    double v = (lambda - c_x) * (lambda - c_p);
    return v < 1 ? std::log2(1 / std::sqrt(v)) : 0.0;
}

static double ldet(const QkdState& st) {
    double L = st.lambda * st.lambda - st.c_x * st.c_x;
    if (L <= 0) throw NumericError("singular state: lambda^2 = c_x^2");
    return L;
}

JointProbabilities joint_probabilities(const QkdState& st, double x0a, double x0b, double sigma) {
    if (!(sigma > 0)) throw PreconditionError("joint_probabilities: sigma must be positive");
    const double l = st.lambda, s2 = sigma * sigma;
    const double den = (l + s2) * (l + s2) - st.c_x * st.c_x;
    JointProbabilities jp;
    jp.K = 4 * s2 / (std::sqrt(den) * std::sqrt((l * s2 + 1) * (l * s2 + 1) - st.c_p * st.c_p * s2 * s2));
    const double ab = std::abs(x0a) * std::abs(x0b), sq = x0a * x0a + x0b * x0b;
    jp.p_same = jp.K * std::exp((2 * ab * st.c_x - (l + s2) * sq) / den);
    jp.p_diff = jp.K * std::exp((-2 * ab * st.c_x - (l + s2) * sq) / den);
    return jp;
}

double error_probability(const QkdState& st, double x0a, double x0b) {
    const double L = ldet(st);
    return 1 / (1 + std::exp(4 * st.c_x * std::abs(x0a) * std::abs(x0b) / L));
}

double eve_overlap(const QkdState& st, double x0a, double x0b) {
    const double L = ldet(st);
    const double s = 0.5 * (x0a * x0a + x0b * x0b), p = std::abs(x0a) * std::abs(x0b);
    return std::exp(-4 / L * (s * (L - 1) * st.lambda + p * (st.c_x - st.c_p * L)));
}

double security_margin(const QkdState& st, double x0a, double x0b, Attack attack) {
    const double L = ldet(st);
    const double s = 0.5 * (x0a * x0a + x0b * x0b), p = std::abs(x0a) * std::abs(x0b);
    const double m = attack == Attack::Individual ? st.c_x + st.c_p * L : st.c_p * L;
    return s * (L - 1) * st.lambda - p * m;
}

bool security_ok(const QkdState& st, double x0a, double x0b, Attack attack) {
    const double eps = error_probability(st, x0a, x0b);
    const double ov2 = eve_overlap(st, x0a, x0b);
    const double ratio = eps / (1 - eps);
    return attack == Attack::Individual ? ratio < std::sqrt(ov2) : ratio < ov2;
}

Interval acceptance_interval(const QkdState& st, double x0a, Attack attack) {
    const double L = ldet(st);
    const double k = st.lambda * (L - 1);
    const double m = attack == Attack::Individual ? st.c_x + st.c_p * L : st.c_p * L;
    const double ax = std::abs(x0a);
    Interval iv;
    if (k <= 1e-13 * std::max(1.0, st.lambda) && m > 0) {
        iv.alpha_or_beta = 1;
        iv.unbounded = true;
        iv.lo = -ax;
        iv.hi = std::numeric_limits<double>::infinity();
        iv.D = std::numeric_limits<double>::infinity();
        return iv;
    }
    if (m - k <= 0) throw UnphysicalError("acceptance_interval: parameter below 1, no secure window");
    const double al = (m + k) / (m - k);
    const double r = std::sqrt(al);
    iv.alpha_or_beta = al;
    iv.lo = -2 / (r + 1) * ax;
    iv.hi = 2 / (r - 1) * ax;
    iv.D = 4 * r / (al - 1) * ax;
    return iv;
}

double cad_error(double eps, int M) {
    if (eps < 0 || eps >= 0.5) throw PreconditionError("cad_error: need 0 <= eps < 1/2");
    if (M < 1) throw PreconditionError("cad_error: M must be positive");
    if (eps == 0) return 0;
    // ratio form avoids underflow of both powers
    double q = std::pow(eps / (1 - eps), M);
    return q / (1 + q);
}

double efficiency_window(const QkdState& st, double t_lo, double t_hi, const QuadConfig& cfg) {
    const double L = ldet(st), l = st.lambda, c = st.c_x;
    if (!(t_hi > t_lo)) return 0;
    const double s = std::sqrt(l / L);
    const double pref = 2 / (M_PI * std::sqrt(L)) * 0.5 * std::sqrt(M_PI * L / l);
    auto inner = [&](double u) {
        double centre = c * u / l;
        double hi = std::isinf(t_hi) ? 1.0 : std::erf(s * (t_hi * u - centre));
        double lo = std::erf(s * (t_lo * u - centre));
        return pref * std::exp(-u * u / l) * (hi - lo);
    };
    double err = 0;
    const double cut = cfg.cutoff_sigmas * std::sqrt(l);
    double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(inner, 0.0, cut, 20, cfg.tol, &err);
    if (!(err <= 1e-6 * std::max(1e-300, std::abs(v)) + 1e-12))
        throw NumericError("efficiency: quadrature did not converge, estimate " + std::to_string(v));
    return v;
}

double efficiency(const QkdState& st, Attack attack, const QuadConfig& cfg) {
    if (!st.nppt()) return 0;
    Interval iv;
    try {
        iv = acceptance_interval(st, 1.0, attack);
    } catch (const UnphysicalError&) {
        return 0;
    }
    // window on x0B/x0A, with the interval on x0B - x0A scaled by cfg.shrink
    double t_lo = 1 + iv.lo * cfg.shrink;
    double t_hi = iv.unbounded ? std::numeric_limits<double>::infinity() : 1 + iv.hi * cfg.shrink;
    return efficiency_window(st, std::max(0.0, t_lo), t_hi, cfg);
}

KeyRunResult simulate_key_run(const QkdState& st, const KeyRunConfig& cfg) {
    if (!st.physical(1e-9)) throw UnphysicalError("simulate_key_run: unphysical state");
    double t_lo = 0, t_hi = -1;
    bool any = true;
    try {
        Interval iv = acceptance_interval(st, 1.0, cfg.attack);
        t_lo = std::max(0.0, 1 + iv.lo);
        t_hi = iv.unbounded ? std::numeric_limits<double>::infinity() : 1 + iv.hi;
    } catch (const UnphysicalError&) {
        any = false;
    }
    if (!st.nppt()) {
        // no secure window exists; accept every pair so the run still reports raw statistics
        any = true;
        t_lo = 0;
        t_hi = std::numeric_limits<double>::infinity();
    }
    const int chunks = 64;
    struct Part {
        std::vector<std::uint8_t> a, b;
        double pred = 0;
        std::int64_t err = 0;
    };
    std::vector<Part> parts(chunks);
    const double ga = std::sqrt(st.lambda / 2);
    const double gb = st.c_x / 2 / ga;
    const double gc = std::sqrt(std::max(0.0, st.lambda / 2 - gb * gb));
    parallel_for(chunks, [&](int ci) {
        Rng rng = stream_rng(cfg.seed, static_cast<std::uint64_t>(ci));
        std::normal_distribution<double> nd;
        std::int64_t n = cfg.samples / chunks + (ci < cfg.samples % chunks ? 1 : 0);
        Part& P = parts[ci];
        for (std::int64_t i = 0; i < n; ++i) {
            double z1 = nd(rng), z2 = nd(rng);
            double xa = ga * z1, xb = gb * z1 + gc * z2;
            if (cfg.sigma > 0) {
                xa += cfg.sigma * nd(rng);
                xb += cfg.sigma * nd(rng);
            }
            if (!any || std::abs(xa) < cfg.x0a || xa == 0) continue;
            double t = std::abs(xb) / std::abs(xa);
            if (t < t_lo || t > t_hi) continue;
            std::uint8_t ba = xa < 0, bb = xb < 0;
            P.a.push_back(ba);
            P.b.push_back(bb);
            P.err += ba != bb;
            P.pred += error_probability(st, xa, xb);
        }
    });
    KeyRunResult out;
    std::int64_t errs = 0;
    double pred = 0;
    for (auto& P : parts) {
        out.raw_bits_A.insert(out.raw_bits_A.end(), P.a.begin(), P.a.end());
        out.raw_bits_B.insert(out.raw_bits_B.end(), P.b.begin(), P.b.end());
        errs += P.err;
        pred += P.pred;
    }
    out.accepted = static_cast<std::int64_t>(out.raw_bits_A.size());
    out.accepted_fraction = cfg.samples ? double(out.accepted) / double(cfg.samples) : 0;
    if (out.accepted) {
        out.empirical_eps = double(errs) / double(out.accepted);
        out.predicted_eps = pred / double(out.accepted);
        if (out.empirical_eps < 0.5) out.cad_eps = cad_error(out.empirical_eps, cfg.M);
        else out.cad_eps = 0.5;
    }
    return out;
}

std::vector<QkdState> random_nppt_states(int count, double lambda, std::uint64_t seed) {
    Rng rng(seed);
    std::uniform_real_distribution<double> ux(0, lambda), up(-1, 1);
    std::vector<QkdState> out;
    while (static_cast<int>(out.size()) < count) {
        double cx = ux(rng);
        double cp = up(rng) * cx;
        QkdState st{lambda, cx, cp};
        if (st.physical(0) && st.nppt()) out.push_back(st);
    }
    return out;
}

}  // namespace cvqit::qkd
