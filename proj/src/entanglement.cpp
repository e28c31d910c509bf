#include "cvqit/entanglement.hpp"

#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <numeric>

namespace cvqit {

const char* to_string(TripartiteClass c) {
    switch (c) {
        case TripartiteClass::FullyInseparable: return "FullyInseparable";
        case TripartiteClass::OneModeBiseparable: return "OneModeBiseparable";
        case TripartiteClass::TwoModeBiseparable: return "TwoModeBiseparable";
        case TripartiteClass::BoundOrSeparable: return "BoundOrSeparable";
    }
    return "?";
}

std::vector<double> pt_spectrum(const GaussianState& s, const ModePartition& split) {
    if (split.subsets.empty()) throw PreconditionError("partial transpose needs a mode subset");
    split.validate(s.modes());
    Mat T = theta_on(s.modes(), split.subsets[0]);
    return symplectic_spectrum(T * s.gamma() * T);
}

bool is_nppt(const GaussianState& s, const ModePartition& split, double tol) {
    return pt_spectrum(s, split).back() < 1 - tol;
}

double log_negativity(const GaussianState& s, const ModePartition& split) {
    double e = 0;
    for (double m : pt_spectrum(s, split)) e -= std::log2(std::min(m, 1.0));
    return e;
}

double negativity(const GaussianState& s, const ModePartition& split) {
    double prod = 1;
    for (double m : pt_spectrum(s, split)) prod /= std::min(m, 1.0);
    return 0.5 * (prod - 1);
}

static double h_entropy(double mu) {
    double p = 0.5 * (mu + 1), m = 0.5 * (mu - 1);
    double v = p * std::log2(p);
    if (m > 1e-300) v -= m * std::log2(m);
    return v;
}

double entropy_of_entanglement(const GaussianState& s, const ModePartition& split) {
    double e = 0;
    for (double mu : schmidt_spectrum(s, split)) e += h_entropy(std::max(mu, 1.0));
    return e;
}

CriterionResult duan_test(const GaussianState& s, double a) {
    if (s.modes() != 2) throw DimensionError("duan_test needs two modes");
    if (a == 0) throw PreconditionError("duan_test: a must be nonzero");
    Vec u = Vec::Zero(4), v = Vec::Zero(4);
    u(0) = std::abs(a);
    u(2) = 1 / a;
    v(1) = std::abs(a);
    v(3) = -1 / a;
    CriterionResult r;
    r.lhs = variance(s, u) + variance(s, v);
    r.bound = a * a + 1 / (a * a);
    r.violated = r.lhs < r.bound - 1e-12;
    return r;
}

namespace {

struct SF2 {
    double n1, n2, m1, m2, c1, c2;
};

SF2 squeeze_sf1(const StandardFormParams& p, double u, double v) {
    double w = std::sqrt(u * v);
    return {p.lambda_a * u, p.lambda_a / u, p.lambda_b * v, p.lambda_b / v, p.c_x * w, p.c_p / w};
}

// positive root of the first standard-form-II condition, solved for v at given u
double solve_v(double la, double lb, double u) {
    double A = (la - u) * lb;
    double B = u * (la * u - 1) - (la - u);
    double C = -u * lb * (la * u - 1);
    if (std::abs(A) < 1e-14) return -C / B;
    // A > 0 and C < 0 inside the bracket, so exactly one root is positive
    double disc = std::sqrt(std::max(0.0, B * B - 4 * A * C));
    return (-B + disc) / (2 * A);
}

double eq2(const StandardFormParams& p, double u) {
    double v = solve_v(p.lambda_a, p.lambda_b, u);
    SF2 f = squeeze_sf1(p, u, v);
    return std::abs(f.c1) - std::abs(f.c2) - std::sqrt(std::max(0.0, (f.n1 - 1) * (f.m1 - 1))) +
           std::sqrt(std::max(0.0, (f.n2 - 1) * (f.m2 - 1)));
}

CriterionResult sf2_result(const SF2& f, double a0) {
    CriterionResult r;
    double a2 = a0 * a0;
    r.lhs = 0.5 * (a2 * (f.n1 + f.n2) + (f.m1 + f.m2) / a2) - std::abs(f.c1) - std::abs(f.c2);
    r.bound = a2 + 1 / a2;
    r.violated = r.lhs < r.bound - 1e-10;
    return r;
}

}  // namespace

DuanOptimal duan_optimal(const GaussianState& s) {
    StandardFormParams p = standard_form(s);
    DuanOptimal out;
    const double la = p.lambda_a, lb = p.lambda_b;
    if (la > 1 + 1e-9 && lb > 1 + 1e-9) {
        double lo = 1 / la, hi = la;
        const int grid = 400;
        double prev_u = 0, prev_f = 0;
        bool found = false;
        for (int i = 1; i < grid && !found; ++i) {
            double u = lo * std::pow(hi / lo, double(i) / grid);
            double v = solve_v(la, lb, u);
            if (!(v > 1 / lb && v < lb)) {
                prev_u = 0;
                continue;
            }
            double fv = eq2(p, u);
            if (prev_u > 0 && (fv == 0 || (fv > 0) != (prev_f > 0))) {
                double a = prev_u, b = u, fa = prev_f;
                for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
                    double m = 0.5 * (a + b);
                    double fm = eq2(p, m);
                    if ((fm > 0) == (fa > 0)) {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                }
                double u0 = 0.5 * (a + b);
                SF2 f = squeeze_sf1(p, u0, solve_v(la, lb, u0));
                double a0 = std::pow((f.m1 - 1) / (f.n1 - 1), 0.25);
                out.a0 = a0;
                out.result = sf2_result(f, a0);
                found = true;
            }
            prev_u = u;
            prev_f = fv;
        }
        if (found) return out;
    }
    // fallback: scan a with sign-adapted operators on standard form I
    out.closed_form = false;
    SF2 f = squeeze_sf1(p, 1, 1);
    auto gap = [&](double la0) {
        CriterionResult r = sf2_result(f, std::exp(la0));
        return r.lhs - r.bound;
    };
    auto best = boost::math::tools::brent_find_minima(gap, std::log(1e-3), std::log(1e3), 40);
    out.a0 = std::exp(best.first);
    out.result = sf2_result(f, out.a0);
    return out;
}

TripartiteClass classify_tripartite(const GaussianState& s) {
    if (s.modes() != 3) throw DimensionError("classify_tripartite needs three modes");
    int count = 0;
    for (int k = 0; k < 3; ++k) {
        Modes rest = complement(3, {k});
        if (is_nppt(s, ModePartition::split({k}, rest))) ++count;
    }
    switch (count) {
        case 3: return TripartiteClass::FullyInseparable;
        case 2: return TripartiteClass::OneModeBiseparable;
        case 1: return TripartiteClass::TwoModeBiseparable;
        default: return TripartiteClass::BoundOrSeparable;
    }
}

CriterionResult van_loock_furusawa(const GaussianState& s, const std::vector<double>& h,
                                   const std::vector<double>& g, const ModePartition& split, double tol) {
    const int n = s.modes();
    if (static_cast<int>(h.size()) != n || static_cast<int>(g.size()) != n)
        throw DimensionError("van_loock_furusawa: coefficient length");
    if (split.subsets.size() != 2 || split.subsets[0].empty() || split.subsets[1].empty())
        throw PreconditionError("van_loock_furusawa: need a two-sided bipartition");
    split.validate(n);
    if (split.subsets[0].size() + split.subsets[1].size() != static_cast<size_t>(n))
        throw PreconditionError("van_loock_furusawa: bipartition must cover all modes");
    Vec y = Vec::Zero(2 * n), z = Vec::Zero(2 * n);
    for (int i = 0; i < n; ++i) {
        y(2 * i) = h[i];
        z(2 * i + 1) = g[i];
    }
    CriterionResult r;
    r.lhs = variance(s, y) + variance(s, z);
    for (const auto& side : split.subsets) {
        double acc = 0;
        for (int i : side) acc += h[i] * g[i];
        r.bound += std::abs(acc);
    }
    r.violated = r.lhs < r.bound - tol;
    return r;
}

}  // namespace cvqit
