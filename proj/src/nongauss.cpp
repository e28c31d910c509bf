#include "cvqit/nongauss.hpp"

#include "cvqit/entanglement.hpp"
#include "cvqit/ops.hpp"
#include "cvqit/parallel.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <functional>
#include <numeric>
#include <cmath>
#include <unordered_map>

namespace cvqit {

namespace {

const double kSqrt2 = std::sqrt(2.0);
constexpr int kMaxFockDim = 10;

void add_into(Poly& dst, const Poly& src, cplx f = 1.0) {
    for (const auto& [k, c] : src) {
        cplx& v = dst[k];
        v += f * c;
    }
}

void prune(Poly& p) {
    double mx = 0;
    for (const auto& kv : p) mx = std::max(mx, std::abs(kv.second));
    for (auto it = p.begin(); it != p.end();)
        if (std::abs(it->second) <= 1e-300 || std::abs(it->second) < 1e-15 * mx * 1e-3) it = p.erase(it);
        else ++it;
}

// p * (sum_j lin[j] z_j + c0)
Poly mul_linear(const Poly& p, const std::vector<cplx>& lin, cplx c0) {
    Poly out;
    for (const auto& [k, c] : p) {
        if (c0 != 0.0) out[k] += c * c0;
        for (std::size_t j = 0; j < lin.size(); ++j) {
            if (lin[j] == 0.0) continue;
            MultiIndex kk = k;
            ++kk[j];
            out[kk] += c * lin[j];
        }
    }
    return out;
}

Poly derivative(const Poly& p, int j) {
    Poly out;
    for (const auto& [k, c] : p) {
        if (k[j] == 0) continue;
        MultiIndex kk = k;
        --kk[j];
        out[kk] += c * double(k[j]);
    }
    return out;
}

// moments of N(mean, cov) by the recursion E[z_j z^k] = m_j E[z^k] + sum_i cov_ji k_i E[z^{k-e_i}]
class PlainMoments {
public:
    PlainMoments(Vec mean, Mat cov) : m_(std::move(mean)), S_(std::move(cov)) {}

    double operator()(MultiIndex k) {
        int deg = 0;
        for (int v : k) deg += v;
        if (deg == 0) return 1;
        bool centred = m_.cwiseAbs().maxCoeff() == 0;
        if (centred && deg % 2) return 0;
        auto it = memo_.find(k);
        if (it != memo_.end()) return it->second;
        int j = 0;
        while (k[j] == 0) ++j;
        MultiIndex kp = k;
        --kp[j];
        double r = m_(j) != 0 ? m_(j) * (*this)(kp) : 0.0;
        for (std::size_t i = 0; i < kp.size(); ++i) {
            if (kp[i] == 0 || S_(j, i) == 0) continue;
            MultiIndex kk = kp;
            --kk[i];
            r += S_(j, i) * kp[i] * (*this)(kk);
        }
        memo_[k] = r;
        return r;
    }

private:
    Vec m_;
    Mat S_;
    std::map<MultiIndex, double> memo_;
};

Mat condition_on_zero(const Mat& S, int s) {
    Mat out = S - S.col(s) * S.row(s) / S(s, s);
    out.row(s).setZero();
    out.col(s).setZero();
    return out;
}

// E[z^k sgn(u.z) sgn(v.z)] for a centred Gaussian, by Stein's identity; the derivative of a
// sign produces 2 delta, which conditions the remaining variables on that linear form = 0
class SignedMoments {
public:
    SignedMoments(const Mat& cov, const Vec& u, const Vec& v) : D_(static_cast<int>(cov.rows())) {
        Mat S(D_ + 2, D_ + 2);
        S.topLeftCorner(D_, D_) = cov;
        S.block(0, D_, D_, 1) = cov * u;
        S.block(0, D_ + 1, D_, 1) = cov * v;
        S.block(D_, 0, 1, D_) = (cov * u).transpose();
        S.block(D_ + 1, 0, 1, D_) = (cov * v).transpose();
        S(D_, D_) = u.dot(cov * u);
        S(D_ + 1, D_ + 1) = v.dot(cov * v);
        S(D_, D_ + 1) = S(D_ + 1, D_) = u.dot(cov * v);
        if (!(S(D_, D_) > 0) || !(S(D_ + 1, D_ + 1) > 0))
            throw NumericError("sign_binned_E: degenerate quadrature variance");
        sig_[3] = S;
        sig_[2] = condition_on_zero(S, D_);
        sig_[1] = condition_on_zero(S, D_ + 1);
        sig_[0] = condition_on_zero(sig_[2], D_ + 1);
    }

    double operator()(MultiIndex& k, int mask) {
        int deg = 0;
        for (int v : k) deg += v;
        int nsign = (mask & 1) + ((mask >> 1) & 1);
        if ((deg + nsign) % 2) return 0;
        const Mat& S = sig_[mask];
        if (deg == 0) {
            if (mask == 0) return 1;
            if (mask != 3) return 0;
            double rho = S(D_, D_ + 1) / std::sqrt(S(D_, D_) * S(D_ + 1, D_ + 1));
            return 2 / M_PI * std::asin(std::clamp(rho, -1.0, 1.0));
        }
        std::uint64_t key = static_cast<std::uint64_t>(mask);
        for (int v : k) key = key * 64 + static_cast<std::uint64_t>(v);
        auto it = memo_.find(key);
        if (it != memo_.end()) return it->second;
        int j = 0;
        while (k[j] == 0) ++j;
        --k[j];
        double r = 0;
        for (int i = 0; i < D_; ++i) {
            if (k[i] == 0 || S(j, i) == 0) continue;
            const int ki = k[i];
            --k[i];
            r += S(j, i) * ki * (*this)(k, mask);
            ++k[i];
        }
        for (int s = 0; s < 2; ++s) {
            if (!(mask >> s & 1)) continue;
            const int idx = D_ + s;
            if (S(j, idx) == 0) continue;
            r += S(j, idx) * 2 / std::sqrt(2 * M_PI * S(idx, idx)) * (*this)(k, mask & ~(1 << s));
        }
        ++k[j];
        memo_[key] = r;
        return r;
    }

private:
    int D_;
    std::array<Mat, 4> sig_;
    std::unordered_map<std::uint64_t, double> memo_;
};

}  // namespace

WignerPoly WignerPoly::gaussian(const GaussianState& s) {
    WignerPoly w(s.modes());
    Poly p;
    p[MultiIndex(2 * s.modes(), 0)] = 1.0;
    w.add_term(s, p);
    return w;
}

void WignerPoly::add_term(const GaussianState& kernel, Poly poly) {
    if (kernel.modes() != n_) throw DimensionError("WignerPoly: kernel mode count mismatch");
    for (const auto& kv : poly)
        if (static_cast<int>(kv.first.size()) != 2 * n_) throw DimensionError("WignerPoly: bad multi-index length");
    terms_.push_back({kernel, std::move(poly)});
}

WignerPoly WignerPoly::apply_ladder(Op op, Side side, int mode) const {
    if (mode < 0 || mode >= n_) throw DimensionError("apply_ladder: mode out of range");
    // a rho <-> (alpha + 1/2 d/dalpha*) W with alpha = (x + i p)/sqrt2, d/dalpha* = (dx + i dp)/sqrt2
    const double sg = op == Op::A ? 1.0 : -1.0;
    const double tau = (op == Op::A) == (side == Side::Left) ? 1.0 : -1.0;
    const cplx I(0, 1);
    const int ix = 2 * mode, ip = 2 * mode + 1;
    WignerPoly out(n_);
    for (const auto& t : terms_) {
        const Mat A = t.kernel.gamma().inverse();
        const Vec Ad = A * t.kernel.d();
        const int D = 2 * n_;
        std::vector<cplx> mult(D, 0.0);
        mult[ix] += 1.0;
        mult[ip] += sg * I;
        // derivative of the kernel: d_j G = -2 (A (z - d))_j G
        for (int k = 0; k < D; ++k) mult[k] += tau * 0.5 * (-2.0) * (A(ix, k) + sg * I * A(ip, k));
        cplx c0 = tau * 0.5 * 2.0 * (Ad(ix) + sg * I * Ad(ip));
        Poly np = mul_linear(t.poly, mult, c0);
        add_into(np, derivative(t.poly, ix), tau * 0.5);
        add_into(np, derivative(t.poly, ip), tau * 0.5 * sg * I);
        for (auto& kv : np) kv.second /= kSqrt2;
        prune(np);
        out.terms_.push_back({t.kernel, std::move(np)});
    }
    return out;
}

WignerPoly WignerPoly::scaled(double f) const {
    WignerPoly out = *this;
    for (auto& t : out.terms_)
        for (auto& kv : t.poly) kv.second *= f;
    return out;
}

WignerPoly WignerPoly::plus(const WignerPoly& other) const {
    if (other.n_ != n_) throw DimensionError("WignerPoly::plus: mode mismatch");
    WignerPoly out = *this;
    for (const auto& t : other.terms_) {
        bool merged = false;
        for (auto& s : out.terms_)
            if (s.kernel.gamma() == t.kernel.gamma() && s.kernel.d() == t.kernel.d()) {
                add_into(s.poly, t.poly);
                merged = true;
                break;
            }
        if (!merged) out.terms_.push_back(t);
    }
    return out;
}

WignerPoly WignerPoly::transformed(const Mat& S) const {
    const int D = 2 * n_;
    if (S.rows() != D || S.cols() != D) throw DimensionError("WignerPoly::transformed: size mismatch");
    const Mat M = S.inverse();
    WignerPoly out(n_);
    for (const auto& t : terms_) {
        GaussianState k(S * t.kernel.d(), S * t.kernel.gamma() * S.transpose());
        Poly np;
        for (const auto& [idx, c] : t.poly) {
            Poly term;
            term[MultiIndex(D, 0)] = c;
            for (int j = 0; j < D; ++j)
                for (int e = 0; e < idx[j]; ++e) {
                    std::vector<cplx> lin(D);
                    for (int i = 0; i < D; ++i) lin[i] = M(j, i);
                    term = mul_linear(term, lin, 0.0);
                }
            add_into(np, term);
        }
        prune(np);
        out.terms_.push_back({k, std::move(np)});
    }
    return out;
}

double WignerPoly::moment(const MultiIndex& k) const {
    if (static_cast<int>(k.size()) != 2 * n_) throw DimensionError("moment: bad multi-index");
    double total = 0;
    for (const auto& t : terms_) {
        PlainMoments pm(t.kernel.d(), t.kernel.gamma() / 2);
        for (const auto& [idx, c] : t.poly) {
            MultiIndex kk = idx;
            for (std::size_t i = 0; i < kk.size(); ++i) kk[i] += k[i];
            total += c.real() * pm(kk);
        }
    }
    return total;
}

double WignerPoly::integral() const { return moment(MultiIndex(2 * n_, 0)); }

WignerPoly WignerPoly::normalized() const {
    double z = integral();
    if (!(std::abs(z) > 1e-300)) throw NumericError("WignerPoly: zero norm");
    return scaled(1 / z);
}

double WignerPoly::evaluate(const Vec& z) const {
    if (z.size() != 2 * n_) throw DimensionError("evaluate: bad point");
    double total = 0;
    for (const auto& t : terms_) {
        Vec dz = z - t.kernel.d();
        const Mat& g = t.kernel.gamma();
        double G = std::exp(-dz.dot(g.ldlt().solve(dz))) / (std::pow(M_PI, n_) * std::sqrt(g.determinant()));
        cplx P = 0;
        for (const auto& [idx, c] : t.poly) {
            double m = 1;
            for (int i = 0; i < 2 * n_; ++i) m *= std::pow(z(i), idx[i]);
            P += c * m;
        }
        total += P.real() * G;
    }
    return total;
}

Vec WignerPoly::first_moments() const {
    Vec out(2 * n_);
    for (int j = 0; j < 2 * n_; ++j) {
        MultiIndex k(2 * n_, 0);
        k[j] = 1;
        out(j) = moment(k);
    }
    return out;
}

double mean_photon_number(const WignerPoly& w, int mode) {
    MultiIndex kx(2 * w.modes(), 0), kp(2 * w.modes(), 0);
    kx[2 * mode] = 2;
    kp[2 * mode + 1] = 2;
    return (w.moment(kx) + w.moment(kp) - w.integral()) / 2;
}

double gaussian_moment_integral(const Mat& A, const Vec& b, const MultiIndex& k) {
    const int D = static_cast<int>(A.rows());
    if (A.cols() != D || b.size() != D || static_cast<int>(k.size()) != D)
        throw DimensionError("gaussian_moment_integral: size mismatch");
    Eigen::LLT<Mat> llt(0.5 * (A + A.transpose()));
    if (llt.info() != Eigen::Success) throw PreconditionError("gaussian_moment_integral: kernel not positive definite");
    Mat Ainv = llt.solve(Mat::Identity(D, D));
    Vec mean = -0.5 * Ainv * b;
    double logdet = 2 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
    double z0 = std::pow(M_PI, D / 2.0) * std::exp(-0.5 * logdet + 0.25 * b.dot(Ainv * b));
    PlainMoments pm(mean, Ainv / 2);
    return z0 * pm(k);
}

WignerPoly fock(int n) {
    if (n < 0) throw PreconditionError("fock: n must be non-negative");
    WignerPoly w = WignerPoly::gaussian(GaussianState::vacuum(1));
    for (int i = 0; i < n; ++i) w = w.apply_ladder(WignerPoly::Op::Adag, WignerPoly::Side::Left, 0);
    for (int i = 0; i < n; ++i) w = w.apply_ladder(WignerPoly::Op::A, WignerPoly::Side::Right, 0);
    return w.scaled(1 / std::tgamma(n + 1.0));
}

WignerPoly pure_from_fock(const Mat& psi) {
    using Op = WignerPoly::Op;
    using Side = WignerPoly::Side;
    const WignerPoly vac = WignerPoly::gaussian(GaussianState::vacuum(2));
    Poly total;
    double nrm = psi.squaredNorm();
    if (!(nrm > 0)) throw PreconditionError("pure_from_fock: zero amplitudes");
    // monomial coefficients of high Fock numbers cancel badly; up to n = 9 the result is exact to ~1e-13
    if (psi.rows() > kMaxFockDim || psi.cols() > kMaxFockDim)
        throw PreconditionError("pure_from_fock: photon numbers above 9 are not supported");
    for (int n = 0; n < psi.rows(); ++n)
        for (int m = 0; m < psi.cols(); ++m) {
            if (psi(n, m) == 0) continue;
            WignerPoly left = vac;
            for (int i = 0; i < n; ++i) left = left.apply_ladder(Op::Adag, Side::Left, 0);
            for (int i = 0; i < m; ++i) left = left.apply_ladder(Op::Adag, Side::Left, 1);
            for (int k = 0; k < psi.rows(); ++k)
                for (int l = 0; l < psi.cols(); ++l) {
                    if (psi(k, l) == 0) continue;
                    WignerPoly w = left;
                    for (int i = 0; i < k; ++i) w = w.apply_ladder(Op::A, Side::Right, 0);
                    for (int i = 0; i < l; ++i) w = w.apply_ladder(Op::A, Side::Right, 1);
                    double f = psi(n, m) * psi(k, l) /
                               std::sqrt(std::tgamma(n + 1.0) * std::tgamma(m + 1.0) * std::tgamma(k + 1.0) *
                                         std::tgamma(l + 1.0)) /
                               nrm;
                    add_into(total, w.terms().front().poly, f);
                }
        }
    prune(total);
    WignerPoly out(2);
    out.add_term(GaussianState::vacuum(2), total);
    return out;
}

WignerPoly bell(BellKind kind, double p) {
    if (p < 0 || p > 1) throw PreconditionError("bell: p must lie in [0, 1]");
    Mat psi = Mat::Zero(2, 2);
    const double s = std::sqrt(p), t = std::sqrt(1 - p);
    switch (kind) {
        case BellKind::PhiPlus: psi(0, 0) = s, psi(1, 1) = t; break;
        case BellKind::PhiMinus: psi(0, 0) = s, psi(1, 1) = -t; break;
        case BellKind::PsiPlus: psi(0, 1) = s, psi(1, 0) = t; break;
        case BellKind::PsiMinus: psi(0, 1) = s, psi(1, 0) = -t; break;
    }
    return pure_from_fock(psi);
}

WignerPoly photon_subtracted(double T, double r) {
    if (T < 0 || T > 1) throw PreconditionError("photon_subtracted: T must lie in [0, 1]");
    if (r < 0) throw PreconditionError("photon_subtracted: r must be non-negative");
    using Op = WignerPoly::Op;
    using Side = WignerPoly::Side;
    // a_A a_B on a TMS with tanh r' = T tanh r equals (1 + n_A) on it, which avoids cancellation
    const double rp = std::atanh(T * std::tanh(r));
    WignerPoly w = WignerPoly::gaussian(GaussianState::tms(rp));
    w = w.plus(w.apply_ladder(Op::A, Side::Left, 0).apply_ladder(Op::Adag, Side::Left, 0));
    w = w.plus(w.apply_ladder(Op::Adag, Side::Right, 0).apply_ladder(Op::A, Side::Right, 0));
    return w.normalized();
}

WignerPoly mixture_with_vacuum(double p, const WignerPoly& inner) {
    if (p < 0 || p > 1) throw PreconditionError("mixture_with_vacuum: p must lie in [0, 1]");
    if (inner.modes() != 2) throw DimensionError("mixture_with_vacuum: two-mode state expected");
    WignerPoly vac = WignerPoly::gaussian(GaussianState::vacuum(2));
    if (p == 0) return vac;
    if (p == 1) return inner;
    return inner.scaled(p).plus(vac.scaled(1 - p));
}

Mat photonic_qutrit_amplitudes() {
    Mat psi = Mat::Zero(3, 3);
    psi(0, 0) = 1 / std::sqrt(2.0);
    psi(0, 2) = psi(2, 0) = 0.5;
    return psi;
}

WignerPoly photonic_qutrit() { return pure_from_fock(photonic_qutrit_amplitudes()); }

WignerPoly subtracted_lossy_tms(double r, double R) {
    if (R < 0 || R >= 1) throw PreconditionError("subtracted_lossy_tms: R must lie in [0, 1)");
    using Op = WignerPoly::Op;
    using Side = WignerPoly::Side;
    GaussianState tms = GaussianState::tms(r);
    GaussianState lossy(tms.d(), (1 - R) * tms.gamma() + R * Mat::Identity(4, 4));
    WignerPoly w = WignerPoly::gaussian(lossy);
    // a_A - a_B: the relative phase of the delocalized click puts the optimum on the momenta
    w = w.apply_ladder(Op::A, Side::Left, 0).plus(w.apply_ladder(Op::A, Side::Left, 1).scaled(-1));
    w = w.apply_ladder(Op::Adag, Side::Right, 0).plus(w.apply_ladder(Op::Adag, Side::Right, 1).scaled(-1));
    return w.normalized();
}

AngleChoice AngleChoice::reduced() const {
    auto red = [](double a) {
        double v = std::fmod(a, M_PI);
        return v < 0 ? v + M_PI : v;
    };
    return {red(theta), red(phi)};
}

double sign_binned_E(const WignerPoly& w, const AngleChoice& angles) {
    if (w.modes() != 2) throw DimensionError("sign_binned_E: two-mode state expected");
    Vec u = Vec::Zero(4), v = Vec::Zero(4);
    u(0) = std::cos(angles.theta);
    u(1) = std::sin(angles.theta);
    v(2) = std::cos(angles.phi);
    v(3) = std::sin(angles.phi);
    double total = 0;
    for (const auto& t : w.terms()) {
        if (t.kernel.d().cwiseAbs().maxCoeff() > 1e-12)
            throw PreconditionError("sign_binned_E: kernels must be centred");
        SignedMoments sm(t.kernel.gamma() / 2, u, v);
        for (const auto& [idx, c] : t.poly) {
            if (c.real() == 0) continue;
            MultiIndex k = idx;
            total += c.real() * sm(k, 3);
        }
    }
    return total;
}

namespace {

// Nelder-Mead in two dimensions, minimizing f
AngleChoice nelder_mead(const std::function<double(double, double)>& f, double x0, double y0, double step) {
    std::array<std::array<double, 2>, 3> p{{{x0, y0}, {x0 + step, y0}, {x0, y0 + step}}};
    std::array<double, 3> fv{};
    for (int i = 0; i < 3; ++i) fv[i] = f(p[i][0], p[i][1]);
    for (int it = 0; it < 400; ++it) {
        std::array<int, 3> o{0, 1, 2};
        std::sort(o.begin(), o.end(), [&](int a, int b) { return fv[a] < fv[b]; });
        auto P = p;
        auto F = fv;
        for (int i = 0; i < 3; ++i) p[i] = P[o[i]], fv[i] = F[o[i]];
        double size = std::max(std::hypot(p[1][0] - p[0][0], p[1][1] - p[0][1]),
                               std::hypot(p[2][0] - p[0][0], p[2][1] - p[0][1]));
        if (size < 1e-10) break;
        double cx = 0.5 * (p[0][0] + p[1][0]), cy = 0.5 * (p[0][1] + p[1][1]);
        auto at = [&](double t) { return std::array<double, 2>{cx + t * (p[2][0] - cx), cy + t * (p[2][1] - cy)}; };
        auto xr = at(-1);
        double fr = f(xr[0], xr[1]);
        if (fr < fv[0]) {
            auto xe = at(-2);
            double fe = f(xe[0], xe[1]);
            if (fe < fr) p[2] = xe, fv[2] = fe;
            else p[2] = xr, fv[2] = fr;
        } else if (fr < fv[1]) {
            p[2] = xr, fv[2] = fr;
        } else {
            auto xc = fr < fv[2] ? at(-0.5) : at(0.5);
            double fc = f(xc[0], xc[1]);
            if (fc < std::min(fr, fv[2])) {
                p[2] = xc, fv[2] = fc;
            } else {
                for (int i = 1; i < 3; ++i) {
                    p[i][0] = 0.5 * (p[i][0] + p[0][0]);
                    p[i][1] = 0.5 * (p[i][1] + p[0][1]);
                    fv[i] = f(p[i][0], p[i][1]);
                }
            }
        }
    }
    int best = static_cast<int>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    return {p[best][0], p[best][1]};
}

}  // namespace

QResult bit_correlation_Q(const WignerPoly& w, int grid) {
    if (w.modes() != 2) throw DimensionError("bit_correlation_Q: two-mode state expected");
    if (w.first_moments().cwiseAbs().maxCoeff() > 1e-9)
        throw PreconditionError("bit_correlation_Q: fairness condition violated (non-zero first moments)");
    if (grid < 2) throw PreconditionError("bit_correlation_Q: grid too small");
    std::vector<double> vals(static_cast<std::size_t>(grid) * grid);
    const double h = M_PI / grid;
    parallel_for(grid, [&](int i) {
        for (int j = 0; j < grid; ++j) vals[i * grid + j] = std::abs(sign_binned_E(w, {i * h, j * h}));
    });
    std::vector<int> order(vals.size());
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + 4, order.end(), [&](int a, int b) { return vals[a] > vals[b]; });
    QResult best;
    best.Q = vals[order[0]];
    best.best = {(order[0] / grid) * h, (order[0] % grid) * h};
    auto f = [&](double a, double b) { return -std::abs(sign_binned_E(w, {a, b})); };
    for (int s = 0; s < 4; ++s) {
        int idx = order[s];
        AngleChoice a = nelder_mead(f, (idx / grid) * h, (idx % grid) * h, h / 2);
        double q = -f(a.theta, a.phi);
        if (q > best.Q) best.Q = q, best.best = a;
    }
    best.best = best.best.reduced();
    best.Q = std::min(best.Q, 1.0);
    return best;
}

double gaussian_Q(const StandardFormParams& sf) {
    double m = std::max(std::abs(sf.c_x), std::abs(sf.c_p));
    return 2 / M_PI * std::asin(std::min(1.0, m / std::sqrt(sf.lambda_a * sf.lambda_b)));
}

double gaussian_Q(const GaussianState& s) { return gaussian_Q(standard_form(s)); }

std::vector<double> photon_subtracted_coefficients(double T, double r, int n_max) {
    const double x = T * std::tanh(r);
    const double norm = std::pow(1 - x * x, 1.5) / std::sqrt(1 + x * x);
    std::vector<double> c(n_max + 1);
    for (int n = 0; n <= n_max; ++n) c[n] = (n + 1) * std::pow(x, n) * norm;
    return c;
}

int photon_subtracted_nmax(double T, double r, double tail) {
    const double x = T * std::tanh(r);
    if (x == 0) return 1;
    const double x2 = x * x;
    const double norm = std::pow(1 - x2, 3) / (1 + x2);
    // remaining weight sum_{k>n} (k+1)^2 x^{2k}, bounded by a geometric tail once the ratio is below 1
    for (int n = 1; n < 100000; ++n) {
        double ratio = std::pow((n + 3.0) / (n + 2.0), 2) * x2;
        double next = norm * std::pow(n + 2.0, 2) * std::pow(x2, n + 1);
        if (ratio < 1 && next / (1 - ratio) < tail) return n;
    }
    throw NumericError("photon_subtracted_nmax: series does not converge");
}

double q_photon_subtracted_series(double T, double r, int n_max) {
    if (n_max <= 0) n_max = photon_subtracted_nmax(T, r, 1e-14);
    auto c = photon_subtracted_coefficients(T, r, n_max);
    // 1/(Gamma(-m/2) Gamma((1-n)/2)); zero at the poles, so only (odd, even) index pairs survive
    auto logF = [](int m, int n, int& sign) -> double {
        if (m % 2 == 0 || n % 2 == 1) return -std::numeric_limits<double>::infinity();
        int s1 = 1, s2 = 1;
        double l1 = boost::math::lgamma(-m / 2.0, &s1);
        double l2 = boost::math::lgamma((1 - n) / 2.0, &s2);
        sign = s1 * s2;
        return -l1 - l2;
    };
    double total = 0;
    for (int n = 1; n <= n_max; ++n)
        for (int m = 0; m < n; ++m) {
            if (c[m] == 0 || c[n] == 0) continue;
            int s = 1;
            double lf = logF(m, n, s);
            if (!std::isfinite(lf)) lf = logF(n, m, s);
            if (!std::isfinite(lf)) continue;
            double lt = (m + n + 3) * std::log(2.0) + std::log(M_PI) + 2 * lf + std::log(c[m]) + std::log(c[n]) -
                        2 * std::log(double(n - m)) - std::lgamma(m + 1.0) - std::lgamma(n + 1.0);
            total += std::exp(lt);
        }
    return total;
}

double negativity_closed_form(Family f, const std::vector<double>& params) {
    auto need = [&](std::size_t k) {
        if (params.size() != k) throw PreconditionError("negativity_closed_form: wrong parameter count");
    };
    switch (f) {
        case Family::Bell: {
            need(1);
            double p = params[0];
            if (p < 0 || p > 1) throw PreconditionError("negativity_closed_form: p must lie in [0, 1]");
            return std::sqrt(p * (1 - p));
        }
        case Family::PhotonSubtracted: {
            need(2);
            double x = params[0] * std::tanh(params[1]);
            return 2 / (1 - x) - 1 / (1 + x * x) - 1;
        }
        case Family::Mixture: {
            need(2);
            return params[0] * (std::exp(2 * params[1]) - 1) / 2;
        }
        default:
            need(1);
            return (std::exp(2 * params[0]) - 1) / 2;
    }
}

double q_mixture_closed_form(double p, double r) {
    if (p == 0) return 0;
    double N = negativity_closed_form(Family::Mixture, {p, r});
    return 2 * p / M_PI * std::atan(N * (1 / (2 * N + p) + 1 / p));
}

double pure_state_negativity(const Mat& psi) {
    Eigen::JacobiSVD<Mat> svd(psi);
    const Vec& s = svd.singularValues();
    double sum = s.sum(), n2 = s.squaredNorm();
    if (!(n2 > 0)) throw PreconditionError("pure_state_negativity: zero amplitudes");
    return (sum * sum / n2 - 1) / 2;
}

std::vector<ScatterPoint> random_gaussian_scatter(int count, double lambda, std::uint64_t seed) {
    if (!(lambda >= 1)) throw PreconditionError("random_gaussian_scatter: lambda must be >= 1");
    Rng rng(seed);
    std::uniform_real_distribution<double> ux(0, lambda), up(-1, 1);
    std::vector<ScatterPoint> out;
    out.reserve(count);
    while (static_cast<int>(out.size()) < count) {
        StandardFormParams sf{lambda, lambda, ux(rng), 0};
        sf.c_p = up(rng) * sf.c_x;
        GaussianState s = sf.state();
        if (!check_physicality(s, 0)) continue;
        ScatterPoint pt;
        pt.params = sf;
        pt.negativity = negativity(s, ModePartition::split({0}, {1}));
        pt.scaled_negativity = 2 * pt.negativity / (2 * pt.negativity + 1);
        pt.Q = gaussian_Q(sf);
        pt.purity = purity(s);
        out.push_back(pt);
    }
    return out;
}

double q_pure_at_negativity(double N) {
    double mu = 1 / (1 + 2 * N);
    return 2 / M_PI * std::atan((1 - mu * mu) / (2 * mu));
}

}  // namespace cvqit
