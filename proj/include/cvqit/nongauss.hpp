#pragma once

#include "cvqit/core.hpp"

#include <complex>
#include <map>

namespace cvqit {

using cplx = std::complex<double>;
// exponents of the 2N phase-space variables (x1, p1, x2, p2, ...)
using MultiIndex = std::vector<int>;
using Poly = std::map<MultiIndex, cplx>;

// W(z) = sum over terms of P_t(z) * G_t(z), G_t the Gaussian Wigner function of the kernel
class WignerPoly {
public:
    struct Term {
        GaussianState kernel;
        Poly poly;
    };

    explicit WignerPoly(int modes) : n_(modes) {}
    static WignerPoly gaussian(const GaussianState& s);

    int modes() const { return n_; }
    const std::vector<Term>& terms() const { return terms_; }
    void add_term(const GaussianState& kernel, Poly poly);

    enum class Op { A, Adag };
    enum class Side { Left, Right };
    WignerPoly apply_ladder(Op op, Side side, int mode) const;
    WignerPoly scaled(double f) const;
    WignerPoly plus(const WignerPoly& other) const;
    // representation after the linear change z -> S z (kernel and polynomial both move)
    WignerPoly transformed(const Mat& S) const;

    double integral() const;
    WignerPoly normalized() const;
    double evaluate(const Vec& z) const;
    // expectation of z^k
    double moment(const MultiIndex& k) const;
    Vec first_moments() const;

private:
    int n_;
    std::vector<Term> terms_;
};

double mean_photon_number(const WignerPoly& w, int mode);

// integral of z^k exp(-z^T A z - b^T z) over R^dim
double gaussian_moment_integral(const Mat& A, const Vec& b, const MultiIndex& k);

// state zoo
WignerPoly fock(int n);
enum class BellKind { PhiPlus, PhiMinus, PsiPlus, PsiMinus };
WignerPoly bell(BellKind kind, double p);
// pure two-mode state sum psi(n, m) |n, m>
WignerPoly pure_from_fock(const Mat& psi);
WignerPoly photon_subtracted(double T, double r);
WignerPoly mixture_with_vacuum(double p, const WignerPoly& inner);
Mat photonic_qutrit_amplitudes();
WignerPoly photonic_qutrit();
// delocalized single-photon subtraction (a_A - a_B) on a TMS after loss of reflectivity R per arm
WignerPoly subtracted_lossy_tms(double r, double R);

struct AngleChoice {
    double theta = 0, phi = 0;
    AngleChoice reduced() const;
};

double sign_binned_E(const WignerPoly& w, const AngleChoice& angles);

struct QResult {
    double Q = 0;
    AngleChoice best;
};

QResult bit_correlation_Q(const WignerPoly& w, int grid = 64);

// analytic Q of a two-mode Gaussian state, sup over angles of (2/pi) asin|corr|
double gaussian_Q(const StandardFormParams& sf);
double gaussian_Q(const GaussianState& s);

std::vector<double> photon_subtracted_coefficients(double T, double r, int n_max);
int photon_subtracted_nmax(double T, double r, double tail = 1e-12);
double q_photon_subtracted_series(double T, double r, int n_max = 0);

enum class Family { Bell, PhotonSubtracted, Mixture, Tms };
// Bell: (p); PhotonSubtracted: (T, r); Mixture: (p, r); Tms: (r)
double negativity_closed_form(Family f, const std::vector<double>& params);
double q_mixture_closed_form(double p, double r);
// negativity of a pure bipartite state from its amplitude matrix
double pure_state_negativity(const Mat& psi);

struct ScatterPoint {
    double scaled_negativity = 0;  // 2N/(2N+1)
    double Q = 0;
    double purity = 1;
    double negativity = 0;
    StandardFormParams params;
};

std::vector<ScatterPoint> random_gaussian_scatter(int count, double lambda, std::uint64_t seed);
double q_pure_at_negativity(double N);

}  // namespace cvqit
