#include "cvqit/entanglement.hpp"
#include "cvqit/nongauss.hpp"
#include "cvqit/ops.hpp"
#include "doctest.h"
#include "helpers.hpp"

#include <cmath>

using namespace cvqit;

namespace {

Vec point(std::initializer_list<double> v) {
    Vec z(static_cast<Eigen::Index>(v.size()));
    int i = 0;
    for (double x : v) z(i++) = x;
    return z;
}

double tms_E(double r) { return 2 / M_PI * std::atan(std::sinh(2 * r)); }

}  // namespace

TEST_CASE("fock one from ladder operators") {
    auto w = fock(1);
    CHECK(w.integral() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(w.evaluate(point({0, 0})) == doctest::Approx(-1 / M_PI));
    CHECK(w.evaluate(point({1, 0})) == doctest::Approx(std::exp(-1.0) / M_PI));
    CHECK(w.evaluate(point({0.3, -0.7})) ==
          doctest::Approx((2 * 0.58 - 1) * std::exp(-0.58) / M_PI));
    CHECK(mean_photon_number(w, 0) == doctest::Approx(1.0));
    CHECK(mean_photon_number(fock(3), 0) == doctest::Approx(3.0));
}

TEST_CASE("annihilating the vacuum gives nothing") {
    auto vac = WignerPoly::gaussian(GaussianState::vacuum(1));
    auto z = vac.apply_ladder(WignerPoly::Op::A, WignerPoly::Side::Left, 0)
                 .apply_ladder(WignerPoly::Op::Adag, WignerPoly::Side::Right, 0);
    CHECK(std::abs(z.integral()) < 1e-14);
    CHECK(std::abs(z.evaluate(point({0.4, 0.1}))) < 1e-14);
}

TEST_CASE("coherent state photon number") {
    auto w = WignerPoly::gaussian(GaussianState::coherent(1.2, -0.5));
    CHECK(mean_photon_number(w, 0) == doctest::Approx((1.44 + 0.25) / 2).epsilon(1e-12));
}

TEST_CASE("gaussian moment integrals") {
    Mat A = Mat::Identity(1, 1);
    CHECK(gaussian_moment_integral(A, Vec::Zero(1), {0}) == doctest::Approx(std::sqrt(M_PI)));
    CHECK(gaussian_moment_integral(A, Vec::Zero(1), {1}) == doctest::Approx(0.0));
    CHECK(gaussian_moment_integral(A, Vec::Zero(1), {4}) == doctest::Approx(0.75 * std::sqrt(M_PI)));
    Mat B(2, 2);
    B << 2.0, 0.3, 0.3, 1.0;
    CHECK(gaussian_moment_integral(B, Vec::Zero(2), {0, 0}) == doctest::Approx(M_PI / std::sqrt(B.determinant())));
    CHECK(gaussian_moment_integral(B, Vec::Zero(2), {1, 2}) == doctest::Approx(0.0));
    // shifted kernel: int exp(-x^2 - b x) = sqrt(pi) exp(b^2 / 4)
    CHECK(gaussian_moment_integral(A, point({0.6}), {0}) == doctest::Approx(std::sqrt(M_PI) * std::exp(0.09)));
    CHECK(gaussian_moment_integral(A, point({0.6}), {1}) ==
          doctest::Approx(-0.3 * std::sqrt(M_PI) * std::exp(0.09)));
}

TEST_CASE("state zoo normalization") {
    for (double p : {0.0, 0.3, 1.0}) CHECK(bell(BellKind::PhiPlus, p).integral() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(photon_subtracted(0.8, 0.6).integral() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(photonic_qutrit().integral() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(subtracted_lossy_tms(0.5, 0.2).integral() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS(bell(BellKind::PhiPlus, 1.5));
    CHECK_THROWS(photon_subtracted(1.2, 0.5));
}

TEST_CASE("mixture with no weight is the vacuum") {
    auto m = mixture_with_vacuum(0.0, WignerPoly::gaussian(GaussianState::tms(0.7)));
    CHECK(m.evaluate(point({0.2, 0.1, -0.3, 0.5})) ==
          doctest::Approx(std::exp(-(0.04 + 0.01 + 0.09 + 0.25)) / (M_PI * M_PI)).epsilon(1e-12));
}

TEST_CASE("photon subtracted coefficients") {
    for (double r : {0.3, 0.8}) {
        double L = std::tanh(r);
        auto c = photon_subtracted_coefficients(1.0, r, photon_subtracted_nmax(1.0, r));
        double sum = 0;
        for (double v : c) sum += v * v;
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
        double expect1 = 2 * L * std::pow(1 - L * L, 1.5) / std::sqrt(1 + L * L);
        CHECK(c[1] == doctest::Approx(expect1));
    }
}

TEST_CASE("sign binned correlations") {
    auto prod = WignerPoly::gaussian(tensor(GaussianState::squeezed(0.4), GaussianState::thermal(2.0)));
    CHECK(std::abs(sign_binned_E(prod, {0.3, 1.1})) < 1e-12);
    CHECK(sign_binned_E(WignerPoly::gaussian(GaussianState::tms(0.5)), {0, 0}) ==
          doctest::Approx(tms_E(0.5)).epsilon(1e-9));
    CHECK(sign_binned_E(bell(BellKind::PsiPlus, 0.5), {0, 0}) == doctest::Approx(2 / M_PI).epsilon(1e-9));
    // exact Hermite-function sign-overlap oracle
    CHECK(sign_binned_E(bell(BellKind::PsiPlus, 0.5), {0.4, 0.9}) == doctest::Approx(0.5586864107844).epsilon(1e-9));
    for (double p : {0.1, 0.3})
        CHECK(sign_binned_E(bell(BellKind::PhiPlus, p), {0, 0}) ==
              doctest::Approx(4 / M_PI * std::sqrt(p * (1 - p))).epsilon(1e-9));
}

TEST_CASE("gaussian sign correlation matches the arcsine form on random states") {
    Rng rng(41);
    for (int k = 0; k < 100; ++k) {
        auto s = random_state(2, rng);
        Mat g = s.gamma();
        double corr = g(0, 2) / std::sqrt(g(0, 0) * g(2, 2));
        CHECK(sign_binned_E(WignerPoly::gaussian(s), {0, 0}) == doctest::Approx(2 / M_PI * std::asin(corr)).epsilon(1e-9));
    }
}

TEST_CASE("truncated fock state against the exact sign overlap") {
    const int K = 8;
    const double l = std::tanh(0.3);
    Mat psi = Mat::Zero(K, K);
    for (int n = 1; n < K; ++n) {
        psi(n - 1, n) += std::pow(l, n) * std::sqrt(n);
        psi(n, n - 1) += std::pow(l, n) * std::sqrt(n);
    }
    psi /= psi.norm();
    CHECK(sign_binned_E(pure_from_fock(psi), {0, 0}) == doctest::Approx(0.8979382307236).epsilon(1e-8));
    CHECK_THROWS_AS(pure_from_fock(Mat::Zero(12, 12)), PreconditionError);
}

TEST_CASE("delocalized subtraction puts the correlations on the momenta") {
    auto w = subtracted_lossy_tms(0.3, 0.0);
    CHECK(sign_binned_E(w, {0, 0}) == doctest::Approx(-0.1760986572897).epsilon(1e-8));
    CHECK(sign_binned_E(w, {M_PI / 2, M_PI / 2}) == doctest::Approx(-0.8979434361789).epsilon(1e-8));
    auto q = bit_correlation_Q(subtracted_lossy_tms(0.5, 0.1), 32);
    auto b = q.best.reduced();
    CHECK(b.theta == doctest::Approx(M_PI / 2).epsilon(1e-4));
    CHECK(b.phi == doctest::Approx(M_PI / 2).epsilon(1e-4));
}

TEST_CASE("Q of gaussian states") {
    StandardFormParams sf{2.0, 2.0, 1.2, -0.8};
    CHECK(gaussian_Q(sf) == doctest::Approx(2 / M_PI * std::atan(1.2 / std::sqrt(4 - 1.44))));
    CHECK(gaussian_Q(GaussianState::tms(0.6)) == doctest::Approx(tms_E(0.6)).epsilon(1e-12));
    auto q = bit_correlation_Q(WignerPoly::gaussian(GaussianState::tms(0.6)), 16);
    CHECK(q.Q == doctest::Approx(tms_E(0.6)).epsilon(1e-6));
}

TEST_CASE("Q is unchanged by local symplectics") {
    auto w = bell(BellKind::PsiPlus, 0.3);
    double base = bit_correlation_Q(w, 16).Q;
    Rng rng(5);
    for (int k = 0; k < 5; ++k) {
        Mat S = Mat::Zero(4, 4);
        S.topLeftCorner(2, 2) = random_symplectic(1, rng, 0.4);
        S.bottomRightCorner(2, 2) = random_symplectic(1, rng, 0.4);
        CHECK(bit_correlation_Q(w.transformed(S), 16).Q == doctest::Approx(base).epsilon(1e-6));
    }
}

TEST_CASE("Q of product and qutrit states vanishes") {
    CHECK(bit_correlation_Q(bell(BellKind::PhiPlus, 1.0), 8).Q < 1e-12);
    CHECK(bit_correlation_Q(photonic_qutrit(), 16).Q < 1e-9);
    CHECK(pure_state_negativity(photonic_qutrit_amplitudes()) > 0.1);
}

TEST_CASE("fairness is checked") {
    auto w = WignerPoly::gaussian(tensor(GaussianState::coherent(0.5, 0), GaussianState::vacuum(1)));
    CHECK_THROWS_AS(bit_correlation_Q(w, 8), PreconditionError);
}

TEST_CASE("series for the subtracted state") {
    CHECK(q_photon_subtracted_series(0.9, 0.0) == doctest::Approx(0.0));
    double direct = bit_correlation_Q(photon_subtracted(1.0, 0.5), 16).Q;
    CHECK(std::abs(q_photon_subtracted_series(1.0, 0.5) - direct) < 1e-4);
    double prev = -1;
    for (double r = 0.1; r <= 1.0001; r += 0.1) {
        double q = q_photon_subtracted_series(0.8, r);
        CHECK(q > prev);
        prev = q;
    }
}

TEST_CASE("negativity closed forms") {
    CHECK(negativity_closed_form(Family::Bell, {0.0}) == doctest::Approx(0.0));
    CHECK(negativity_closed_form(Family::Bell, {0.3}) == doctest::Approx(std::sqrt(0.21)));
    CHECK(negativity_closed_form(Family::PhotonSubtracted, {1.0, 0.5}) >
          negativity_closed_form(Family::Tms, {0.5}));
    CHECK(negativity_closed_form(Family::Tms, {0.5}) ==
          doctest::Approx(negativity(GaussianState::tms(0.5), ModePartition::split({0}, {1}))));
    CHECK(negativity_closed_form(Family::Mixture, {0.4, 0.5}) ==
          doctest::Approx(0.4 * negativity_closed_form(Family::Tms, {0.5})));
    CHECK(q_mixture_closed_form(1.0, 0.7) == doctest::Approx(tms_E(0.7)).epsilon(1e-12));
    // amplitude-matrix route agrees with the Bell closed form
    Mat psi = Mat::Zero(2, 2);
    psi(0, 0) = std::sqrt(0.3);
    psi(1, 1) = std::sqrt(0.7);
    CHECK(pure_state_negativity(psi) == doctest::Approx(std::sqrt(0.21)));
}

TEST_CASE("bell family Q is proportional to negativity") {
    for (double p : {0.1, 0.5, 0.8}) {
        double q = bit_correlation_Q(bell(BellKind::PhiPlus, p), 16).Q;
        CHECK(q == doctest::Approx(4 / M_PI * negativity_closed_form(Family::Bell, {p})).epsilon(1e-9));
    }
}

TEST_CASE("mixture Q matches its closed form") {
    for (double p : {0.3, 0.7}) {
        auto m = mixture_with_vacuum(p, WignerPoly::gaussian(GaussianState::tms(0.5)));
        CHECK(bit_correlation_Q(m, 16).Q == doctest::Approx(q_mixture_closed_form(p, 0.5)).epsilon(1e-6));
    }
}

TEST_CASE("random gaussian scatter") {
    auto pts = random_gaussian_scatter(200, 3.0, 7);
    CHECK(pts.size() == 200);
    for (const auto& p : pts) {
        CHECK(p.Q >= 0.0);
        CHECK(p.Q <= 1.0);
        CHECK(p.Q >= q_pure_at_negativity(p.negativity) - 1e-9);
        CHECK(p.scaled_negativity == doctest::Approx(2 * p.negativity / (2 * p.negativity + 1)));
    }
    // pure states sit on the curve
    for (double r : {0.2, 0.6, 1.0}) {
        double N = negativity_closed_form(Family::Tms, {r});
        CHECK(q_pure_at_negativity(N) == doctest::Approx(tms_E(r)).epsilon(1e-10));
    }
    // separable states with c_p = 0 carry Q but no negativity
    StandardFormParams sep{3.0, 3.0, 2.5, 0.0};
    CHECK(negativity(sep.state(), ModePartition::split({0}, {1})) == doctest::Approx(0.0));
    CHECK(gaussian_Q(sep) > 0.5);
}
