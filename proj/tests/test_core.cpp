#include "cvqit/broadcast.hpp"
#include "cvqit/core.hpp"
#include "cvqit/ops.hpp"
#include "doctest.h"
#include "helpers.hpp"

#include <algorithm>
#include <cmath>

using namespace cvqit;
using testing::diag;
using testing::max_abs_diff;

TEST_CASE("physicality of simple states") {
    CHECK(check_physicality(GaussianState::vacuum(1)));
    CHECK(check_physicality(GaussianState::vacuum(3)));
    CHECK(check_physicality(GaussianState(Vec::Zero(2), 3.0 * Mat::Identity(2, 2))));
    CHECK_FALSE(check_physicality(GaussianState(Vec::Zero(2), 0.5 * Mat::Identity(2, 2))));
    CHECK(check_physicality(GaussianState::squeezed(1.3)));
    CHECK(check_physicality(GaussianState::tms(0.8)));
    // correlations too strong for the local noise
    Mat g = Mat::Identity(4, 4);
    g(0, 2) = g(2, 0) = 0.5;
    g(1, 3) = g(3, 1) = 0.5;
    CHECK_FALSE(check_physicality(GaussianState(Vec::Zero(4), g)));
}

TEST_CASE("constructor rejects malformed input") {
    CHECK_THROWS_AS(GaussianState(Vec::Zero(3), Mat::Identity(3, 3)), DimensionError);
    CHECK_THROWS_AS(GaussianState(Vec::Zero(2), Mat::Identity(4, 4)), DimensionError);
    Mat g = Mat::Identity(2, 2);
    g(0, 1) = 0.3;
    CHECK_THROWS(GaussianState(Vec::Zero(2), g));
}

TEST_CASE("symplectic spectrum") {
    auto v = symplectic_spectrum(Mat::Identity(4, 4));
    REQUIRE(v.size() == 2);
    CHECK(v[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(v[1] == doctest::Approx(1.0).epsilon(1e-12));
    auto t = symplectic_spectrum(5.0 * Mat::Identity(2, 2));
    CHECK(t[0] == doctest::Approx(5.0).epsilon(1e-12));
    for (double nu : symplectic_spectrum(GaussianState::tms(0.5).gamma()))
        CHECK(nu == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("purity") {
    CHECK(purity(GaussianState::vacuum(2)) == doctest::Approx(1.0));
    CHECK(purity(GaussianState::thermal(3.0)) == doctest::Approx(1.0 / 3.0));
    CHECK(purity(GaussianState::tms(1.1)) == doctest::Approx(1.0).epsilon(1e-10));
    // two copies of thermal noise 2 on each of three modes
    CHECK(purity(GaussianState(Vec::Zero(6), 2.0 * Mat::Identity(6, 6))) == doctest::Approx(0.125));
}

TEST_CASE("fidelity closed forms") {
    auto vac = GaussianState::vacuum(1);
    CHECK(fidelity(vac, vac) == doctest::Approx(1.0).epsilon(1e-12));
    auto coh = GaussianState::coherent(0.7, -1.2);
    CHECK(fidelity(coh, vac) == doctest::Approx(std::exp(-(0.49 + 1.44) / 2.0)).epsilon(1e-10));
    CHECK(fidelity(GaussianState::squeezed(0.5), vac) == doctest::Approx(1.0 / std::cosh(0.5)).epsilon(1e-10));
    auto a = GaussianState::tms(0.4);
    CHECK(fidelity(a, a) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(fidelity(a, GaussianState::vacuum(2)) == doctest::Approx(1.0 / (std::cosh(0.4) * std::cosh(0.4))).epsilon(1e-8));
}

TEST_CASE("fidelity is symmetric and bounded on random states") {
    Rng rng(11);
    for (int k = 0; k < 100; ++k) {
        auto a = random_state(2, rng, true);
        auto b = random_state(2, rng);
        double f1 = fidelity(a, b), f2 = fidelity(b, a);
        CHECK(f1 == doctest::Approx(f2).epsilon(1e-8));
        CHECK(f1 >= 0.0);
        CHECK(f1 <= 1.0 + 1e-9);
    }
}

TEST_CASE("partial trace") {
    double r = 0.6;
    auto red = reduce(GaussianState::tms(r), {0});
    CHECK(max_abs_diff(red.gamma(), std::cosh(2 * r) * Mat::Identity(2, 2)) < 1e-12);
    auto prod = tensor(GaussianState::thermal(3.0), GaussianState::squeezed(0.5));
    CHECK(max_abs_diff(prod.gamma(), diag({3, 3, std::exp(-1.0), std::exp(1.0)})) < 1e-12);
    CHECK(max_abs_diff(reduce(prod, {0}).gamma(), 3.0 * Mat::Identity(2, 2)) < 1e-12);
    CHECK(max_abs_diff(reduce(prod, {1}).gamma(), GaussianState::squeezed(0.5).gamma()) < 1e-12);
    CHECK_THROWS(reduce(prod, {2}));
}

TEST_CASE("tensor then reduce recovers the factors on random states") {
    Rng rng(5);
    for (int k = 0; k < 100; ++k) {
        auto a = random_state(1, rng);
        auto b = random_state(2, rng);
        auto t = tensor(a, b);
        CHECK(max_abs_diff(reduce(t, {0}).gamma(), a.gamma()) < 1e-12);
        CHECK(max_abs_diff(reduce(t, {1, 2}).gamma(), b.gamma()) < 1e-12);
        CHECK(max_abs_diff(reduce(t, {1, 2}).d(), b.d()) < 1e-12);
    }
}

TEST_CASE("standard form") {
    double r = 0.7;
    auto sf = standard_form(GaussianState::tms(r));
    CHECK(sf.lambda_a == doctest::Approx(std::cosh(2 * r)));
    CHECK(sf.lambda_b == doctest::Approx(std::cosh(2 * r)));
    CHECK(sf.c_x == doctest::Approx(std::sinh(2 * r)));
    CHECK(sf.c_p == doctest::Approx(-std::sinh(2 * r)));

    auto vac = standard_form(GaussianState::vacuum(2));
    CHECK(vac.c_x == doctest::Approx(0.0));
    CHECK(vac.c_p == doctest::Approx(0.0));

    // local rotations and squeezings leave the standard form unchanged
    auto rotated = apply(phase_shift(0.3).embed(2, {0}).then(squeeze(0.2).embed(2, {1})), GaussianState::tms(r));
    auto sr = standard_form(rotated);
    CHECK(std::abs(sr.c_x - sf.c_x) < 1e-9);
    CHECK(std::abs(sr.c_p - sf.c_p) < 1e-9);
}

TEST_CASE("standard form state reproduces local invariants") {
    Rng rng(21);
    for (int k = 0; k < 100; ++k) {
        auto s = random_state(2, rng);
        auto sf = standard_form(s);
        auto g = sf.state().gamma();
        auto h = s.gamma();
        CHECK(g.determinant() == doctest::Approx(h.determinant()).epsilon(1e-8));
        CHECK(g.topLeftCorner(2, 2).determinant() == doctest::Approx(h.topLeftCorner(2, 2).determinant()).epsilon(1e-8));
        CHECK(g.bottomRightCorner(2, 2).determinant() ==
              doctest::Approx(h.bottomRightCorner(2, 2).determinant()).epsilon(1e-8));
        CHECK(std::abs(g.topRightCorner(2, 2).determinant() - h.topRightCorner(2, 2).determinant()) <
              1e-8 * (1 + std::abs(h.determinant())));
    }
}

TEST_CASE("schmidt spectrum") {
    double r = 0.45;
    auto s = schmidt_spectrum(GaussianState::tms(r), ModePartition::split({0}, {1}));
    REQUIRE(s.size() == 1);
    CHECK(s[0] == doctest::Approx(std::cosh(2 * r)));
    auto p = schmidt_spectrum(GaussianState::vacuum(2), ModePartition::split({0}, {1}));
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK_THROWS(schmidt_spectrum(GaussianState::thermal(2.0), ModePartition::split({0}, {})));
}

TEST_CASE("purification") {
    auto th = GaussianState::thermal(3.0);
    auto pur = purification(th);
    CHECK(pur.modes() == 2);
    CHECK(purity(pur) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(max_abs_diff(reduce(pur, {0}).gamma(), th.gamma()) < 1e-10);
    auto s = schmidt_spectrum(pur, ModePartition::split({0}, {1}));
    CHECK(s[0] == doctest::Approx(3.0));
    CHECK(purification(GaussianState::vacuum(1)).modes() >= 1);
}

TEST_CASE("purification of random mixed states") {
    Rng rng(8);
    for (int k = 0; k < 100; ++k) {
        auto s = random_state(2, rng);
        auto p = purification(s);
        CHECK(purity(p) == doctest::Approx(1.0).epsilon(1e-7));
        Modes keep{0, 1};
        CHECK(max_abs_diff(reduce(p, keep).gamma(), s.gamma()) < 1e-8);
    }
}

TEST_CASE("variance uses vacuum normalization") {
    Vec l = Vec::Zero(2);
    l(0) = 1;
    CHECK(variance(GaussianState::vacuum(1), l) == doctest::Approx(0.5));
    CHECK(variance(GaussianState::squeezed(0.5), l) == doctest::Approx(0.5 * std::exp(-1.0)));
    CHECK_THROWS_AS(variance(GaussianState::vacuum(2), l), DimensionError);
}

TEST_CASE("json round trip") {
    Rng rng(3);
    auto s = random_state(3, rng);
    auto back = GaussianState::from_json(s.to_json());
    CHECK(max_abs_diff(back.gamma(), s.gamma()) == 0.0);
    CHECK(max_abs_diff(back.d(), s.d()) == 0.0);
}

TEST_CASE("random states are physical and random symplectics preserve the form") {
    Rng rng(99);
    for (int k = 0; k < 100; ++k) {
        int n = 1 + k % 3;
        CHECK(check_physicality(random_state(n, rng)));
        Mat S = random_symplectic(n, rng);
        CHECK(max_abs_diff(S * omega(n) * S.transpose(), omega(n)) < 1e-9);
    }
}

TEST_CASE("symmetric three mode resource") {
    const double a = 1.2;
    Mat g = broadcast::gamma_a(a);
    GaussianState s(Vec::Zero(6), g);
    CHECK(check_physicality(s));
    double b = g(1, 1);
    CHECK(max_abs_diff(reduce(s, {1}).gamma(), diag({a, b})) < 1e-15);
    CHECK(purity(GaussianState(Vec::Zero(4), 2.0 * Mat::Identity(4, 4))) == doctest::Approx(0.25));
    // 1|23 Schmidt value equals the single symplectic eigenvalue of the reduced mode
    auto sch = schmidt_spectrum(s, ModePartition::split({0}, {1, 2}));
    REQUIRE(sch.size() == 1);
    CHECK(sch[0] == doctest::Approx(std::sqrt(a * b)).epsilon(1e-10));
    CHECK(sch[0] == doctest::Approx(symplectic_spectrum(reduce(s, {0}).gamma())[0]).epsilon(1e-10));
}

TEST_CASE("purification edge cases") {
    auto v = purification(GaussianState::vacuum(1));
    CHECK(purity(v) == doctest::Approx(1.0));
    if (v.modes() == 2) CHECK(v.gamma().topRightCorner(2, 2).cwiseAbs().maxCoeff() < 1e-12);
    const double nu = 5.0;
    auto sf = standard_form(purification(GaussianState::thermal(nu)));
    CHECK(sf.lambda_a == doctest::Approx(nu));
    CHECK(sf.lambda_b == doctest::Approx(nu));
    CHECK(std::abs(sf.c_x) == doctest::Approx(std::sqrt(nu * nu - 1)));
    CHECK(sf.c_p == doctest::Approx(-sf.c_x));
}

TEST_CASE("identity transform and vacuum homodyne") {
    Rng rng(71);
    auto s = random_state(2, rng);
    auto t = apply(SymplecticTransform::identity(2), s);
    CHECK(max_abs_diff(t.gamma(), s.gamma()) == 0.0);
    auto h = homodyne(GaussianState::vacuum(2), {1}, {0.0}, std::vector<double>{0.9}, rng);
    CHECK(max_abs_diff(h.post_state.gamma(), Mat::Identity(2, 2)) < 1e-15);
    CHECK(h.post_state.d().cwiseAbs().maxCoeff() < 1e-15);
}
