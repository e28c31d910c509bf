#include "cvqit/core.hpp"
#include "cvqit/ops.hpp"
#include "doctest.h"
#include "helpers.hpp"

#include <cmath>

using namespace cvqit;
using testing::diag;
using testing::max_abs_diff;

TEST_CASE("elementary transforms are symplectic") {
    CHECK(squeeze(0.7).symplectic_defect() < 1e-12);
    CHECK(phase_shift(1.1).symplectic_defect() < 1e-12);
    CHECK(beam_splitter(0.4).symplectic_defect() < 1e-12);
    CHECK(two_mode_squeeze(0.9).symplectic_defect() < 1e-12);
    CHECK(tritter().symplectic_defect() < 1e-12);
    CHECK(max_abs_diff(squeeze(0).matrix(), Mat::Identity(2, 2)) < 1e-15);
}

TEST_CASE("squeezing and displacing the vacuum") {
    auto s = apply(squeeze(0.5), GaussianState::vacuum(1));
    CHECK(max_abs_diff(s.gamma(), diag({std::exp(-1.0), std::exp(1.0)})) < 1e-12);
    Vec d(2);
    d << 0.3, -0.4;
    auto c = apply(SymplecticTransform::displacement(d), GaussianState::vacuum(1));
    CHECK(fidelity(c, GaussianState::coherent(0.3, -0.4)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("two-mode squeezer produces the tms state") {
    auto s = apply(two_mode_squeeze(0.6), GaussianState::vacuum(2));
    CHECK(max_abs_diff(s.gamma(), GaussianState::tms(0.6).gamma()) < 1e-12);
}

TEST_CASE("embed and compose") {
    auto t = squeeze(0.3).embed(3, {1});
    CHECK(t.modes() == 3);
    CHECK(t.symplectic_defect() < 1e-12);
    auto u = t.then(beam_splitter(0.2).embed(3, {0, 2}));
    CHECK(u.symplectic_defect() < 1e-12);
    CHECK_THROWS(squeeze(0.3).embed(2, {2}));
}

TEST_CASE("homodyne of one half of a tms") {
    Rng rng(1);
    double r = 0.5;
    auto out = homodyne(GaussianState::tms(r), {1}, {0.0}, std::vector<double>{0.0}, rng);
    CHECK(out.post_state.modes() == 1);
    CHECK(max_abs_diff(out.post_state.gamma(), diag({1 / std::cosh(2 * r), std::cosh(2 * r)})) < 1e-12);
    // momentum measurement squeezes the other quadrature
    auto outp = homodyne(GaussianState::tms(r), {1}, {M_PI / 2}, std::vector<double>{0.0}, rng);
    CHECK(max_abs_diff(outp.post_state.gamma(), diag({std::cosh(2 * r), 1 / std::cosh(2 * r)})) < 1e-10);
}

TEST_CASE("homodyne on a product state leaves the rest alone") {
    Rng rng(2);
    auto prod = tensor(GaussianState::squeezed(0.4), GaussianState::thermal(2.0));
    auto out = homodyne(prod, {1}, {0.0}, std::nullopt, rng);
    CHECK(max_abs_diff(out.post_state.gamma(), GaussianState::squeezed(0.4).gamma()) < 1e-12);
    CHECK(out.outcomes.size() == 1);
}

TEST_CASE("homodyne post covariance does not depend on the outcome") {
    Rng rng(4);
    for (int k = 0; k < 100; ++k) {
        auto s = random_state(3, rng);
        auto a = homodyne(s, {2}, {0.3}, std::vector<double>{0.0}, rng);
        auto b = homodyne(s, {2}, {0.3}, std::vector<double>{1.7}, rng);
        CHECK(max_abs_diff(a.post_state.gamma(), b.post_state.gamma()) < 1e-12);
        CHECK(check_physicality(a.post_state));
    }
}

TEST_CASE("identity channel is close to the identity") {
    Rng rng(6);
    for (int k = 0; k < 20; ++k) {
        auto s = random_state(2, rng);
        auto out = apply_channel(identity_channel(2), s);
        CHECK(max_abs_diff(out.gamma(), s.gamma()) < 1e-6 * (1 + s.gamma().norm()));
    }
}

TEST_CASE("homodyne channel agrees with the direct measurement") {
    Rng rng(7);
    for (int k = 0; k < 50; ++k) {
        auto s = random_state(2, rng, false, 0.5);
        auto direct = homodyne(s, {1}, {0.0}, std::vector<double>{0.4}, rng);
        auto ch = homodyne_channel(2, {1}, {0.4});
        auto out = apply_channel(ch, s);
        CHECK(out.modes() == 1);
        CHECK(max_abs_diff(out.gamma(), direct.post_state.gamma()) < 1e-5);
        CHECK(max_abs_diff(out.d(), direct.post_state.d()) < 1e-5);
        CHECK(check_physicality(out));
    }
}

TEST_CASE("tritter on squeezed thermal inputs gives a symmetric resource") {
    double s = 0.6;
    Mat in = Mat::Zero(6, 6);
    in.block(0, 0, 2, 2) = diag({s, 1 / s});
    in.block(2, 2, 2, 2) = diag({1 / s, s});
    in.block(4, 4, 2, 2) = diag({1 / s, s});
    auto out = apply(tritter(), GaussianState(Vec::Zero(6), in));
    Mat g = out.gamma();
    double a = (s * s + 2) / (3 * s);
    for (int i = 0; i < 3; ++i) CHECK(g(2 * i, 2 * i) == doctest::Approx(a));
    CHECK(std::abs(g(0, 2) - g(2, 4)) < 1e-12);
    CHECK(std::abs(g(1, 3) + g(0, 2)) < 1e-12);
}
