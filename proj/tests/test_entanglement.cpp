#include "cvqit/atomlight.hpp"
#include "cvqit/broadcast.hpp"
#include "cvqit/core.hpp"
#include "cvqit/entanglement.hpp"
#include "cvqit/ops.hpp"
#include "doctest.h"
#include "helpers.hpp"

#include <cmath>

using namespace cvqit;

namespace {

const ModePartition kAB = ModePartition::split({0}, {1});

// product of random single-mode states with extra classical noise, hence separable
GaussianState random_separable(Rng& rng) {
    auto a = random_state(1, rng);
    auto b = random_state(1, rng);
    auto prod = tensor(a, b);
    std::normal_distribution<double> nd;
    Vec v(4);
    for (int i = 0; i < 4; ++i) v(i) = nd(rng);
    return GaussianState(prod.d(), prod.gamma() + 0.3 * v * v.transpose());
}

}  // namespace

TEST_CASE("nppt on simple states") {
    CHECK_FALSE(is_nppt(GaussianState::vacuum(2), kAB));
    CHECK(is_nppt(GaussianState::tms(0.3), kAB));
    CHECK_FALSE(is_nppt(tensor(GaussianState::squeezed(1.0), GaussianState::thermal(2.0)), kAB));
}

TEST_CASE("log negativity of the tms state") {
    for (double r : {0.1, 0.5, 1.2}) {
        CHECK(log_negativity(GaussianState::tms(r), kAB) == doctest::Approx(2 * r / std::log(2.0)).epsilon(1e-10));
        CHECK(negativity(GaussianState::tms(r), kAB) == doctest::Approx((std::exp(2 * r) - 1) / 2).epsilon(1e-10));
    }
    CHECK(log_negativity(GaussianState::tms(std::log(2.0) / 2), kAB) == doctest::Approx(1.0));
    CHECK(log_negativity(GaussianState::vacuum(2), kAB) == doctest::Approx(0.0));
}

TEST_CASE("entropy of entanglement") {
    CHECK(entropy_of_entanglement(GaussianState::vacuum(2), kAB) == doctest::Approx(0.0));
    double r = 0.8;
    double c = std::cosh(r), s = std::sinh(r);
    double expect = c * c * std::log2(c * c) - s * s * std::log2(s * s);
    CHECK(entropy_of_entanglement(GaussianState::tms(r), kAB) == doctest::Approx(expect).epsilon(1e-10));
    double prev = -1;
    for (double x = 0.1; x < 2; x += 0.2) {
        double e = entropy_of_entanglement(GaussianState::tms(x), kAB);
        CHECK(e > prev);
        prev = e;
    }
}

TEST_CASE("duan test") {
    auto vac = duan_test(GaussianState::vacuum(2), 1.0);
    CHECK(vac.lhs == doctest::Approx(2.0));
    CHECK_FALSE(vac.violated);
    // a pi phase on mode 2 turns the fixed operators into x1 - x2, p1 + p2
    auto flipped = apply(phase_shift(M_PI).embed(2, {1}), GaussianState::tms(0.5));
    auto t = duan_test(flipped, 1.0);
    CHECK(t.lhs == doctest::Approx(2 * std::exp(-1.0)));
    CHECK(t.violated);
    CHECK_THROWS(duan_test(GaussianState::vacuum(2), 0.0));
}

TEST_CASE("optimal duan test agrees with ppt on random states") {
    Rng rng(31);
    for (int k = 0; k < 100; ++k) {
        auto s = random_state(2, rng);
        CHECK(duan_optimal(s).result.violated == is_nppt(s, kAB));
    }
}

TEST_CASE("separable states never violate the duan bound") {
    Rng rng(32);
    for (int k = 0; k < 100; ++k) {
        auto s = random_separable(rng);
        CHECK_FALSE(is_nppt(s, kAB));
        CHECK_FALSE(duan_optimal(s).result.violated);
    }
}

TEST_CASE("log negativity is invariant under local symplectics") {
    Rng rng(33);
    for (int k = 0; k < 100; ++k) {
        auto s = random_state(2, rng);
        Mat S = Mat::Zero(4, 4);
        S.topLeftCorner(2, 2) = random_symplectic(1, rng, 0.5);
        S.bottomRightCorner(2, 2) = random_symplectic(1, rng, 0.5);
        auto t = apply(SymplecticTransform(S), s);
        double a = log_negativity(s, kAB), b = log_negativity(t, kAB);
        INFO("diff " << a - b);
        CHECK(std::abs(a - b) < 1e-8);
    }
}

TEST_CASE("tripartite classification") {
    auto vt = tensor(GaussianState::vacuum(1), GaussianState::tms(0.4));
    CHECK(classify_tripartite(vt) == TripartiteClass::OneModeBiseparable);
    CHECK(classify_tripartite(GaussianState::vacuum(3)) == TripartiteClass::BoundOrSeparable);
    auto sym = apply(tritter(), tensor(GaussianState::squeezed(0.5),
                                       tensor(GaussianState::squeezed(-0.5), GaussianState::squeezed(-0.5))));
    CHECK(classify_tripartite(sym) == TripartiteClass::FullyInseparable);
    CHECK(std::string(to_string(TripartiteClass::FullyInseparable)).size() > 0);
}

TEST_CASE("van loock furusawa inequality") {
    auto vac = van_loock_furusawa(GaussianState::vacuum(2), {1, -1}, {1, 1}, kAB);
    CHECK(vac.lhs == doctest::Approx(2.0));
    CHECK(vac.bound == doctest::Approx(2.0));
    CHECK_FALSE(vac.violated);
    auto t = van_loock_furusawa(GaussianState::tms(0.5), {1, -1}, {1, 1}, kAB);
    CHECK(t.lhs == doctest::Approx(2 * std::exp(-1.0)));
    CHECK(t.violated);
    CHECK_THROWS(van_loock_furusawa(GaussianState::vacuum(3), {1, 1, 1}, {1, 1, 1}, kAB));
}

TEST_CASE("three mode log negativity of a tms next to vacuum") {
    auto vt = tensor(GaussianState::vacuum(1), GaussianState::tms(0.4));
    CHECK(log_negativity(vt, ModePartition::split({0}, {1, 2})) == doctest::Approx(0.0));
    CHECK(log_negativity(vt, ModePartition::split({1}, {0, 2})) ==
          doctest::Approx(0.8 / std::log(2.0)).epsilon(1e-10));
}

TEST_CASE("symmetric resource is entangled across every single mode cut") {
    GaussianState s(Vec::Zero(6), broadcast::gamma_a(1.5));
    for (int k = 0; k < 3; ++k) CHECK(is_nppt(s, ModePartition::split({k}, complement(3, {k}))));
    CHECK(classify_tripartite(GaussianState(Vec::Zero(6), broadcast::gamma_a(1.2))) == TripartiteClass::FullyInseparable);
    CHECK(classify_tripartite(GaussianState(Vec::Zero(6), broadcast::gamma_a(1.0))) == TripartiteClass::BoundOrSeparable);
}

TEST_CASE("atom light states against the criteria") {
    Rng rng(34);
    auto reg = atomlight::pulse_and_measure(atomlight::EnsembleRegister::vacuum(2),
                                            atomlight::InterfaceConfig::uniform(2, 1.0, 0.0), rng);
    CHECK(negativity(reg.state, kAB) > 0.1);

    const std::vector<double> h{1, -1, 0}, g{1, 1, 1};
    const auto cut = ModePartition::split({0}, {1, 2});
    CHECK_FALSE(van_loock_furusawa(GaussianState::vacuum(3), {1, 1, 1}, {1, 1, 1}, cut).violated);
    auto ghz = atomlight::build_ghz(3, 1.0, atomlight::GhzMode::Pairwise, rng);
    CHECK(van_loock_furusawa(ghz.state, h, g, cut).violated);
    auto erased = atomlight::eraser_pipeline(3, 1.0, atomlight::eraser_kappa2(1.0, 3), rng);
    CHECK_FALSE(van_loock_furusawa(erased.state, h, g, cut).violated);
}
