#pragma once

#include "cvqit/core.hpp"

#include <cstdint>
#include <limits>

namespace cvqit::qkd {

// symmetric two-mode state with gamma_xx = [[l, cx],[cx, l]], gamma_pp = [[l, -cp],[-cp, l]]
struct QkdState {
    double lambda = 1;
    double c_x = 0;
    double c_p = 0;

    static QkdState tms(double r);
    GaussianState gaussian() const;
    bool physical(double tol = 1e-12) const;
    bool nppt() const;
    double log_negativity() const;
};

enum class Attack { Individual, FiniteCoherent };

struct JointProbabilities {
    double p_same = 0;
    double p_diff = 0;
    double K = 0;
};

JointProbabilities joint_probabilities(const QkdState& st, double x0a, double x0b, double sigma);
double error_probability(const QkdState& st, double x0a, double x0b);
double eve_overlap(const QkdState& st, double x0a, double x0b);
bool security_ok(const QkdState& st, double x0a, double x0b, Attack attack);
// left side of the reduced security inequality; negative means secure
double security_margin(const QkdState& st, double x0a, double x0b, Attack attack);

struct Interval {
    double lo = 0;  // bounds on x0B - x0A
    double hi = 0;
    double alpha_or_beta = 1;
    double D = 0;
    bool unbounded = false;
};

Interval acceptance_interval(const QkdState& st, double x0a, Attack attack);
double cad_error(double eps, int M);

struct QuadConfig {
    double cutoff_sigmas = 8.0;
    double tol = 1e-10;
    // scales the accepted ratio window about its centre; 1 is the secure interval
    double shrink = 1.0;
};

double efficiency(const QkdState& st, Attack attack, const QuadConfig& cfg = {});
// same integral over the explicit ratio window x0B/x0A in [t_lo, t_hi]
double efficiency_window(const QkdState& st, double t_lo, double t_hi, const QuadConfig& cfg = {});

struct KeyRunConfig {
    double x0a = 0;  // Alice discards rounds with |x_A| below this
    double sigma = 0;  // extra detector noise (standard deviation)
    int M = 1;
    std::int64_t samples = 100000;
    std::uint64_t seed = 1;
    Attack attack = Attack::Individual;
};

struct KeyRunResult {
    std::vector<std::uint8_t> raw_bits_A, raw_bits_B;
    double empirical_eps = 0;
    double predicted_eps = 0;  // mean error_probability over accepted rounds
    double accepted_fraction = 0;
    std::int64_t accepted = 0;
    double cad_eps = 0;
};

KeyRunResult simulate_key_run(const QkdState& st, const KeyRunConfig& cfg);

// fixed lambda, (c_x, c_p) uniform over the physical region, NPPT only
std::vector<QkdState> random_nppt_states(int count, double lambda, std::uint64_t seed);

}  // namespace cvqit::qkd
