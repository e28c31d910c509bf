#pragma once

#include "cvqit/core.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>

namespace cvqit::broadcast {

// fully symmetric three-mode CM gamma(a): x-x couplings c, p-p couplings -c
Mat gamma_a(double a);

struct TripartiteResource {
    double a = 1;
    double n = 1;
    double b = 1;
    double c = 0;
    GaussianState state = GaussianState::vacuum(3);  // n * gamma(a), zero displacement

    // d = -(x0/3)(1,0,1,0,1,0)
    static Vec displacement(double x0);
};

// squeezed thermal inputs through the tritter; s is the smaller root of s^2 - 3as + 2 = 0
GaussianState tritter_resource(double a, double n);
TripartiteResource make_resource(double a, double n = 1);

// bit patterns are indexed by (b_S << 2) | (b_R0 << 1) | b_R1, bit 1 meaning a negative outcome
using Patterns = std::array<double, 8>;
constexpr int pattern_index(int bs, int br0, int br1) { return (bs << 2) | (br0 << 1) | br1; }
bool consistent_pattern(int idx);

struct PrimitiveProbabilities {
    // absolute overlaps; infinite density when sigma == 0
    double p = 0, delta1 = 0, delta2 = 0, delta3 = 0;
    double tilde_p = 0, tilde_delta1 = 0, tilde_delta2 = 0, tilde_delta3 = 0;
    Patterns tilde{};
};

PrimitiveProbabilities primitive_probs(const TripartiteResource& res, double x0, double sigma);

// conditional pattern distribution from the Gaussian overlap with pointer states of width
// sigma at +-x0 (sender) and +-(x0+delta) (receivers), for an arbitrary displacement
Patterns pattern_probs(const TripartiteResource& res, double x0, double sigma, double delta, const Vec& d);

double ptilde_realistic(double a, double n, double sigma, double x0, double delta);
double eta_bound(double ptilde);
constexpr double a_thresh() { return 0.5 * 5.0 * 1.4142135623730951 / 3.0; }

// crossover of tilde p against the largest tilde delta at fixed x0, sigma = 0, n = 1
double threshold_crossover(double x0, double lo = 1.0 + 1e-9, double hi = 3.0);

struct SigmaModel {
    enum Kind { Const, Prop } kind = Const;
    double value = 0;
    double sigma(double x0) const { return kind == Const ? value : value * x0; }
};

struct RegionPoint {
    double x0n = 0, deltan = 0;
    std::optional<double> a_min, a_max;
    double eta = 1;  // error bound at the largest tilde p over the useful range
    bool feasible = false;
};

RegionPoint useful_region_point(double epsilon, const SigmaModel& sm, double x0n, double deltan);
std::vector<RegionPoint> useful_region(double epsilon, const SigmaModel& sm, const std::vector<double>& x0n,
                                       const std::vector<double>& deltan);

enum class Trit { Zero = 0, One = 1, Two = 2, U = 3 };
Trit trit_encode(int first, int second);
const char* to_string(Trit t);

// ---- protocol engine ----

enum class Role { Sender = 0, Receiver0 = 1, Receiver1 = 2 };
const char* to_string(Role r);

enum class StrategyKind {
    Honest,
    Shift,              // displaces the traitor's own mode by a factor lambda before measuring
    SenderEquivocate,   // sender sends different bits, consistent index sets
    SenderForge,        // sender sends different bits and random index sets
    ReceiverLie,        // receiver flips its flag and forges the index proof
    FlagSpoil,          // traitor reports failure to one party and success to the other
    HideZeros,          // traitor drops announced hits where its bit is 0
};
const char* to_string(StrategyKind k);

struct Strategy {
    Role traitor = Role::Receiver0;
    StrategyKind kind = StrategyKind::Honest;
    double lambda = 1;
};

Strategy traitor_strategy_shift(double lambda, Role traitor = Role::Receiver0);
// displacement seen after the traitor's local shift
Vec shifted_displacement(double x0, const Strategy& st);

struct ProtocolConfig {
    double x0 = 3;
    double sigma = 0.2;
    double delta = 0;
    int M_states = 20000;
    std::uint64_t seed = 1;
    int bit = 0;  // the sender's order
    double z = 4;  // test threshold in standard errors
    double test_fraction = 0.05;
    int min_test = 30;
};

struct Message {
    int round = 0;
    std::string from, to, kind;
    std::int64_t size = 0;
};

struct PartyOutcome {
    Role role;
    bool honest = true;
    bool aborted = false;
    int decision = -1;  // receivers only
    std::string reason;
};

struct ProtocolTranscript {
    std::vector<Message> log;
    std::array<PartyOutcome, 3> parties{};
    enum class Verdict { Agreement, Abort, Inconsistent } verdict = Verdict::Abort;
    int agreed_bit = -1;
    std::string abort_reason;
    std::array<std::int64_t, 8> observed_counts{};  // honest view of revealed control samples

    bool contradictory() const;
    nlohmann::json to_json() const;
};

ProtocolTranscript run_protocol(const TripartiteResource& res, const ProtocolConfig& cfg,
                                const Strategy& strategy = {});

}  // namespace cvqit::broadcast
