#pragma once

#include "cvqit/ops.hpp"

#include <string>
#include <utility>

namespace cvqit::atomlight {

// sample i carries (J_y, J_z) at phase-space indices (2i, 2i+1); during a pulse the light
// mode (S_y, S_z) is appended last
inline int y_index(int i) { return 2 * i; }
inline int z_index(int i) { return 2 * i + 1; }

struct InterfaceConfig {
    int samples = 2;
    double kappa = 0;
    std::vector<double> angles;  // one per sample

    static InterfaceConfig uniform(int samples, double kappa, double angle);
    void validate() const;
};

struct Stage {
    std::string label;
    GaussianState state;
};

struct EnsembleRegister {
    GaussianState state = GaussianState::vacuum(1);
    std::vector<double> outcomes;  // light homodyne results, one per pulse
    std::vector<Stage> trace;

    static EnsembleRegister vacuum(int samples);
    int samples() const { return state.modes(); }
};

// maps (y_i, z_i, S_y, S_z): y_i += k cos a_i S_z, z_i -= k sin a_i S_z, S_y += k sum(z_i cos a_i + y_i sin a_i)
SymplecticTransform pulse_symplectic(const InterfaceConfig& cfg);

// pulse, homodyne of S_y, light discarded; outcome drawn from rng unless given
EnsembleRegister pulse_and_measure(const EnsembleRegister& reg, const InterfaceConfig& cfg, Rng& rng,
                                   std::optional<double> outcome = std::nullopt, const std::string& label = "pulse");

double epr_squeezing(double kappa);
double eraser_kappa2(double kappa1, int samples);

// second pulse at angle pi/2 on every sample
EnsembleRegister eraser(const EnsembleRegister& after_first, double kappa2, Rng& rng);
// both pulses from vacuum
EnsembleRegister eraser_pipeline(int samples, double kappa1, double kappa2, Rng& rng);

enum class GhzMode { SinglePulse, Pairwise, OptimalEven };
EnsembleRegister build_ghz(int samples, double kappa, GhzMode mode, Rng& rng);

struct Graph {
    int vertices = 0;
    std::vector<std::pair<int, int>> edges;

    std::vector<std::vector<int>> neighbours() const;
    bool connected() const;
    static Graph path(int n);
};

struct ClusterResult {
    EnsembleRegister reg;
    std::vector<double> variances;  // per vertex, in units of the vacuum value of the same variable
    bool connected = true;
};

// coefficient vector of J_z'(a) - sum_b J_y'(b), with J_y' = (J_y - J_z)/sqrt2, J_z' = (J_y + J_z)/sqrt2
Vec cluster_variable(const Graph& g, int a);
ClusterResult build_cluster(const Graph& g, double kappa, Rng& rng);

// l^T (gamma/2) l for each form
std::vector<double> verify_variances(const EnsembleRegister& reg, const std::vector<Vec>& forms);

Vec sum_z(int samples);
Vec sum_y(int samples);
Vec y_difference(int samples, int i, int j);
Vec alternating_y(int samples);

}  // namespace cvqit::atomlight
