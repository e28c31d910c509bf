#pragma once

#include "cvqit/core.hpp"

#include <optional>

namespace cvqit {

class SymplecticTransform {
public:
    explicit SymplecticTransform(Mat S);
    SymplecticTransform(Mat S, Vec s);

    static SymplecticTransform identity(int modes);
    static SymplecticTransform displacement(const Vec& s);

    int modes() const { return static_cast<int>(S_.rows() / 2); }
    const Mat& matrix() const { return S_; }
    const Vec& translation() const { return s_; }

    // embed a k-mode transform acting on `targets` inside an n-mode identity
    SymplecticTransform embed(int n, const Modes& targets) const;
    SymplecticTransform then(const SymplecticTransform& next) const;
    double symplectic_defect() const;

private:
    Mat S_;
    Vec s_;
};

SymplecticTransform phase_shift(double theta);
SymplecticTransform squeeze(double r);
SymplecticTransform beam_splitter(double theta);
SymplecticTransform two_mode_squeeze(double r);
SymplecticTransform tritter();

GaussianState apply(const SymplecticTransform& t, const GaussianState& s);

struct HomodyneOutcome {
    Modes measured;
    std::vector<double> angles;
    std::vector<double> outcomes;
    GaussianState post_state;

    nlohmann::json to_json() const;
};

// measures x cos(angle) + p sin(angle) on each listed mode
HomodyneOutcome homodyne(const GaussianState& s, const Modes& measured,
                         const std::vector<double>& angles,
                         const std::optional<std::vector<double>>& outcomes, Rng& rng);

struct GaussianChannel {
    Mat Gamma;
    Vec Delta;
    int input_modes;
    int output_modes;
};

GaussianState apply_channel(const GaussianChannel& ch, const GaussianState& s);

GaussianChannel identity_channel(int modes, double r = 10.0);

// Choi data of an x-homodyne on `measured` with result `outcomes`; output keeps the
// remaining modes in order. Finite-squeezing approximation of the ideal map.
GaussianChannel homodyne_channel(int modes, const Modes& measured,
                                 const std::vector<double>& outcomes, double r = 10.0);

}  // namespace cvqit
