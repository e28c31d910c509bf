#include "cvqit/ops.hpp"

#include <cmath>

namespace cvqit {

SymplecticTransform::SymplecticTransform(Mat S) : S_(std::move(S)), s_(Vec::Zero(S_.rows())) {
    if (S_.rows() != S_.cols() || S_.rows() % 2) throw DimensionError("symplectic matrix shape");
}

SymplecticTransform::SymplecticTransform(Mat S, Vec s) : S_(std::move(S)), s_(std::move(s)) {
    if (S_.rows() != S_.cols() || S_.rows() % 2 || s_.size() != S_.rows())
        throw DimensionError("symplectic transform shape");
}

SymplecticTransform SymplecticTransform::identity(int modes) {
    return SymplecticTransform(Mat::Identity(2 * modes, 2 * modes));
}

SymplecticTransform SymplecticTransform::displacement(const Vec& s) {
    return {Mat::Identity(s.size(), s.size()), s};
}

SymplecticTransform SymplecticTransform::embed(int n, const Modes& targets) const {
    if (static_cast<int>(targets.size()) != modes()) throw DimensionError("embed: target count");
    ModePartition{{targets}}.validate(n);
    Mat S = Mat::Identity(2 * n, 2 * n);
    Vec s = Vec::Zero(2 * n);
    for (size_t i = 0; i < targets.size(); ++i) {
        s.segment<2>(2 * targets[i]) = s_.segment<2>(2 * i);
        for (size_t k = 0; k < targets.size(); ++k)
            S.block<2, 2>(2 * targets[i], 2 * targets[k]) = S_.block<2, 2>(2 * i, 2 * k);
    }
    return {S, s};
}

SymplecticTransform SymplecticTransform::then(const SymplecticTransform& next) const {
    if (next.S_.rows() != S_.rows()) throw DimensionError("compose: dimension mismatch");
    return {next.S_ * S_, next.S_ * s_ + next.s_};
}

double SymplecticTransform::symplectic_defect() const {
    Mat J = omega(modes());
    return (S_.transpose() * J * S_ - J).cwiseAbs().maxCoeff();
}

SymplecticTransform phase_shift(double theta) {
    Mat S(2, 2);
    S << std::cos(theta), std::sin(theta), -std::sin(theta), std::cos(theta);
    return SymplecticTransform(S);
}

SymplecticTransform squeeze(double r) {
    Mat S = Mat::Zero(2, 2);
    S(0, 0) = std::exp(-r);
    S(1, 1) = std::exp(r);
    return SymplecticTransform(S);
}

SymplecticTransform beam_splitter(double theta) {
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    Mat S = Mat::Zero(4, 4);
    S(0, 0) = S(1, 1) = S(2, 2) = S(3, 3) = c;
    S(0, 2) = S(1, 3) = s;
    S(2, 0) = S(3, 1) = -s;
    return SymplecticTransform(S);
}

SymplecticTransform two_mode_squeeze(double r) {
    const double c = std::cosh(r), s = std::sinh(r);
    Mat S = Mat::Zero(4, 4);
    S(0, 0) = S(1, 1) = S(2, 2) = S(3, 3) = c;
    S(0, 2) = S(2, 0) = s;
    S(1, 3) = S(3, 1) = -s;
    return SymplecticTransform(S);
}

SymplecticTransform tritter() {
    const double a = 1 / std::sqrt(3.0), b = std::sqrt(2.0 / 3.0), c = 1 / std::sqrt(6.0), e = 1 / std::sqrt(2.0);
    Mat S = Mat::Zero(6, 6);
    for (int q = 0; q < 2; ++q) {
        S(0 + q, 0 + q) = a;
        S(0 + q, 2 + q) = b;
        S(2 + q, 0 + q) = a;
        S(2 + q, 2 + q) = -c;
        S(2 + q, 4 + q) = e;
        S(4 + q, 0 + q) = a;
        S(4 + q, 2 + q) = -c;
        S(4 + q, 4 + q) = -e;
    }
    return SymplecticTransform(S);
}

GaussianState apply(const SymplecticTransform& t, const GaussianState& s) {
    if (t.matrix().rows() != s.gamma().rows()) throw DimensionError("apply: dimension mismatch");
    Mat g = t.matrix() * s.gamma() * t.matrix().transpose();
    return {t.matrix() * s.d() + t.translation(), 0.5 * (g + g.transpose())};
}

nlohmann::json HomodyneOutcome::to_json() const {
    return {{"measured", measured}, {"angles", angles}, {"outcomes", outcomes}, {"post_state", post_state.to_json()}};
}

HomodyneOutcome homodyne(const GaussianState& s, const Modes& measured, const std::vector<double>& angles,
                         const std::optional<std::vector<double>>& outcomes, Rng& rng) {
    if (measured.empty()) throw PreconditionError("homodyne: empty measured set");
    if (angles.size() != measured.size()) throw DimensionError("homodyne: one angle per measured mode");
    ModePartition{{measured}}.validate(s.modes());
    Modes kept = complement(s.modes(), measured);
    if (kept.empty()) throw PreconditionError("homodyne: nothing left after measurement");

    GaussianState rot = s;
    for (size_t i = 0; i < measured.size(); ++i)
        rot = apply(phase_shift(angles[i]).embed(s.modes(), {measured[i]}), rot);

    const int nb = static_cast<int>(measured.size());
    Mat gA = gather(rot.gamma(), kept, kept);
    Mat gB = gather(rot.gamma(), measured, measured);
    Mat C = gather(rot.gamma(), kept, measured);
    Vec dA = gather(rot.d(), kept);
    Vec dB = gather(rot.d(), measured);

    Mat X = Mat::Zero(2 * nb, 2 * nb);
    for (int i = 0; i < nb; ++i) X(2 * i, 2 * i) = 1;
    Mat mp = pinv_sym(X * gB * X);

    std::vector<double> xs;
    if (outcomes) {
        if (static_cast<int>(outcomes->size()) != nb) throw DimensionError("homodyne: outcome count");
        xs = *outcomes;
    } else {
        Mat cov(nb, nb);
        Vec mean(nb);
        for (int i = 0; i < nb; ++i) {
            mean(i) = dB(2 * i);
            for (int k = 0; k < nb; ++k) cov(i, k) = 0.5 * gB(2 * i, 2 * k);
        }
        Mat L = Eigen::LLT<Mat>(cov).matrixL();
        std::normal_distribution<double> nd;
        Vec z(nb);
        for (int i = 0; i < nb; ++i) z(i) = nd(rng);
        Vec x = mean + L * z;
        xs.assign(x.data(), x.data() + nb);
    }
    Vec xv = Vec::Zero(2 * nb);
    for (int i = 0; i < nb; ++i) xv(2 * i) = xs[i];

    Mat gp = gA - C * mp * C.transpose();
    Vec dp = dA + C * mp * (xv - dB);
    return {measured, angles, xs, GaussianState(dp, 0.5 * (gp + gp.transpose()))};
}

GaussianState apply_channel(const GaussianChannel& ch, const GaussianState& s) {
    const int na = ch.output_modes, nb = ch.input_modes;
    if (s.modes() != nb) throw DimensionError("apply_channel: input mode count mismatch");
    if (ch.Gamma.rows() != 2 * (na + nb) || ch.Delta.size() != 2 * (na + nb))
        throw DimensionError("apply_channel: Choi dimensions");
    Mat T = Mat::Identity(2 * (na + nb), 2 * (na + nb));
    for (int i = 0; i < nb; ++i) T(2 * (na + i) + 1, 2 * (na + i) + 1) = -1;
    Mat Gt = T * ch.Gamma * T;
    Mat GA = Gt.topLeftCorner(2 * na, 2 * na);
    Mat GAB = Gt.topRightCorner(2 * na, 2 * nb);
    Mat M = Gt.bottomRightCorner(2 * nb, 2 * nb) + s.gamma();
    Eigen::FullPivLU<Mat> lu(M);
    if (!lu.isInvertible()) throw NumericError("apply_channel: singular Gamma_B + gamma");
    Mat g = GA - GAB * lu.solve(GAB.transpose());
    Vec d = ch.Delta.head(2 * na) + GAB * lu.solve(ch.Delta.tail(2 * nb) + s.d());
    return {d, 0.5 * (g + g.transpose())};
}

static void put_epr(Mat& G, int out, int in, double r) {
    const double c = std::cosh(2 * r), s = std::sinh(2 * r);
    G(2 * out, 2 * out) = G(2 * out + 1, 2 * out + 1) = c;
    G(2 * in, 2 * in) = G(2 * in + 1, 2 * in + 1) = c;
    G(2 * out, 2 * in) = G(2 * in, 2 * out) = s;
    G(2 * out + 1, 2 * in + 1) = G(2 * in + 1, 2 * out + 1) = -s;
}

GaussianChannel identity_channel(int modes, double r) {
    Mat G = Mat::Zero(4 * modes, 4 * modes);
    for (int i = 0; i < modes; ++i) put_epr(G, i, modes + i, r);
    return {G, Vec::Zero(4 * modes), modes, modes};
}

GaussianChannel homodyne_channel(int modes, const Modes& measured, const std::vector<double>& outcomes, double r) {
    if (measured.size() != outcomes.size()) throw DimensionError("homodyne_channel: outcome count");
    ModePartition{{measured}}.validate(modes);
    Modes kept = complement(modes, measured);
    const int na = static_cast<int>(kept.size());
    const int tot = na + modes;
    Mat G = Mat::Zero(2 * tot, 2 * tot);
    Vec D = Vec::Zero(2 * tot);
    for (int k = 0; k < na; ++k) put_epr(G, k, na + kept[k], r);
    // an x-squeezed ancilla on every measured input selects the x quadrature
    for (size_t i = 0; i < measured.size(); ++i) {
        int m = na + measured[i];
        G(2 * m, 2 * m) = std::exp(-2 * r);
        G(2 * m + 1, 2 * m + 1) = std::exp(2 * r);
        D(2 * m) = -outcomes[i];
    }
    return {G, D, modes, na};
}

}  // namespace cvqit
