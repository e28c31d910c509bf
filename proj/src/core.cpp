#include "cvqit/core.hpp"
#include "cvqit/ops.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace cvqit {

void ModePartition::validate(int n) const {
    std::set<int> seen;
    for (const auto& sub : subsets)
        for (int m : sub) {
            if (m < 0 || m >= n) throw DimensionError("mode index out of range");
            if (!seen.insert(m).second) throw DimensionError("partition subsets overlap");
        }
}

Mat omega(int modes) {
    Mat J = Mat::Zero(2 * modes, 2 * modes);
    for (int i = 0; i < modes; ++i) {
        J(2 * i, 2 * i + 1) = 1;
        J(2 * i + 1, 2 * i) = -1;
    }
    return J;
}

SymplecticForm::SymplecticForm(int modes) : n_(modes), J_(omega(modes)) {
    if (modes < 1) throw DimensionError("symplectic form needs at least one mode");
}

Mat theta_on(int modes, const Modes& transposed) {
    Mat T = Mat::Identity(2 * modes, 2 * modes);
    for (int m : transposed) T(2 * m + 1, 2 * m + 1) = -1;
    return T;
}

static void check_square_even(const Mat& g) {
    if (g.rows() != g.cols() || g.rows() == 0 || g.rows() % 2 != 0)
        throw DimensionError("covariance matrix must be square with even dimension");
}

GaussianState::GaussianState(Vec d, Mat gamma) : d_(std::move(d)), gamma_(std::move(gamma)) {
    check_square_even(gamma_);
    if (d_.size() != gamma_.rows()) throw DimensionError("displacement length does not match CM");
    if ((gamma_ - gamma_.transpose()).cwiseAbs().maxCoeff() > 1e-9 * (1 + gamma_.cwiseAbs().maxCoeff()))
        throw PreconditionError("covariance matrix is not symmetric");
    n_ = static_cast<int>(gamma_.rows() / 2);
}

GaussianState GaussianState::vacuum(int modes) {
    return {Vec::Zero(2 * modes), Mat::Identity(2 * modes, 2 * modes)};
}

GaussianState GaussianState::thermal(double nu) { return {Vec::Zero(2), nu * Mat::Identity(2, 2)}; }

GaussianState GaussianState::coherent(double q, double p) {
    Vec d(2);
    d << q, p;
    return {d, Mat::Identity(2, 2)};
}

GaussianState GaussianState::squeezed(double r) { return apply(squeeze(r), vacuum(1)); }

GaussianState GaussianState::tms(double r) { return apply(two_mode_squeeze(r), vacuum(2)); }

nlohmann::json GaussianState::to_json() const {
    nlohmann::json j;
    j["modes"] = n_;
    j["d"] = std::vector<double>(d_.data(), d_.data() + d_.size());
    auto rows = nlohmann::json::array();
    for (int i = 0; i < gamma_.rows(); ++i) {
        std::vector<double> row(gamma_.cols());
        for (int k = 0; k < gamma_.cols(); ++k) row[k] = gamma_(i, k);
        rows.push_back(row);
    }
    j["gamma"] = rows;
    return j;
}

GaussianState GaussianState::from_json(const nlohmann::json& j) {
    int n = j.at("modes").get<int>();
    auto dv = j.at("d").get<std::vector<double>>();
    auto g = j.at("gamma").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(dv.size()) != 2 * n || static_cast<int>(g.size()) != 2 * n)
        throw DimensionError("state JSON has inconsistent dimensions");
    Vec d = Eigen::Map<Vec>(dv.data(), dv.size());
    Mat gamma(2 * n, 2 * n);
    for (int i = 0; i < 2 * n; ++i) {
        if (static_cast<int>(g[i].size()) != 2 * n) throw DimensionError("gamma row length");
        for (int k = 0; k < 2 * n; ++k) gamma(i, k) = g[i][k];
    }
    return {d, gamma};
}

GaussianState StandardFormParams::state() const {
    Mat g = Mat::Zero(4, 4);
    g(0, 0) = g(1, 1) = lambda_a;
    g(2, 2) = g(3, 3) = lambda_b;
    g(0, 2) = g(2, 0) = c_x;
    g(1, 3) = g(3, 1) = c_p;
    return {Vec::Zero(4), g};
}

std::vector<double> symplectic_spectrum(const Mat& gamma) {
    check_square_even(gamma);
    if ((gamma - gamma.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, gamma.cwiseAbs().maxCoeff()))
        throw NumericError("symplectic_spectrum: matrix not symmetric");
    if (!gamma.allFinite()) throw NumericError("symplectic_spectrum: non-finite entries");
    const int n = static_cast<int>(gamma.rows() / 2);
    std::vector<double> all;
    Eigen::LLT<Mat> llt(gamma);
    if (llt.info() == Eigen::Success) {
        // L^T J L is antisymmetric with eigenvalues +-i nu; the self-adjoint route stays accurate
        // for strongly squeezed states where the general eigensolver on J gamma does not
        Mat L = llt.matrixL();
        Mat A = L.transpose() * omega(n) * L;
        Eigen::SelfAdjointEigenSolver<Mat> es(A.transpose() * A, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw NumericError("symplectic_spectrum: eigensolver failed");
        for (int i = 0; i < es.eigenvalues().size(); ++i) all.push_back(std::sqrt(std::max(0.0, es.eigenvalues()[i])));
    } else {
        Eigen::EigenSolver<Mat> es(omega(n) * gamma, false);
        if (es.info() != Eigen::Success) throw NumericError("symplectic_spectrum: eigensolver failed");
        for (int i = 0; i < es.eigenvalues().size(); ++i) all.push_back(std::abs(es.eigenvalues()[i].imag()));
    }
    std::sort(all.begin(), all.end(), std::greater<>());
    std::vector<double> out;
    for (int i = 0; i < n; ++i) out.push_back(0.5 * (all[2 * i] + all[2 * i + 1]));
    return out;
}

bool check_physicality(const GaussianState& s, double tol) {
    const Mat& g = s.gamma();
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > tol * std::max(1.0, g.cwiseAbs().maxCoeff())) return false;
    auto mu = symplectic_spectrum(g);
    return mu.back() >= 1 - tol;
}

double purity(const GaussianState& s, double tol) {
    double det = s.gamma().determinant();
    if (det < 1 - tol) throw UnphysicalError("purity: det gamma below 1");
    return 1.0 / std::sqrt(det);
}

double fidelity(const GaussianState& a, const GaussianState& b, double tol) {
    if (a.modes() != b.modes()) throw DimensionError("fidelity: mode counts differ");
    if (purity(a) < 1 - tol && purity(b) < 1 - tol)
        throw PreconditionError("fidelity: both states mixed (Bures case unsupported)");
    Mat sum = a.gamma() + b.gamma();
    Vec d = b.d() - a.d();
    double det = (0.5 * sum).determinant();
    double q = d.dot(sum.ldlt().solve(d));
    return std::exp(-q) / std::sqrt(det);
}

Vec gather(const Vec& v, const Modes& modes) {
    Vec out(2 * modes.size());
    for (size_t i = 0; i < modes.size(); ++i) {
        out(2 * i) = v(2 * modes[i]);
        out(2 * i + 1) = v(2 * modes[i] + 1);
    }
    return out;
}

Mat gather(const Mat& m, const Modes& rows, const Modes& cols) {
    Mat out(2 * rows.size(), 2 * cols.size());
    for (size_t i = 0; i < rows.size(); ++i)
        for (size_t k = 0; k < cols.size(); ++k)
            out.block<2, 2>(2 * i, 2 * k) = m.block<2, 2>(2 * rows[i], 2 * cols[k]);
    return out;
}

Modes complement(int n, const Modes& keep) {
    Modes out;
    for (int i = 0; i < n; ++i)
        if (std::find(keep.begin(), keep.end(), i) == keep.end()) out.push_back(i);
    return out;
}

GaussianState reduce(const GaussianState& s, const Modes& keep) {
    if (keep.empty()) throw PreconditionError("reduce: empty mode set");
    ModePartition{{keep}}.validate(s.modes());
    return {gather(s.d(), keep), gather(s.gamma(), keep, keep)};
}

GaussianState tensor(const GaussianState& a, const GaussianState& b) {
    const auto na = a.gamma().rows(), nb = b.gamma().rows();
    Mat g = Mat::Zero(na + nb, na + nb);
    g.topLeftCorner(na, na) = a.gamma();
    g.bottomRightCorner(nb, nb) = b.gamma();
    Vec d(na + nb);
    d << a.d(), b.d();
    return {d, g};
}

StandardFormParams standard_form(const GaussianState& s) {
    if (s.modes() != 2) throw DimensionError("standard_form needs a two-mode state");
    if (!check_physicality(s)) throw UnphysicalError("standard_form: unphysical state");
    const Mat& g = s.gamma();
    double detA = g.block<2, 2>(0, 0).determinant();
    double detB = g.block<2, 2>(2, 2).determinant();
    double detC = g.block<2, 2>(0, 2).determinant();
    StandardFormParams p;
    p.lambda_a = std::sqrt(detA);
    p.lambda_b = std::sqrt(detB);
    double ab = p.lambda_a * p.lambda_b;
    // sqrt(lambda) A^{-1/2} is a local symplectic map taking A to lambda I; the rotations left
    // over diagonalize C, so c_x, c_p follow from its singular values without cancellation
    auto normalizer = [](const Mat& blk, double lam) {
        Eigen::SelfAdjointEigenSolver<Mat> es(blk);
        Vec ev = es.eigenvalues().cwiseSqrt().cwiseInverse() * std::sqrt(lam);
        return Mat(es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose());
    };
    Mat C = normalizer(g.block<2, 2>(0, 0), p.lambda_a) * g.block<2, 2>(0, 2) *
            normalizer(g.block<2, 2>(2, 2), p.lambda_b);
    Eigen::JacobiSVD<Mat> svd(C);
    p.c_x = svd.singularValues()(0);
    p.c_p = svd.singularValues()(1);
    if (detC < 0) p.c_p = -p.c_p;
    double t1 = (ab - p.c_x * p.c_x) * (ab - p.c_p * p.c_p);
    if (t1 < 1 - 1e-7) throw UnphysicalError("standard_form: invariants outside physical region");
    return p;
}

std::vector<double> schmidt_spectrum(const GaussianState& s, const ModePartition& p) {
    if (p.subsets.size() != 2) throw PreconditionError("schmidt_spectrum needs a bipartition");
    p.validate(s.modes());
    if (std::abs(purity(s) - 1) > 1e-8) throw PreconditionError("schmidt_spectrum: state not pure");
    const Modes& small = p.subsets[0].size() <= p.subsets[1].size() ? p.subsets[0] : p.subsets[1];
    return symplectic_spectrum(reduce(s, small).gamma());
}

Mat sym_sqrt_psd(const Mat& m, double tol) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
    if (es.info() != Eigen::Success) throw NumericError("matrix square root failed");
    Vec ev = es.eigenvalues();
    double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
    for (int i = 0; i < ev.size(); ++i) {
        if (ev(i) < -1e-7 * scale) throw NumericError("matrix square root of indefinite matrix");
        ev(i) = ev(i) < tol * scale ? 0.0 : std::sqrt(ev(i));
    }
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

Mat pinv_sym(const Mat& m, double rel_cut) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (m + m.transpose()));
    Vec ev = es.eigenvalues();
    double mx = ev.cwiseAbs().maxCoeff();
    for (int i = 0; i < ev.size(); ++i) ev(i) = std::abs(ev(i)) > rel_cut * mx ? 1.0 / ev(i) : 0.0;
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

GaussianState purification(const GaussianState& mixed) {
    const int n = mixed.modes();
    const Mat& g = mixed.gamma();
    const Mat J = omega(n);
    // -(J g)^2 - I = g^{-1/2} (-K^2 - I) g^{1/2} with K = g^{1/2} J g^{1/2} antisymmetric,
    // so the square root can be taken on the symmetric middle factor
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    if (es.eigenvalues().minCoeff() <= 0) throw NumericError("purification: CM not positive definite");
    Mat gh = es.operatorSqrt();
    Mat ghi = es.operatorInverseSqrt();
    Mat K = gh * J * gh;
    Mat mid = -K * K - Mat::Identity(2 * n, 2 * n);
    Mat root = ghi * sym_sqrt_psd(mid) * gh;
    Mat th = theta_on(n, [n] {
        Modes all;
        for (int i = 0; i < n; ++i) all.push_back(i);
        return all;
    }());
    Mat C = J * root * th;
    Mat out(4 * n, 4 * n);
    out.topLeftCorner(2 * n, 2 * n) = g;
    out.topRightCorner(2 * n, 2 * n) = C;
    out.bottomLeftCorner(2 * n, 2 * n) = C.transpose();
    out.bottomRightCorner(2 * n, 2 * n) = th * g * th;
    out = 0.5 * (out + out.transpose());
    Vec d(4 * n);
    d << mixed.d(), Vec::Zero(2 * n);
    return {d, out};
}

double variance(const GaussianState& s, const Vec& l) {
    if (l.size() != s.gamma().rows()) throw DimensionError("variance: form length mismatch");
    return 0.5 * l.dot(s.gamma() * l);
}

Mat random_symplectic(int modes, Rng& rng, double strength) {
    std::uniform_real_distribution<double> ang(0, 2 * M_PI);
    std::normal_distribution<double> nr(0, strength);
    SymplecticTransform S = SymplecticTransform::identity(modes);
    for (int layer = 0; layer < 2; ++layer) {
        for (int i = 0; i < modes; ++i) {
            S = S.then(phase_shift(ang(rng)).embed(modes, {i}));
            S = S.then(squeeze(nr(rng)).embed(modes, {i}));
            S = S.then(phase_shift(ang(rng)).embed(modes, {i}));
        }
        for (int i = 0; i + 1 < modes; ++i) S = S.then(beam_splitter(ang(rng)).embed(modes, {i, i + 1}));
    }
    return S.matrix();
}

GaussianState random_state(int modes, Rng& rng, bool pure, double strength) {
    std::uniform_real_distribution<double> th(0, 2.0 * strength);
    Vec diag(2 * modes);
    for (int i = 0; i < modes; ++i) {
        double nu = pure ? 1.0 : 1.0 + th(rng);
        diag(2 * i) = diag(2 * i + 1) = nu;
    }
    Mat S = random_symplectic(modes, rng, 0.6 * strength);
    Mat g = S * diag.asDiagonal() * S.transpose();
    g = 0.5 * (g + g.transpose());
    return {Vec::Zero(2 * modes), g};
}

}  // namespace cvqit
