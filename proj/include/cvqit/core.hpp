#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace cvqit {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Rng = std::mt19937_64;

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct UnphysicalError : std::domain_error {
    using std::domain_error::domain_error;
};

constexpr double kPhysTol = 1e-9;

// zero-based mode indices
using Modes = std::vector<int>;

struct ModePartition {
    std::vector<Modes> subsets;

    static ModePartition split(const Modes& a, const Modes& b) { return {{a, b}}; }
    void validate(int n) const;
};

class SymplecticForm {
public:
    explicit SymplecticForm(int modes);
    int modes() const { return n_; }
    const Mat& matrix() const { return J_; }

private:
    int n_;
    Mat J_;
};

Mat omega(int modes);
Mat theta_on(int modes, const Modes& transposed);

class GaussianState {
public:
    GaussianState(Vec d, Mat gamma);

    static GaussianState vacuum(int modes);
    static GaussianState thermal(double nu);
    static GaussianState coherent(double q, double p);
    static GaussianState squeezed(double r);
    static GaussianState tms(double r);

    int modes() const { return n_; }
    const Vec& d() const { return d_; }
    const Mat& gamma() const { return gamma_; }

    nlohmann::json to_json() const;
    static GaussianState from_json(const nlohmann::json& j);

private:
    int n_;
    Vec d_;
    Mat gamma_;
};

struct StandardFormParams {
    double lambda_a = 1, lambda_b = 1, c_x = 0, c_p = 0;

    GaussianState state() const;
};

std::vector<double> symplectic_spectrum(const Mat& gamma);
bool check_physicality(const GaussianState& s, double tol = kPhysTol);
double purity(const GaussianState& s, double tol = kPhysTol);
double fidelity(const GaussianState& a, const GaussianState& b, double tol = 1e-9);
GaussianState reduce(const GaussianState& s, const Modes& keep);
GaussianState tensor(const GaussianState& a, const GaussianState& b);
StandardFormParams standard_form(const GaussianState& two_mode);
std::vector<double> schmidt_spectrum(const GaussianState& s, const ModePartition& p);
GaussianState purification(const GaussianState& mixed);

// variance of the linear form l^T R in vacuum-normalized units, l^T (gamma/2) l
double variance(const GaussianState& s, const Vec& l);

Mat sym_sqrt_psd(const Mat& m, double tol = 1e-12);
Mat pinv_sym(const Mat& m, double rel_cut = 1e-12);
Modes complement(int n, const Modes& keep);
Vec gather(const Vec& v, const Modes& modes);
Mat gather(const Mat& m, const Modes& rows, const Modes& cols);

// random test material
Mat random_symplectic(int modes, Rng& rng, double strength = 1.0);
GaussianState random_state(int modes, Rng& rng, bool pure = false, double strength = 1.0);

}  // namespace cvqit
