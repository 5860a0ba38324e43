#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "ssmdelay/delay_system.hpp"

namespace ssmdelay {

using Complex = std::complex<double>;

/// Characteristic matrix of a linearized DDE,
///   Delta(mu) = mu I - L - sum_j R_j e^{-mu tau_j} - B Khat(mu),
/// where Khat is the Laplace-type transform of the distributed kernel.
struct CharMatrix {
    int n = 0;
    Eigen::MatrixXd L;
    std::vector<std::pair<double, Eigen::MatrixXd>> delayed;  // (tau_j, R_j)

    struct DistTerm {
        Eigen::MatrixXd B;
        double support = 0.0;
        bool constant_kernel = true;
        double kernel0 = 1.0;                    // kernel value when constant
        std::function<double(double)> kernel;    // used when not constant
    };
    std::optional<DistTerm> dist;

    Eigen::MatrixXcd evaluate(Complex mu) const;
    Complex det(Complex mu) const;
    /// d/dmu det Delta(mu), central differences with step 1e-7 averaged over
    /// the real and imaginary directions.
    Complex det_derivative(Complex mu) const;
};

struct RootInfo {
    Complex value;
    double residual;  // |det Delta(value)|
};

/// Characteristic roots found in a rectangular window, sorted by descending
/// real part; closed under conjugation for real-coefficient systems.
struct Spectrum {
    std::vector<RootInfo> roots;
    double re_min = 0, re_max = 0, im_max = 0;
    bool empty_warning = false;

    std::vector<Complex> values() const {
        std::vector<Complex> v;
        v.reserve(roots.size());
        for (const auto& r : roots) v.push_back(r.value);
        return v;
    }
    /// Rightmost root with |Im| > im_floor.
    std::optional<Complex> dominant(double im_floor = -1.0) const;
};

/// Jacobians of the DDE right-hand side at an equilibrium by symmetric
/// differences with step 1e-6. Throws ConfigError if the point is not an
/// equilibrium to 1e-10.
CharMatrix linearize(const DelaySystem& system, const Eigen::VectorXd& equilibrium);

/// Newton iteration on det Delta(mu) = 0 from a uniform seed grid over the
/// window (upper half; conjugates added). Converged roots are deduplicated at
/// 1e-6 and re-verified against the residual bound.
Spectrum roots_in_window(const CharMatrix& cm, double re_min, double re_max,
                         double im_max, int seeds_per_axis = 24);

/// Newton polish of a single root from a seed; returns nullopt when the
/// iteration does not converge.
std::optional<RootInfo> polish_root(const CharMatrix& cm, Complex seed);

constexpr int kSmoothnessInfinite = std::numeric_limits<int>::max();

/// Largest ell <= k_cap with sup Re(sigma \ Sigma) < ell inf Re(Sigma), where
/// Sigma is the sigma_size rightmost roots. Returns kSmoothnessInfinite when
/// Sigma is fully unstable and the rest fully stable. Resonant equality
/// within 1e-10 sets *resonant and returns the conservative value.
int smoothness_class(const Spectrum& spec, int sigma_size, int k_cap,
                     bool* resonant = nullptr);

struct TrackPoint {
    double param;
    Complex root;
};

struct TrackResult {
    std::vector<TrackPoint> path;
    std::optional<double> crossing;        // parameter where Re changes sign
    std::optional<Complex> crossing_root;  // root at the crossing
};

/// Tracks the rightmost root (above an |Im| floor) across a sorted parameter
/// grid by Newton continuation, re-seeding through roots_in_window on track
/// loss. A sign change of the real part is refined by bisection to 1e-4.
TrackResult track_rightmost(const std::function<CharMatrix(double)>& family,
                            const std::vector<double>& grid, double re_min,
                            double re_max, double im_max, double im_floor = 0.0);

}  // namespace ssmdelay
