#pragma once

#include <complex>
#include <map>
#include <vector>

#include "ssmdelay/history.hpp"
#include "ssmdelay/trajectory.hpp"

namespace ssmdelay::oracle {

using Complex = std::complex<double>;

/// Sum of terms c * theta^p * e^{a theta}; closed under the operations the
/// homological equations need (scaling, addition, convolution against an
/// exponential, differentiation, the adjoint pairing).
class ExpPoly {
public:
    struct Term {
        Complex coeff;
        int power;
        Complex rate;
    };

    ExpPoly() = default;
    static ExpPoly term(Complex coeff, int power, Complex rate) {
        ExpPoly p;
        p.terms_.push_back({coeff, power, rate});
        return p;
    }

    ExpPoly& operator+=(const ExpPoly& other);
    ExpPoly operator+(const ExpPoly& other) const;
    ExpPoly operator*(Complex scale) const;
    ExpPoly derivative() const;
    Complex eval(double theta) const;
    void collect(double tol = 1e-14);
    const std::vector<Term>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

private:
    std::vector<Term> terms_;
};

/// theta -> int_0^theta e^{nu (theta - s)} p(s) ds, in closed form.
ExpPoly convolve_exp(const ExpPoly& p, Complex nu);

/// Dominant eigenvalue data of the shifted Hutchinson equation
/// ydot = L y + R y(t - tau) + N, L = 0, R = -r. lambda is the member of the
/// dominant pair with Im(lambda) < 0; q = 1 and p* = 1/Delta'(lambda).
struct EigData {
    double r = 0, K = 0, tau = 0;
    Complex lambda;
    Complex dprime;  // Delta'(lambda)
    Complex p_star;
    double L = 0, R = 0;

    Complex delta(Complex mu) const;  // mu - L - R e^{-mu tau}
};

EigData eig_setup(double r, double K, double tau);

/// Pairing <psi_i, phi> = psi(0) phi(0) + int_0^tau psi'(theta) phi(-theta),
/// with the normalized adjoint eigenfunction of lambda (conjugate = false)
/// or of conj(lambda).
Complex pairing(const EigData& eig, bool conjugate, const ExpPoly& phi);

/// Pi_i(a) = <psi_i, e^{a theta}>, with Pi_i(lambda_i) = 1 in the limit.
Complex projection_pi(const EigData& eig, bool conjugate, Complex a);

/// <psi_1, u> for a sampled history u on [-tau, 0] (trapezoid on the grid);
/// this is the reduced initial condition z0.
Complex project_history(const EigData& eig, const Eigen::VectorXd& values, double dt);

/// |Delta(j lambda + k conj(lambda))| for all j + k in {2, 3}, ordered
/// (2,0),(1,1),(0,2),(3,0),(2,1),(1,2),(0,3). Values below 1e-8 mean
/// resonance.
std::vector<double> check_nonresonance(const EigData& eig);

/// Cubic SSM expansion: manifold coefficient functions W_jk(theta) and
/// reduced-dynamics coefficients beta_jk, in
///   zdot = lambda z + sum_{j+k=2..3} beta_jk z^j zbar^k.
struct OracleModel {
    EigData eig;
    std::map<std::pair<int, int>, ExpPoly> W;      // j+k in {1,2,3}
    std::map<std::pair<int, int>, Complex> beta;   // j+k in {2,3}

    Complex manifold_at(double theta, Complex z) const;  // W(z, zbar, theta)
    Complex zdot(Complex z) const;
};

/// Order-2 homological systems (one 3x3 solve per monomial).
OracleModel solve_order2(const EigData& eig);

/// Order-3 systems, with closed-form forcing integrals (no quadrature).
void solve_order3(OracleModel& model);

/// Diagnostics: gauge conditions <psi_i, W_jk> (j+k >= 2), reality
/// W_jk = conj(W_kj) over sampled theta, interior ODE defect of each W_jk,
/// and the boundary invariance residual at a given z (full nonlinearity).
double gauge_residual(const OracleModel& model);
double reality_residual(const OracleModel& model, int samples = 20);
double interior_residual(const OracleModel& model, int samples = 20);
double boundary_residual(const OracleModel& model, Complex z);

struct OraclePrediction {
    Trajectory trajectory;   // predicted observable (shifted coordinates)
    std::vector<Complex> z;  // reduced trace
    bool radius_warning = false;
};

/// Projects the initial history via the pairing, advects the cubic reduced
/// dynamics by RK4, and lifts through W(z, zbar, theta = 0).
OraclePrediction oracle_predict(const OracleModel& model, const HistorySpec& history,
                                double t_end, double dt,
                                double validity_radius = 3.0);

}  // namespace ssmdelay::oracle
