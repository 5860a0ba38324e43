#include "ssmdelay/oracle.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "ssmdelay/errors.hpp"

namespace ssmdelay::oracle {

namespace {

constexpr double kRateTol = 1e-9;

/// Moment integral int_0^tau theta^p e^{b theta} dtheta.
Complex moment_integral(int p, Complex b, double tau) {
    if (std::abs(b) * tau < 1e-6) {
        // Series in b around the removable point.
        Complex acc = 0.0;
        double tp = std::pow(tau, p + 1);
        Complex bp = 1.0;
        double fact = 1.0;
        for (int m = 0; m < 6; ++m) {
            acc += bp * tp / ((p + 1 + m) * fact);
            bp *= b;
            tp *= tau;
            fact *= (m + 1);
        }
        return acc;
    }
    if (p == 0) return (std::exp(b * tau) - 1.0) / b;
    return (std::pow(tau, p) * std::exp(b * tau) -
            static_cast<double>(p) * moment_integral(p - 1, b, tau)) /
           b;
}

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace

ExpPoly& ExpPoly::operator+=(const ExpPoly& other) {
    terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
    collect();
    return *this;
}

ExpPoly ExpPoly::operator+(const ExpPoly& other) const {
    ExpPoly out = *this;
    out += other;
    return out;
}

ExpPoly ExpPoly::operator*(Complex scale) const {
    ExpPoly out = *this;
    for (auto& t : out.terms_) t.coeff *= scale;
    return out;
}

ExpPoly ExpPoly::derivative() const {
    ExpPoly out;
    for (const auto& t : terms_) {
        if (t.power > 0)
            out.terms_.push_back({t.coeff * static_cast<double>(t.power), t.power - 1, t.rate});
        out.terms_.push_back({t.coeff * t.rate, t.power, t.rate});
    }
    out.collect();
    return out;
}

Complex ExpPoly::eval(double theta) const {
    Complex acc = 0.0;
    for (const auto& t : terms_)
        acc += t.coeff * std::pow(theta, t.power) * std::exp(t.rate * theta);
    return acc;
}

void ExpPoly::collect(double tol) {
    std::vector<Term> merged;
    for (const auto& t : terms_) {
        bool absorbed = false;
        for (auto& m : merged) {
            if (m.power == t.power && std::abs(m.rate - t.rate) < kRateTol) {
                m.coeff += t.coeff;
                absorbed = true;
                break;
            }
        }
        if (!absorbed) merged.push_back(t);
    }
    terms_.clear();
    double scale = 0.0;
    for (const auto& m : merged) scale = std::max(scale, std::abs(m.coeff));
    for (const auto& m : merged)
        if (std::abs(m.coeff) > tol * std::max(1.0, scale)) terms_.push_back(m);
}

ExpPoly convolve_exp(const ExpPoly& p, Complex nu) {
    ExpPoly out;
    for (const auto& t : p.terms()) {
        const Complex b = t.rate - nu;
        if (std::abs(b) < kRateTol) {
            // Resonant forcing: c theta^{p+1}/(p+1) e^{nu theta}.
            out += ExpPoly::term(t.coeff / static_cast<double>(t.power + 1),
                                 t.power + 1, nu);
            continue;
        }
        // e^{nu theta} int_0^theta s^p e^{b s} ds, integrating by parts.
        // I_p(theta) = theta^p e^{b theta}/b - (p/b) I_{p-1}(theta), I_{-1} = 0
        // contribution of the lower limit collects into the e^{nu theta} term.
        Complex low = 0.0;  // -I_p(0) accumulated coefficient
        Complex lead = 1.0 / b;
        int pw = t.power;
        double perm = 1.0;
        // Expand recursively: I_p(theta) = sum_{m=0}^{p} (-1)^m p!/(p-m)! theta^{p-m} e^{b theta} / b^{m+1}
        //                     + (-1)^{p+1} p! / b^{p+1}.
        for (int m = 0; m <= t.power; ++m) {
            const double sign = (m % 2 == 0) ? 1.0 : -1.0;
            out += ExpPoly::term(t.coeff * sign * perm * lead, pw, t.rate);
            perm *= pw;
            pw -= 1;
            lead /= b;
        }
        const double signp = (t.power % 2 == 0) ? -1.0 : 1.0;
        low = t.coeff * signp * factorial(t.power) / std::pow(b, t.power + 1);
        out += ExpPoly::term(low, 0, nu);
    }
    out.collect();
    return out;
}

Complex EigData::delta(Complex mu) const { return mu - L - R * std::exp(-mu * tau); }

EigData eig_setup(double r, double K, double tau) {
    EigData eig;
    eig.r = r;
    eig.K = K;
    eig.tau = tau;
    eig.L = 0.0;
    eig.R = -r;

    // Newton on the scalar quasi-polynomial from the printed seed.
    Complex mu(0.1, -1.6);
    for (int it = 0; it < 100; ++it) {
        const Complex f = eig.delta(mu);
        const Complex fp = 1.0 + eig.R * tau * std::exp(-mu * tau);
        const Complex step = f / fp;
        mu -= step;
        if (std::abs(step) < 1e-15 * (1.0 + std::abs(mu))) break;
    }
    if (mu.imag() > 0) mu = std::conj(mu);  // take the Im < 0 member of the pair
    if (std::abs(eig.delta(mu)) > 1e-12)
        throw NumericError("eig_setup: dominant root did not converge");
    eig.lambda = mu;
    eig.dprime = 1.0 + eig.R * tau * std::exp(-mu * tau);
    eig.p_star = 1.0 / eig.dprime;  // q = 1
    return eig;
}

Complex pairing(const EigData& eig, bool conjugate, const ExpPoly& phi) {
    const Complex lam = conjugate ? std::conj(eig.lambda) : eig.lambda;
    const Complex ps = conjugate ? std::conj(eig.p_star) : eig.p_star;
    Complex acc = phi.eval(0.0);
    const Complex front = eig.R * std::exp(-lam * eig.tau);
    for (const auto& t : phi.terms()) {
        const double sign = (t.power % 2 == 0) ? 1.0 : -1.0;
        acc += front * sign * t.coeff * moment_integral(t.power, lam - t.rate, eig.tau);
    }
    return ps * acc;
}

Complex projection_pi(const EigData& eig, bool conjugate, Complex a) {
    return pairing(eig, conjugate, ExpPoly::term(1.0, 0, a));
}

Complex project_history(const EigData& eig, const Eigen::VectorXd& values, double dt) {
    // <psi_1, u> with the integral by composite trapezoid on the grid;
    // values run over theta = -tau + m dt, m = 0..M.
    const int M = static_cast<int>(values.size()) - 1;
    const Complex lam = eig.lambda;
    Complex integral = 0.0;
    for (int m = 0; m <= M; ++m) {
        const double theta = m * dt;  // integration variable in [0, tau]
        const double u = values(M - m);  // u(-theta)
        const double w = (m == 0 || m == M) ? 0.5 : 1.0;
        integral += w * std::exp(lam * theta) * u;
    }
    integral *= dt;
    return eig.p_star * (values(M) + eig.R * std::exp(-lam * eig.tau) * integral);
}

std::vector<double> check_nonresonance(const EigData& eig) {
    const std::pair<int, int> combos[7] = {{2, 0}, {1, 1}, {0, 2}, {3, 0},
                                           {2, 1}, {1, 2}, {0, 3}};
    std::vector<double> values;
    for (auto [j, k] : combos) {
        const Complex mu = static_cast<double>(j) * eig.lambda +
                           static_cast<double>(k) * std::conj(eig.lambda);
        values.push_back(std::abs(eig.delta(mu)));
    }
    return values;
}

namespace {

/// Shared solve of the (j,k) homological system at order 2 or 3.
/// Unknowns (W_jk(0), beta_jk, conj(beta_kj)); G is the order-3 forcing
/// collected from lower orders (empty at order 2), Nrhs the nonlinearity
/// coefficient of the boundary equation.
struct MonomialSolution {
    ExpPoly W;
    Complex beta;
    Complex beta_conj_partner;
};

MonomialSolution solve_monomial(const EigData& eig, int j, int k, const ExpPoly& G,
                                Complex Nrhs) {
    const Complex lam = eig.lambda;
    const Complex lam_c = std::conj(lam);
    const double g = factorial(j) * factorial(k);
    const double c = 1.0 / g;
    const Complex nu = static_cast<double>(j) * lam + static_cast<double>(k) * lam_c;
    const Complex phi1t = std::exp(-lam * eig.tau);
    const Complex phi2t = std::exp(-lam_c * eig.tau);
    const Complex env = std::exp(-nu * eig.tau);

    const ExpPoly F = G * g;
    const ExpPoly I = convolve_exp(F, nu);
    const Complex M = I.empty() ? Complex(0.0) : I.eval(-eig.tau);
    const Complex J1 = I.empty() ? Complex(0.0) : pairing(eig, false, I);
    const Complex J2 = I.empty() ? Complex(0.0) : pairing(eig, true, I);

    const Complex D = Nrhs - G.eval(0.0);

    Eigen::Matrix3cd A;
    Eigen::Vector3cd rhs;
    A(0, 0) = c * eig.delta(nu);
    A(0, 1) = 1.0 - eig.R * (phi1t - env) / (lam - nu);
    A(0, 2) = 1.0 - eig.R * (phi2t - env) / (lam_c - nu);
    rhs(0) = D + c * eig.R * M;
    for (int i = 0; i < 2; ++i) {
        const bool conj_row = (i == 1);
        A(i + 1, 0) = projection_pi(eig, conj_row, nu);
        A(i + 1, 1) = g * (projection_pi(eig, conj_row, lam) - A(i + 1, 0)) / (lam - nu);
        A(i + 1, 2) = g * (projection_pi(eig, conj_row, lam_c) - A(i + 1, 0)) / (lam_c - nu);
        rhs(i + 1) = (i == 0) ? -J1 : -J2;
    }

    const Eigen::PartialPivLU<Eigen::Matrix3cd> lu(A);
    if (std::abs(lu.determinant()) < 1e-12)
        throw NumericError("homological system singular: resonance at order " +
                           std::to_string(j + k));
    const Eigen::Vector3cd sol = lu.solve(rhs);

    MonomialSolution out;
    out.beta = sol(1);
    out.beta_conj_partner = sol(2);
    out.W = ExpPoly::term(sol(0), 0, nu);
    out.W += ExpPoly::term(g * sol(1) / (lam - nu), 0, lam);
    out.W += ExpPoly::term(-g * sol(1) / (lam - nu), 0, nu);
    out.W += ExpPoly::term(g * sol(2) / (lam_c - nu), 0, lam_c);
    out.W += ExpPoly::term(-g * sol(2) / (lam_c - nu), 0, nu);
    out.W += I;
    return out;
}

}  // namespace

OracleModel solve_order2(const EigData& eig) {
    OracleModel model;
    model.eig = eig;
    const Complex lam = eig.lambda;
    const Complex lam_c = std::conj(lam);
    model.W[{1, 0}] = ExpPoly::term(1.0, 0, lam);
    model.W[{0, 1}] = ExpPoly::term(1.0, 0, lam_c);

    const double rk = eig.r / eig.K;
    const Complex phi1t = std::exp(-lam * eig.tau);
    const Complex phi2t = std::exp(-lam_c * eig.tau);
    const ExpPoly none;

    auto s20 = solve_monomial(eig, 2, 0, none, -rk * phi1t);
    auto s11 = solve_monomial(eig, 1, 1, none, -rk * (phi1t + phi2t));
    auto s02 = solve_monomial(eig, 0, 2, none, -rk * phi2t);

    model.W[{2, 0}] = s20.W;
    model.W[{1, 1}] = s11.W;
    model.W[{0, 2}] = s02.W;
    model.beta[{2, 0}] = s20.beta;
    model.beta[{1, 1}] = s11.beta;
    model.beta[{0, 2}] = s02.beta;
    return model;
}

void solve_order3(OracleModel& model) {
    const EigData& eig = model.eig;
    const Complex lam = eig.lambda;
    const Complex lam_c = std::conj(lam);
    const Complex phi1t = std::exp(-lam * eig.tau);
    const Complex phi2t = std::exp(-lam_c * eig.tau);
    const double r2k = eig.r / (2.0 * eig.K);

    const ExpPoly& W20 = model.W.at({2, 0});
    const ExpPoly& W11 = model.W.at({1, 1});
    const ExpPoly& W02 = model.W.at({0, 2});
    const Complex b20 = model.beta.at({2, 0});
    const Complex b11 = model.beta.at({1, 1});
    const Complex b02 = model.beta.at({0, 2});

    const Complex W20_0 = W20.eval(0.0), W20_t = W20.eval(-eig.tau);
    const Complex W11_0 = W11.eval(0.0), W11_t = W11.eval(-eig.tau);
    const Complex W02_0 = W02.eval(0.0), W02_t = W02.eval(-eig.tau);

    // Forcing from the interior cross terms of lower orders.
    const ExpPoly G30 = W20 * b20 + W11 * std::conj(b02);
    const ExpPoly G21 = W20 * b11 + W11 * (b20 + std::conj(b11)) + W02 * std::conj(b02);
    const ExpPoly G12 = W20 * b02 + W11 * (b11 + std::conj(b20)) + W02 * std::conj(b11);
    const ExpPoly G03 = W11 * b02 + W02 * std::conj(b20);

    const Complex N30 = -r2k * (W20_t + phi1t * W20_0);
    const Complex N21 = -r2k * (W20_t + 2.0 * W11_t + 2.0 * phi1t * W11_0 + phi2t * W20_0);
    const Complex N12 = -r2k * (W02_t + 2.0 * W11_t + phi1t * W02_0 + 2.0 * phi2t * W11_0);
    const Complex N03 = -r2k * (W02_t + phi2t * W02_0);

    auto s30 = solve_monomial(eig, 3, 0, G30, N30);
    auto s21 = solve_monomial(eig, 2, 1, G21, N21);
    auto s12 = solve_monomial(eig, 1, 2, G12, N12);
    auto s03 = solve_monomial(eig, 0, 3, G03, N03);

    model.W[{3, 0}] = s30.W;
    model.W[{2, 1}] = s21.W;
    model.W[{1, 2}] = s12.W;
    model.W[{0, 3}] = s03.W;
    model.beta[{3, 0}] = s30.beta;
    model.beta[{2, 1}] = s21.beta;
    model.beta[{1, 2}] = s12.beta;
    model.beta[{0, 3}] = s03.beta;
}

Complex OracleModel::manifold_at(double theta, Complex z) const {
    const Complex zc = std::conj(z);
    Complex acc = 0.0;
    for (const auto& [jk, w] : W) {
        const auto [j, k] = jk;
        const double c = 1.0 / (factorial(j) * factorial(k));
        acc += c * w.eval(theta) * std::pow(z, j) * std::pow(zc, k);
    }
    return acc;
}

Complex OracleModel::zdot(Complex z) const {
    const Complex zc = std::conj(z);
    Complex acc = eig.lambda * z;
    for (const auto& [jk, b] : beta)
        acc += b * std::pow(z, jk.first) * std::pow(zc, jk.second);
    return acc;
}

double gauge_residual(const OracleModel& model) {
    double worst = 0.0;
    for (const auto& [jk, w] : model.W) {
        if (jk.first + jk.second < 2) continue;
        worst = std::max(worst, std::abs(pairing(model.eig, false, w)));
        worst = std::max(worst, std::abs(pairing(model.eig, true, w)));
    }
    return worst;
}

double reality_residual(const OracleModel& model, int samples) {
    double worst = 0.0;
    for (const auto& [jk, w] : model.W) {
        const auto it = model.W.find({jk.second, jk.first});
        if (it == model.W.end()) continue;
        for (int s = 0; s <= samples; ++s) {
            const double theta = -model.eig.tau * s / samples;
            worst = std::max(worst,
                             std::abs(w.eval(theta) - std::conj(it->second.eval(theta))));
        }
    }
    return worst;
}

double interior_residual(const OracleModel& model, int samples) {
    // Defect of W_jk' = nu W_jk + g (beta_jk phi1 + conj(beta_kj) phi2) + g G_jk.
    const EigData& eig = model.eig;
    const Complex lam = eig.lambda;
    const Complex lam_c = std::conj(lam);
    double worst = 0.0;

    auto beta_of = [&](int j, int k) { return model.beta.at({j, k}); };
    auto defect = [&](int j, int k, const ExpPoly& G) {
        const double g = factorial(j) * factorial(k);
        const Complex nu = static_cast<double>(j) * lam + static_cast<double>(k) * lam_c;
        const ExpPoly& w = model.W.at({j, k});
        const ExpPoly dw = w.derivative();
        for (int s = 0; s <= samples; ++s) {
            const double theta = -eig.tau * s / samples;
            const Complex lhs = dw.eval(theta);
            const Complex rhs = nu * w.eval(theta) +
                                g * (beta_of(j, k) * std::exp(lam * theta) +
                                     std::conj(beta_of(k, j)) * std::exp(lam_c * theta)) +
                                g * G.eval(theta);
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    };

    const ExpPoly none;
    defect(2, 0, none);
    defect(1, 1, none);
    defect(0, 2, none);
    if (model.W.count({3, 0})) {
        const ExpPoly& W20 = model.W.at({2, 0});
        const ExpPoly& W11 = model.W.at({1, 1});
        const ExpPoly& W02 = model.W.at({0, 2});
        const Complex b20 = beta_of(2, 0), b11 = beta_of(1, 1), b02 = beta_of(0, 2);
        defect(3, 0, W20 * b20 + W11 * std::conj(b02));
        defect(2, 1, W20 * b11 + W11 * (b20 + std::conj(b11)) + W02 * std::conj(b02));
        defect(1, 2, W20 * b02 + W11 * (b11 + std::conj(b20)) + W02 * std::conj(b11));
        defect(0, 3, W11 * b02 + W02 * std::conj(b20));
    }
    return worst;
}

double boundary_residual(const OracleModel& model, Complex z) {
    const EigData& eig = model.eig;
    const Complex zc = std::conj(z);

    // dW/dz and dW/dzbar at theta = 0.
    Complex dWz = 0.0, dWzc = 0.0, W0 = 0.0, Wt = 0.0;
    for (const auto& [jk, w] : model.W) {
        const auto [j, k] = jk;
        const double c = 1.0 / (factorial(j) * factorial(k));
        const Complex w0 = w.eval(0.0);
        W0 += c * w0 * std::pow(z, j) * std::pow(zc, k);
        Wt += c * w.eval(-eig.tau) * std::pow(z, j) * std::pow(zc, k);
        if (j > 0)
            dWz += c * static_cast<double>(j) * w0 * std::pow(z, j - 1) * std::pow(zc, k);
        if (k > 0)
            dWzc += c * static_cast<double>(k) * w0 * std::pow(z, j) * std::pow(zc, k - 1);
    }
    const Complex zd = model.zdot(z);
    const Complex lhs = dWz * zd + dWzc * std::conj(zd);
    const Complex rhs = eig.L * W0 + eig.R * Wt - (eig.r / eig.K) * W0 * Wt;
    return std::abs(lhs - rhs);
}

OraclePrediction oracle_predict(const OracleModel& model, const HistorySpec& history,
                                double t_end, double dt, double validity_radius) {
    const EigData& eig = model.eig;
    const int M = static_cast<int>(std::llround(eig.tau / dt));
    Eigen::VectorXd values(M + 1);
    if (history.kind == HistorySpec::Kind::Constant) {
        values.setConstant(history.value(0));
    } else {
        if (history.samples.rows() != M + 1)
            throw ConfigError("oracle_predict: history grid must match dt");
        values = history.samples.col(0);
    }

    Complex z = project_history(eig, values, dt);
    const int steps = static_cast<int>(std::ceil(t_end / dt - 1e-9));

    OraclePrediction out;
    out.trajectory.t0 = 0.0;
    out.trajectory.dt = dt;
    out.trajectory.samples.resize(steps + 1, 1);
    out.z.reserve(steps + 1);

    auto f = [&](Complex zz) { return model.zdot(zz); };
    for (int i = 0; i <= steps; ++i) {
        out.z.push_back(z);
        out.trajectory.samples(i, 0) = model.manifold_at(0.0, z).real();
        if (std::abs(z) > validity_radius) out.radius_warning = true;
        if (i == steps) break;
        const Complex k1 = f(z);
        const Complex k2 = f(z + 0.5 * dt * k1);
        const Complex k3 = f(z + 0.5 * dt * k2);
        const Complex k4 = f(z + dt * k3);
        z += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return out;
}

}  // namespace ssmdelay::oracle
