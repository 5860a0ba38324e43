#include "ssmdelay/systems.hpp"

#include <cmath>

#include "ssmdelay/errors.hpp"
#include "ssmdelay/solver.hpp"

namespace ssmdelay {

namespace {

ParamMap merge_params(const ParamMap& defaults, const ParamMap& overrides,
                      const std::string& name) {
    ParamMap p = defaults;
    for (const auto& [key, value] : overrides) {
        if (!p.count(key))
            throw CatalogError("unknown parameter '" + key + "' for system '" + name + "'");
        p[key] = value;
    }
    return p;
}

DelaySystem build_hutchinson(const ParamMap& p) {
    // Shifted about x* = K: ydot = -r y(t-tau) - (r/K) y(t) y(t-tau).
    const double r = p.at("r"), K = p.at("K"), tau = p.at("tau");
    DelaySystem sys;
    sys.n = 1;
    sys.tau_max = tau;
    sys.discrete_delays = {tau};
    sys.params = p;
    sys.rhs = [r, K](double, const Eigen::VectorXd& y,
                     const std::vector<Eigen::VectorXd>& delayed,
                     const Eigen::VectorXd&, Eigen::VectorXd& out) {
        out(0) = -r * delayed[0](0) - (r / K) * y(0) * delayed[0](0);
    };
    return sys;
}

DelaySystem build_mackey_glass(const ParamMap& p) {
    // |x|^alpha in the production term: the even extension keeps the field C1
    // at the origin, and all orbits of interest stay positive.
    const double beta = p.at("beta"), gamma = p.at("gamma");
    const double alpha = p.at("alpha"), tau = p.at("tau");
    DelaySystem sys;
    sys.n = 1;
    sys.tau_max = tau;
    sys.discrete_delays = {tau};
    sys.params = p;
    sys.rhs = [beta, gamma, alpha](double, const Eigen::VectorXd& y,
                                   const std::vector<Eigen::VectorXd>& delayed,
                                   const Eigen::VectorXd&, Eigen::VectorXd& out) {
        const double v = delayed[0](0);
        out(0) = beta * v / (1.0 + std::pow(std::abs(v), alpha)) - gamma * y(0);
    };
    return sys;
}

DelaySystem build_two_neuron(const ParamMap& p) {
    const double kappa = p.at("kappa"), beta = p.at("beta");
    const double a12 = p.at("a12"), a21 = p.at("a21");
    const double tau_s = p.at("tau_s"), tau1 = p.at("tau1"), tau2 = p.at("tau2");
    DelaySystem sys;
    sys.n = 2;
    sys.tau_max = std::max({tau_s, tau1, tau2});
    sys.discrete_delays = {tau_s, tau1, tau2};
    sys.params = p;
    sys.rhs = [kappa, beta, a12, a21](double, const Eigen::VectorXd& y,
                                      const std::vector<Eigen::VectorXd>& delayed,
                                      const Eigen::VectorXd&, Eigen::VectorXd& out) {
        out(0) = -kappa * y(0) + beta * std::tanh(delayed[0](0)) +
                 a12 * std::tanh(delayed[2](1));
        out(1) = -kappa * y(1) + beta * std::tanh(delayed[0](1)) +
                 a21 * std::tanh(delayed[1](0));
    };
    return sys;
}

Eigen::VectorXd rossler_equilibrium(const ParamMap& p) {
    // Newton on the 3-equation algebraic system, seeded near the attractor's
    // inner equilibrium.
    const double a1 = p.at("alpha1"), a2 = p.at("alpha2");
    const double b1 = p.at("beta1"), b2 = p.at("beta2"), g = p.at("gamma");
    Eigen::Vector3d x(0.05, -0.25, 0.2);
    for (int it = 0; it < 100; ++it) {
        Eigen::Vector3d f;
        f(0) = -x(1) - x(2) + (a1 + a2) * x(0);
        f(1) = x(0) + b1 * x(1);
        f(2) = b2 + x(2) * x(0) - g * x(2);
        Eigen::Matrix3d J;
        J << (a1 + a2), -1.0, -1.0,
             1.0, b1, 0.0,
             x(2), 0.0, x(0) - g;
        Eigen::Vector3d step = J.partialPivLu().solve(f);
        x -= step;
        if (step.cwiseAbs().maxCoeff() < 1e-14) break;
    }
    return x;
}

DelaySystem build_rossler_delay(const ParamMap& p) {
    // Shifted so the nontrivial equilibrium sits at the origin.
    const double a1 = p.at("alpha1"), a2 = p.at("alpha2");
    const double b1 = p.at("beta1"), b2 = p.at("beta2"), g = p.at("gamma");
    const double tau1 = p.at("tau1"), tau2 = p.at("tau2");
    const Eigen::Vector3d xs = rossler_equilibrium(p);
    DelaySystem sys;
    sys.n = 3;
    sys.tau_max = std::max(tau1, tau2);
    sys.discrete_delays = {tau1, tau2};
    sys.params = p;
    sys.rhs = [a1, a2, b1, b2, g, xs](double, const Eigen::VectorXd& u,
                                      const std::vector<Eigen::VectorXd>& delayed,
                                      const Eigen::VectorXd&, Eigen::VectorXd& out) {
        const double x1 = u(0) + xs(0), x2 = u(1) + xs(1), x3 = u(2) + xs(2);
        const double x1_t1 = delayed[0](0) + xs(0);
        const double x1_t2 = delayed[1](0) + xs(0);
        out(0) = -x2 - x3 + a1 * x1_t1 + a2 * x1_t2;
        out(1) = x1 + b1 * x2;
        out(2) = b2 + x3 * x1 - g * x3;
    };
    return sys;
}

DelaySystem build_traffic(const ParamMap& p) {
    const double alpha = p.at("alpha"), beta = p.at("beta");
    const double beta_hat = p.at("beta_hat"), beta_m1 = p.at("beta_m1");
    const double v_ref = p.at("v_ref"), tau = p.at("tau");
    const double h_stop = p.at("h_stop"), h_go = p.at("h_go"), v_max = p.at("v_max");
    const double h_star = traffic_equilibrium_headway(v_ref, h_stop, h_go, v_max);
    DelaySystem sys;
    sys.n = 3;
    sys.tau_max = tau;
    sys.discrete_delays = {tau};
    sys.params = p;
    sys.params["h_star"] = h_star;
    sys.rhs = [=](double, const Eigen::VectorXd& y,
                  const std::vector<Eigen::VectorXd>& delayed,
                  const Eigen::VectorXd&, Eigen::VectorXd& out) {
        const double h_t = delayed[0](0), vm1_t = delayed[0](1), v_t = delayed[0](2);
        out(0) = y(2) - y(1);
        out(1) = alpha * (traffic_range_policy(h_t + h_star, h_stop, h_go, v_max) -
                          (vm1_t + v_ref)) +
                 beta * (v_t - vm1_t);
        out(2) = -beta_hat * v_t + beta_m1 * (vm1_t - v_t);
    };
    return sys;
}

DelaySystem build_cushing(const ParamMap& p) {
    // Direct distributed form: xdot = b int_0^tau x(t-s) ds + a (x - sin x).
    const double a = p.at("a"), b = p.at("b"), tau = p.at("tau");
    DelaySystem sys;
    sys.n = 1;
    sys.tau_max = tau;
    sys.params = p;
    DelaySystem::Distributed dist;
    dist.support = tau;
    dist.kernel = [](double) { return 1.0; };
    dist.constant_kernel = true;
    sys.distributed = dist;
    sys.rhs = [a, b](double, const Eigen::VectorXd& y,
                     const std::vector<Eigen::VectorXd>&,
                     const Eigen::VectorXd& integral, Eigen::VectorXd& out) {
        out(0) = b * integral(0) + a * (y(0) - std::sin(y(0)));
    };
    return sys;
}

DelaySystem build_cushing_lifted(const ParamMap& p) {
    // 2D recast with auxiliary z(t) = int_{t-tau}^t x; single discrete delay.
    const double a = p.at("a"), b = p.at("b"), tau = p.at("tau");
    DelaySystem sys;
    sys.n = 2;
    sys.tau_max = tau;
    sys.discrete_delays = {tau};
    sys.params = p;
    sys.rhs = [a, b](double, const Eigen::VectorXd& y,
                     const std::vector<Eigen::VectorXd>& delayed,
                     const Eigen::VectorXd&, Eigen::VectorXd& out) {
        out(0) = b * y(1) + a * (y(0) - std::sin(y(0)));
        out(1) = y(0) - delayed[0](0);
    };
    return sys;
}

std::vector<SystemCatalogEntry> make_catalog() {
    std::vector<SystemCatalogEntry> cat;
    auto origin = [](int n) {
        return [n](const ParamMap&) { return Eigen::VectorXd::Zero(n).eval(); };
    };
    cat.push_back({"hutchinson",
                   {{"r", 1.8}, {"K", 10.0}, {"tau", 1.0}},
                   build_hutchinson,
                   origin(1)});
    cat.push_back({"mackey-glass",
                   {{"beta", 4.0}, {"gamma", 2.0}, {"alpha", 9.6}, {"tau", 1.0}},
                   build_mackey_glass,
                   origin(1)});
    cat.push_back({"two-neuron",
                   {{"kappa", 0.5}, {"beta", -1.0}, {"a12", 1.0}, {"a21", 2.0},
                    {"tau_s", 1.5}, {"tau1", 2.0}, {"tau2", 2.0}},
                   build_two_neuron,
                   origin(2)});
    cat.push_back({"rossler-delay",
                   {{"alpha1", 0.2}, {"alpha2", 1.0}, {"beta1", 0.2}, {"beta2", 0.2},
                    {"gamma", 1.2}, {"tau1", 1.0}, {"tau2", 2.0}},
                   build_rossler_delay,
                   origin(3)});
    cat.push_back({"traffic",
                   {{"alpha", 0.3}, {"beta", 0.4}, {"beta_hat", 0.6}, {"beta_m1", -0.4},
                    {"v_ref", 26.55}, {"h_stop", 5.0}, {"h_go", 55.0}, {"v_max", 30.0},
                    {"tau", 1.0}},
                   build_traffic,
                   origin(3)});
    cat.push_back({"cushing",
                   {{"a", 1.0}, {"b", -3.0}, {"tau", 1.0}},
                   build_cushing,
                   origin(1)});
    cat.push_back({"cushing-lifted",
                   {{"a", 1.0}, {"b", -3.0}, {"tau", 1.0}},
                   build_cushing_lifted,
                   origin(2)});
    return cat;
}

const SystemCatalogEntry& find_entry(const std::string& name) {
    for (const auto& entry : system_catalog())
        if (entry.name == name) return entry;
    throw CatalogError("unknown system '" + name + "'");
}

}  // namespace

const std::vector<SystemCatalogEntry>& system_catalog() {
    static const std::vector<SystemCatalogEntry> catalog = make_catalog();
    return catalog;
}

DelaySystem build_system(const std::string& name, const ParamMap& overrides) {
    const auto& entry = find_entry(name);
    return entry.builder(merge_params(entry.default_params, overrides, name));
}

Eigen::VectorXd system_equilibrium(const std::string& name, const ParamMap& overrides) {
    const auto& entry = find_entry(name);
    return entry.equilibrium(merge_params(entry.default_params, overrides, name));
}

ParamMap resolved_params(const std::string& name, const ParamMap& overrides) {
    const auto& entry = find_entry(name);
    return merge_params(entry.default_params, overrides, name);
}

double equilibrium_residual(const DelaySystem& system, const Eigen::VectorXd& eq) {
    std::vector<Eigen::VectorXd> delayed(system.discrete_delays.size(), eq);
    Eigen::VectorXd integral = Eigen::VectorXd::Zero(system.n);
    if (system.distributed) {
        // Exact integral of a constant history against the kernel.
        const int m = 256;
        const double h = system.distributed->support / m;
        double weight = 0.0;
        if (system.distributed->constant_kernel) {
            weight = system.distributed->kernel(0.0) * system.distributed->support;
        } else {
            for (int i = 0; i <= m; ++i)
                weight += system.distributed->kernel(i * h) * ((i == 0 || i == m) ? 0.5 : 1.0);
            weight *= h;
        }
        integral = weight * eq;
    }
    return system.eval_rhs(0.0, eq, delayed, integral).cwiseAbs().maxCoeff();
}

DelaySystem micro_chaos_toy(double a, double p_gain, double resolution,
                            double sample_dt, int r) {
    if (a <= 0.0) throw ConfigError("micro-chaos toy needs a > 0");
    DelaySystem sys;
    sys.n = 1;
    sys.tau_max = std::max(r, 1) * sample_dt;
    sys.params = {{"a", a}, {"p_gain", p_gain}, {"resolution", resolution},
                  {"sample_dt", sample_dt}, {"r", static_cast<double>(r)}};
    sys.periodic_delay = DelaySystem::PeriodicDelay{sample_dt, r};
    sys.drift = [a](const Eigen::VectorXd& y, Eigen::VectorXd& out) {
        out.resize(1);
        out(0) = a * y(0);
    };
    sys.control = [p_gain](const Eigen::VectorXd& v, Eigen::VectorXd& out) {
        out.resize(1);
        out(0) = -p_gain * v(0);
    };
    return sys;
}

std::vector<double> micro_chaos_exact_orbit(double a, double p_gain,
                                            double resolution, double sample_dt,
                                            int r, double x0, int steps) {
    const double alpha = std::exp(a * sample_dt);
    const double beta = (p_gain / a) * (alpha - 1.0);
    std::vector<double> orbit;
    orbit.reserve(steps + 1);
    std::vector<double> pre(r + 1, x0);  // constant pre-history
    orbit.push_back(x0);
    for (int j = 0; j < steps; ++j) {
        const double measured = pre[0];
        const double x_next = alpha * pre[r] - beta * quantize(measured, resolution);
        for (int i = 0; i + 1 <= r; ++i) pre[i] = pre[i + 1];
        pre[r] = x_next;
        orbit.push_back(x_next);
    }
    return orbit;
}

double traffic_range_policy(double h, double h_stop, double h_go, double v_max) {
    if (h <= h_stop) return 0.0;
    if (h >= h_go) return v_max;
    return 0.5 * v_max * (1.0 - std::cos(M_PI * (h - h_stop) / (h_go - h_stop)));
}

double traffic_equilibrium_headway(double v_ref, double h_stop, double h_go,
                                   double v_max) {
    if (v_ref <= 0.0 || v_ref >= v_max)
        throw ConfigError("v_ref must lie strictly inside (0, v_max)");
    double lo = h_stop, hi = h_go;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (traffic_range_policy(mid, h_stop, h_go, v_max) < v_ref)
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-13) break;
    }
    return 0.5 * (lo + hi);
}

}  // namespace ssmdelay
