#include "ssmdelay/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "ssmdelay/errors.hpp"
#include "ssmdelay/systems.hpp"

namespace ssmdelay {

namespace {

constexpr double kDedupTol = 1e-6;
constexpr double kJacStep = 1e-6;

/// Transform of the distributed kernel, int_0^s k(theta) e^{-mu theta} dtheta.
Complex kernel_transform(const CharMatrix::DistTerm& dist, Complex mu) {
    const double s = dist.support;
    if (dist.constant_kernel) {
        const Complex z = mu * s;
        if (std::abs(z) < 1e-4) {
            // Series around the removable singularity at mu = 0.
            return dist.kernel0 * s *
                   (1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0);
        }
        return dist.kernel0 * (1.0 - std::exp(-z)) / mu;
    }
    // Composite Simpson on a fine grid for general kernels.
    const int m = 512;
    const double h = s / m;
    Complex acc = 0.0;
    for (int i = 0; i <= m; ++i) {
        const double th = i * h;
        double w = (i == 0 || i == m) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * dist.kernel(th) * std::exp(-mu * th);
    }
    return acc * (h / 3.0);
}

double residual_bound(const CharMatrix& cm, Complex mu) {
    return 1e-9 * std::max(1.0, std::pow(1.0 + std::abs(mu), cm.n));
}

}  // namespace

Eigen::MatrixXcd CharMatrix::evaluate(Complex mu) const {
    Eigen::MatrixXcd d = mu * Eigen::MatrixXcd::Identity(n, n);
    d -= L.cast<Complex>();
    for (const auto& [tau, R] : delayed) d -= std::exp(-mu * tau) * R.cast<Complex>();
    if (dist) d -= kernel_transform(*dist, mu) * dist->B.cast<Complex>();
    return d;
}

Complex CharMatrix::det(Complex mu) const {
    if (n == 1) return evaluate(mu)(0, 0);
    return evaluate(mu).partialPivLu().determinant();
}

Complex CharMatrix::det_derivative(Complex mu) const {
    const double h = 1e-7;
    const Complex dre = (det(mu + h) - det(mu - h)) / (2.0 * h);
    const Complex dim = (det(mu + Complex(0, h)) - det(mu - Complex(0, h))) /
                        Complex(0, 2.0 * h);
    return 0.5 * (dre + dim);
}

std::optional<Complex> Spectrum::dominant(double im_floor) const {
    for (const auto& r : roots)
        if (std::abs(r.value.imag()) > im_floor) return r.value;
    return std::nullopt;
}

CharMatrix linearize(const DelaySystem& system, const Eigen::VectorXd& equilibrium) {
    if (equilibrium_residual(system, equilibrium) > 1e-10)
        throw ConfigError("linearize: point is not an equilibrium to 1e-10");

    const int n = system.n;
    CharMatrix cm;
    cm.n = n;
    cm.L.setZero(n, n);

    // Distributed base value at the equilibrium history.
    Eigen::VectorXd base_integral = Eigen::VectorXd::Zero(n);
    double kernel_mass = 0.0;
    if (system.distributed) {
        if (system.distributed->constant_kernel) {
            kernel_mass = system.distributed->kernel(0.0) * system.distributed->support;
        } else {
            const int m = 512;
            const double h = system.distributed->support / m;
            for (int i = 0; i <= m; ++i)
                kernel_mass +=
                    system.distributed->kernel(i * h) * ((i == 0 || i == m) ? 0.5 : 1.0);
            kernel_mass *= h;
        }
        base_integral = kernel_mass * equilibrium;
    }

    std::vector<Eigen::VectorXd> delayed(system.discrete_delays.size(), equilibrium);
    auto eval = [&](const Eigen::VectorXd& y,
                    const std::vector<Eigen::VectorXd>& del,
                    const Eigen::VectorXd& integral) {
        return system.eval_rhs(0.0, y, del, integral);
    };

    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd yp = equilibrium, ym = equilibrium;
        yp(j) += kJacStep;
        ym(j) -= kJacStep;
        cm.L.col(j) = (eval(yp, delayed, base_integral) -
                       eval(ym, delayed, base_integral)) /
                      (2 * kJacStep);
    }

    for (size_t d = 0; d < system.discrete_delays.size(); ++d) {
        Eigen::MatrixXd R(n, n);
        for (int j = 0; j < n; ++j) {
            auto del_p = delayed, del_m = delayed;
            del_p[d](j) += kJacStep;
            del_m[d](j) -= kJacStep;
            R.col(j) = (eval(equilibrium, del_p, base_integral) -
                        eval(equilibrium, del_m, base_integral)) /
                       (2 * kJacStep);
        }
        cm.delayed.emplace_back(system.discrete_delays[d], R);
    }

    if (system.distributed) {
        CharMatrix::DistTerm dist;
        dist.support = system.distributed->support;
        dist.constant_kernel = system.distributed->constant_kernel;
        dist.kernel0 = system.distributed->kernel(0.0);
        dist.kernel = system.distributed->kernel;
        dist.B.resize(n, n);
        for (int j = 0; j < n; ++j) {
            Eigen::VectorXd ip = base_integral, im = base_integral;
            ip(j) += kJacStep;
            im(j) -= kJacStep;
            dist.B.col(j) = (eval(equilibrium, delayed, ip) -
                             eval(equilibrium, delayed, im)) /
                            (2 * kJacStep);
        }
        cm.dist = dist;
    }
    return cm;
}

std::optional<RootInfo> polish_root(const CharMatrix& cm, Complex seed) {
    Complex mu = seed;
    for (int it = 0; it < 80; ++it) {
        const Complex f = cm.det(mu);
        const Complex fp = cm.det_derivative(mu);
        if (std::abs(fp) == 0.0) return std::nullopt;
        const Complex step = f / fp;
        mu -= step;
        if (!std::isfinite(mu.real()) || !std::isfinite(mu.imag())) return std::nullopt;
        if (std::abs(step) < 1e-13 * (1.0 + std::abs(mu))) {
            const double res = std::abs(cm.det(mu));
            if (res < residual_bound(cm, mu)) return RootInfo{mu, res};
            return std::nullopt;
        }
    }
    return std::nullopt;
}

Spectrum roots_in_window(const CharMatrix& cm, double re_min, double re_max,
                         double im_max, int seeds_per_axis) {
    if (re_min >= re_max || im_max < 0.0)
        throw ConfigError("roots_in_window: empty window");

    Spectrum spec;
    spec.re_min = re_min;
    spec.re_max = re_max;
    spec.im_max = im_max;

    std::vector<Complex> found;
    auto accept = [&](Complex mu, double res) {
        if (mu.imag() < 0.0) mu = std::conj(mu);  // real coefficients
        if (mu.real() < re_min - 1e-9 || mu.real() > re_max + 1e-9 ||
            mu.imag() > im_max + 1e-9)
            return;
        if (std::abs(mu.imag()) < kDedupTol) mu = Complex(mu.real(), 0.0);
        for (const auto& other : found)
            if (std::abs(mu - other) < kDedupTol) return;
        found.push_back(mu);
        spec.roots.push_back({mu, res});
        if (std::abs(mu.imag()) >= kDedupTol)
            spec.roots.push_back({std::conj(mu), res});
    };

    for (int i = 0; i < seeds_per_axis; ++i) {
        for (int j = 0; j < seeds_per_axis; ++j) {
            const double re =
                re_min + (re_max - re_min) * (i + 0.5) / seeds_per_axis;
            const double im = im_max * (j + 0.5) / seeds_per_axis;
            if (auto root = polish_root(cm, Complex(re, im)))
                accept(root->value, root->residual);
        }
    }

    std::sort(spec.roots.begin(), spec.roots.end(),
              [](const RootInfo& a, const RootInfo& b) {
                  if (a.value.real() != b.value.real())
                      return a.value.real() > b.value.real();
                  return a.value.imag() > b.value.imag();
              });
    spec.empty_warning = spec.roots.empty();
    return spec;
}

int smoothness_class(const Spectrum& spec, int sigma_size, int k_cap, bool* resonant) {
    if (resonant) *resonant = false;
    if (static_cast<int>(spec.roots.size()) < sigma_size + 1)
        throw ConfigError("smoothness_class: spectrum smaller than sigma_size + 1");

    double in_inf = spec.roots[0].value.real();
    for (int i = 0; i < sigma_size; ++i)
        in_inf = std::min(in_inf, spec.roots[i].value.real());
    double out_sup = spec.roots[sigma_size].value.real();
    for (size_t i = sigma_size; i < spec.roots.size(); ++i)
        out_sup = std::max(out_sup, spec.roots[i].value.real());

    if (in_inf > 0.0 && out_sup < 0.0) return kSmoothnessInfinite;

    int best = 0;
    for (int ell = 1; ell <= k_cap; ++ell) {
        const double gap = ell * in_inf - out_sup;
        if (std::abs(gap) < 1e-10 && resonant) *resonant = true;
        if (gap > 1e-10) best = ell;
    }
    return best;
}

TrackResult track_rightmost(const std::function<CharMatrix(double)>& family,
                            const std::vector<double>& grid, double re_min,
                            double re_max, double im_max, double im_floor) {
    if (grid.empty()) throw ConfigError("track_rightmost: empty grid");
    TrackResult result;

    auto seed_root = [&](double param) -> Complex {
        const CharMatrix cm = family(param);
        auto spec = roots_in_window(cm, re_min, re_max, im_max);
        auto dom = spec.dominant(im_floor);
        if (!dom) throw NumericError("track_rightmost: no root found at seed");
        return dom->imag() >= 0 ? *dom : std::conj(*dom);
    };

    auto continue_root = [&](double param, Complex prev) -> Complex {
        const CharMatrix cm = family(param);
        auto polished = polish_root(cm, prev);
        if (!polished ||
            std::abs(polished->value - prev) > 0.5 * (1.0 + std::abs(prev)))
            return seed_root(param);  // track loss: re-seed
        Complex mu = polished->value;
        return mu.imag() >= 0 ? mu : std::conj(mu);
    };

    Complex root = seed_root(grid.front());
    result.path.push_back({grid.front(), root});
    for (size_t i = 1; i < grid.size(); ++i) {
        root = continue_root(grid[i], root);
        result.path.push_back({grid[i], root});
    }

    for (size_t i = 0; i + 1 < result.path.size(); ++i) {
        const double f0 = result.path[i].root.real();
        const double f1 = result.path[i + 1].root.real();
        if (f0 == 0.0 || f0 * f1 >= 0.0) continue;
        double lo = result.path[i].param, hi = result.path[i + 1].param;
        Complex lo_root = result.path[i].root;
        const bool increasing = f1 > f0;
        while (hi - lo > 1e-4) {
            const double mid = 0.5 * (lo + hi);
            const Complex mid_root = continue_root(mid, lo_root);
            const bool positive = mid_root.real() > 0.0;
            if (positive == increasing)
                hi = mid;
            else {
                lo = mid;
                lo_root = mid_root;
            }
        }
        result.crossing = 0.5 * (lo + hi);
        result.crossing_root = continue_root(result.crossing.value(), lo_root);
        break;
    }
    return result;
}

}  // namespace ssmdelay
