#include "ssmdelay/parametric.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

#include "ssmdelay/errors.hpp"

namespace ssmdelay {

namespace {

double rotation_rate(const SSMModel& model) {
    double w = 0.0;
    for (const auto& ev : model_eigenvalues(model)) w = std::max(w, std::abs(ev.imag()));
    return w;
}

/// Natural cubic spline through (x_i, y_i), evaluated at x.
double spline_eval(const std::vector<double>& xs, const std::vector<double>& ys,
                   double x) {
    const int n = static_cast<int>(xs.size());
    if (n == 2) {
        const double t = (x - xs[0]) / (xs[1] - xs[0]);
        return (1 - t) * ys[0] + t * ys[1];
    }
    std::vector<double> h(n - 1);
    for (int i = 0; i < n - 1; ++i) h[i] = xs[i + 1] - xs[i];
    std::vector<double> a(n, 0), b(n, 0), c(n, 0), r(n, 0);
    b[0] = 1.0;
    b[n - 1] = 1.0;
    for (int i = 1; i < n - 1; ++i) {
        a[i] = h[i - 1];
        b[i] = 2.0 * (h[i - 1] + h[i]);
        c[i] = h[i];
        r[i] = 6.0 * ((ys[i + 1] - ys[i]) / h[i] - (ys[i] - ys[i - 1]) / h[i - 1]);
    }
    // Thomas algorithm.
    for (int i = 1; i < n; ++i) {
        const double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        r[i] -= m * r[i - 1];
    }
    std::vector<double> m2(n);
    m2[n - 1] = r[n - 1] / b[n - 1];
    for (int i = n - 2; i >= 0; --i) m2[i] = (r[i] - c[i] * m2[i + 1]) / b[i];

    int seg = std::clamp(static_cast<int>(std::upper_bound(xs.begin(), xs.end(), x) -
                                          xs.begin()) - 1,
                         0, n - 2);
    const double dx = x - xs[seg];
    const double hh = h[seg];
    const double A = (xs[seg + 1] - x) / hh, B = dx / hh;
    return A * ys[seg] + B * ys[seg + 1] +
           ((A * A * A - A) * m2[seg] + (B * B * B - B) * m2[seg + 1]) * hh * hh / 6.0;
}

}  // namespace

PoincareSection PoincareSection::default_for(int d) {
    if (d < 2) throw ConfigError("Poincare section needs d >= 2");
    PoincareSection s;
    s.base = Eigen::VectorXd::Zero(d);
    s.normal = Eigen::VectorXd::Zero(d);
    s.normal(0) = 1.0;
    s.direction = Eigen::VectorXd::Zero(d);
    s.direction(1) = 1.0;
    s.orientation = +1;
    return s;
}

PoincareReturn poincare_map(const SSMModel& model, const PoincareSection& section,
                            double x0, const PoincareOptions& opts) {
    if (!model.has_polyfield())
        throw ConfigError("poincare_map needs polynomial reduced dynamics");
    if (std::abs(section.normal.norm() - 1.0) > 1e-12)
        throw ConfigError("section normal must be a unit vector");

    const double omega = rotation_rate(model);
    if (omega <= 0) throw NumericError("poincare_map: model has no rotation");
    const double period = 2.0 * M_PI / omega;
    const double h = (opts.step > 0) ? opts.step : period / 400.0;
    const double max_time = (opts.max_time > 0) ? opts.max_time : 20.0 * period;

    Eigen::VectorXd eta = section.point(x0);
    if (std::abs(section.normal.dot(eta - section.base)) > 1e-10 * (1.0 + eta.norm()))
        throw ConfigError("poincare_map: start point is off the section");

    const double sgn = section.orientation >= 0 ? 1.0 : -1.0;
    auto s_of = [&](const Eigen::VectorXd& p) {
        return sgn * section.normal.dot(p - section.base);
    };

    bool armed = false;
    double t = 0.0;
    double s_prev = s_of(eta);
    const double scale = 1.0 + eta.norm();

    while (t < max_time) {
        Eigen::VectorXd eta_next = model.advance(eta, h);
        if (!eta_next.allFinite() || eta_next.norm() > 1e6 * scale)
            throw NumericError("poincare_map: reduced trajectory diverged");
        const double s_next = s_of(eta_next);
        if (!armed && s_next < -1e-12 * scale) armed = true;
        if (armed && s_prev < 0.0 && s_next >= 0.0) {
            // Bisection on the step fraction.
            double lo = 0.0, hi = 1.0;
            Eigen::VectorXd cross = eta_next;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                cross = model.advance(eta, mid * h);
                const double sm = s_of(cross);
                if (std::abs(sm) < opts.section_tol * scale) break;
                if (sm < 0)
                    lo = mid;
                else
                    hi = mid;
            }
            PoincareReturn ret;
            ret.eta = cross;
            ret.x = section.coordinate(cross);
            ret.time = t + 0.5 * (lo + hi) * h;
            return ret;
        }
        eta = eta_next;
        s_prev = s_next;
        t += h;
    }
    throw NumericError("poincare_map: no return within the time budget");
}

std::vector<MapFixedPoint> map_fixed_points(
    const std::function<double(double)>& map, const std::vector<double>& seeds,
    double min_amplitude, double newton_tol, double dedup_tol) {
    std::vector<MapFixedPoint> found;
    // Near a fold the map has a double root and Newton stops anywhere within
    // ~sqrt(newton_tol) of it; widen the merge radius accordingly.
    const double merge_tol = std::max(dedup_tol, 25.0 * std::sqrt(newton_tol));
    for (double seed : seeds) {
        double x = seed;
        bool ok = false;
        try {
            for (int it = 0; it < 25; ++it) {
                const double g = map(x) - x;
                if (std::abs(g) < newton_tol * (1.0 + std::abs(x))) {
                    ok = true;
                    break;
                }
                const double fd = 1e-6 * std::max(1.0, std::abs(x));
                const double gp = (map(x + fd) - map(x - fd)) / (2 * fd) - 1.0;
                if (gp == 0.0 || !std::isfinite(gp)) break;
                const double step = g / gp;
                x -= step;
                if (!std::isfinite(x)) break;
                if (std::abs(step) < 1e-13 * (1.0 + std::abs(x))) {
                    ok = std::abs(map(x) - x) < newton_tol * (1.0 + std::abs(x));
                    break;
                }
            }
        } catch (const std::exception&) {
            continue;  // map undefined along the way (diverged / no return)
        }
        if (!ok || std::abs(x) < min_amplitude) continue;
        bool dup = false;
        for (const auto& f : found)
            if (std::abs(f.x - x) < merge_tol) dup = true;
        if (dup) continue;
        try {
            const double fd = 1e-6 * std::max(1.0, std::abs(x));
            const double deriv = (map(x + fd) - map(x - fd)) / (2 * fd);
            found.push_back({x, deriv, std::abs(deriv) < 1.0});
        } catch (const std::exception&) {
        }
    }
    std::sort(found.begin(), found.end(),
              [](const MapFixedPoint& a, const MapFixedPoint& b) { return a.x < b.x; });
    return found;
}

std::vector<LimitCycle> find_limit_cycles(const SSMModel& model,
                                          const PoincareSection& section,
                                          const std::vector<double>& seeds,
                                          const CycleSearchOptions& opts) {
    if (seeds.empty()) throw ConfigError("find_limit_cycles: seed list empty");
    auto P = [&](double x) { return poincare_map(model, section, x, opts.poincare).x; };
    auto fixed = map_fixed_points(P, seeds, opts.min_amplitude, opts.newton_tol,
                                  opts.dedup_tol);
    std::vector<LimitCycle> cycles;
    for (const auto& f : fixed) {
        LimitCycle c;
        c.x = f.x;
        c.map_slope = f.deriv;
        c.stable = f.stable;
        c.return_time = poincare_map(model, section, f.x, opts.poincare).time;
        cycles.push_back(c);
    }
    return cycles;
}

ParametricSSM ParametricSSM::create(std::vector<double> nodes,
                                    std::vector<SSMModel> models, Scheme scheme) {
    if (nodes.size() != models.size() || nodes.size() < 2)
        throw ConfigError("parametric SSM needs matching nodes/models, at least 2");
    for (size_t i = 1; i < nodes.size(); ++i)
        if (nodes[i] <= nodes[i - 1])
            throw ConfigError("parametric SSM nodes must be strictly increasing");

    const SSMModel& ref = models.front();
    for (const auto& m : models) {
        if (m.d != ref.d || m.k != ref.k)
            throw ConfigError("all node models must share SSM and embedding dimension");
        if (m.man_basis.size() != ref.man_basis.size())
            throw ConfigError("all node models must share the manifold order");
        if (m.has_polyfield() != ref.has_polyfield())
            throw ConfigError("all node models must share the dynamics kind");
        if (m.has_polyfield() &&
            m.polyfield().basis.size() != ref.polyfield().basis.size())
            throw ConfigError("all node models must share the dynamics order");
    }

    // Gauge-fix every node against the first: orthogonal Procrustes
    // Omega = argmin ||V1_i Omega - V1_ref||_F, then recompose coefficients.
    for (size_t i = 1; i < models.size(); ++i) {
        SSMModel& m = models[i];
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(m.V1.transpose() * ref.V1,
                                              Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Eigen::MatrixXd omega = svd.matrixU() * svd.matrixV().transpose();
        m.V1 = m.V1 * omega;
        if (m.man_basis.size() > 0)
            m.V_nl = m.V_nl * m.man_basis.linear_recompose(omega);
        if (m.has_polyfield()) {
            PolyField pf = m.polyfield();
            pf.R = omega.transpose() * pf.R * pf.basis.linear_recompose(omega);
            m.dynamics = std::move(pf);
        } else if (m.has_rbf()) {
            RBFMap map = m.rbf();
            map.centers = map.centers * omega;
            map.weights = map.weights * omega;
            m.dynamics = std::move(map);
        }
    }

    ParametricSSM family;
    family.nodes_ = std::move(nodes);
    family.models_ = std::move(models);
    family.scheme_ = scheme;
    return family;
}

Eigen::MatrixXd ParametricSSM::interp_matrix(
    const std::function<Eigen::MatrixXd(int)>& get, double mu) const {
    const int n = static_cast<int>(nodes_.size());
    const Eigen::MatrixXd first = get(0);
    Eigen::MatrixXd out(first.rows(), first.cols());
    if (scheme_ == Scheme::Linear) {
        int seg = std::clamp(static_cast<int>(std::upper_bound(nodes_.begin(),
                                                               nodes_.end(), mu) -
                                              nodes_.begin()) - 1,
                             0, n - 2);
        const double t = (mu - nodes_[seg]) / (nodes_[seg + 1] - nodes_[seg]);
        out = (1 - t) * get(seg) + t * get(seg + 1);
        return out;
    }
    std::vector<double> ys(n);
    for (int r = 0; r < first.rows(); ++r) {
        for (int c = 0; c < first.cols(); ++c) {
            for (int i = 0; i < n; ++i) ys[i] = get(i)(r, c);
            out(r, c) = spline_eval(nodes_, ys, mu);
        }
    }
    return out;
}

SSMModel ParametricSSM::at(double mu) const {
    if (mu < nodes_.front() - 1e-12 || mu > nodes_.back() + 1e-12)
        throw ConfigError("parametric SSM: parameter outside the node hull");
    mu = std::clamp(mu, nodes_.front(), nodes_.back());

    SSMModel out = models_.front();
    out.V1 = interp_matrix([&](int i) { return models_[i].V1; }, mu);
    // Re-orthonormalize, keeping the interpolated orientation.
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(out.V1);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(out.k, out.d);
    const Eigen::MatrixXd Rdiag =
        qr.matrixQR().topRows(out.d).triangularView<Eigen::Upper>();
    for (int j = 0; j < out.d; ++j)
        if (Rdiag(j, j) < 0) Q.col(j) = -Q.col(j);
    out.V1 = Q;

    if (out.man_basis.size() > 0) {
        out.V_nl = interp_matrix([&](int i) { return models_[i].V_nl; }, mu);
        out.V_nl -= out.V1 * (out.V1.transpose() * out.V_nl);
    }
    out.anchor = interp_matrix(
        [&](int i) { return Eigen::MatrixXd(models_[i].anchor); }, mu);

    if (models_.front().has_polyfield()) {
        PolyField pf = models_.front().polyfield();
        pf.R = interp_matrix([&](int i) { return models_[i].polyfield().R; }, mu);
        out.dynamics = std::move(pf);
    }
    return out;
}

BifurcationDiagram fold_scan(const ParametricSSM& family,
                             const PoincareSection& section,
                             const std::vector<double>& grid,
                             const FoldScanOptions& opts) {
    if (grid.empty()) throw ConfigError("fold_scan: empty grid");
    BifurcationDiagram diagram;

    std::vector<double> default_seeds;
    for (int i = 0; i < opts.default_seed_count; ++i)
        default_seeds.push_back(-opts.seed_radius +
                                2.0 * opts.seed_radius * (i + 0.5) / opts.default_seed_count);

    std::vector<double> carry;  // continuation seeds from the previous point
    auto census = [&](double mu, const std::vector<double>& extra) {
        SSMModel model = family.at(mu);
        std::vector<double> seeds = default_seeds;
        seeds.insert(seeds.end(), extra.begin(), extra.end());
        return find_limit_cycles(model, section, seeds, opts.search);
    };

    for (double mu : grid) {
        try {
            auto cycles = census(mu, carry);
            carry.clear();
            for (const auto& c : cycles) carry.push_back(c.x);
            diagram.points.push_back({mu, std::move(cycles)});
        } catch (const std::exception&) {
            diagram.gaps.push_back(mu);
            diagram.points.push_back({mu, {}});
        }
    }

    for (size_t i = 0; i + 1 < diagram.points.size(); ++i) {
        const int n_lo = static_cast<int>(diagram.points[i].cycles.size());
        const int n_hi = static_cast<int>(diagram.points[i + 1].cycles.size());
        if (n_hi < n_lo + 2 && n_lo < n_hi + 2) continue;
        const bool birth = n_hi > n_lo;
        const int target = std::max(n_lo, n_hi);
        double lo = diagram.points[i].mu, hi = diagram.points[i + 1].mu;
        std::vector<double> side_seeds;
        for (const auto& c : diagram.points[i + (birth ? 1 : 0)].cycles)
            side_seeds.push_back(c.x);
        while (hi - lo > opts.refine_tol) {
            const double mid = 0.5 * (lo + hi);
            int count = 0;
            try {
                count = static_cast<int>(census(mid, side_seeds).size());
            } catch (const std::exception&) {
                count = -1;
            }
            const bool rich = count >= target;
            if (rich == birth)
                hi = mid;
            else
                lo = mid;
        }
        diagram.folds.push_back(0.5 * (lo + hi));
    }
    return diagram;
}

MapFoldScan fold_scan_map_family(
    const std::function<std::function<double(double)>(double)>& family,
    const std::vector<double>& grid, const std::vector<double>& seeds,
    double refine_tol, double min_amplitude) {
    MapFoldScan scan;
    scan.grid = grid;
    for (double mu : grid)
        scan.points.push_back(map_fixed_points(family(mu), seeds, min_amplitude));
    for (size_t i = 0; i + 1 < grid.size(); ++i) {
        const int n_lo = static_cast<int>(scan.points[i].size());
        const int n_hi = static_cast<int>(scan.points[i + 1].size());
        if (std::abs(n_hi - n_lo) < 2) continue;
        const bool birth = n_hi > n_lo;
        const int target = std::max(n_lo, n_hi);
        double lo = grid[i], hi = grid[i + 1];
        while (hi - lo > refine_tol) {
            const double mid = 0.5 * (lo + hi);
            const int count =
                static_cast<int>(map_fixed_points(family(mid), seeds, min_amplitude).size());
            if ((count >= target) == birth)
                hi = mid;
            else
                lo = mid;
        }
        scan.folds.push_back(0.5 * (lo + hi));
    }
    return scan;
}

double odd_symmetry_defect(const SSMModel& model,
                           const std::vector<Eigen::VectorXd>& samples) {
    if (samples.empty()) throw ConfigError("odd_symmetry_defect: no samples");
    double acc = 0.0;
    for (const auto& eta : samples)
        acc += (model.field(-eta) + model.field(eta)).norm();
    return acc / samples.size();
}

}  // namespace ssmdelay
