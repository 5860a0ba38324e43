#include "ssmdelay/chaos.hpp"

#include <algorithm>
#include <cmath>

#include "ssmdelay/errors.hpp"

namespace ssmdelay {

namespace {

Eigen::MatrixXd subsample_rows(const Eigen::MatrixXd& points, int cap) {
    if (points.rows() <= cap) return points;
    Eigen::MatrixXd out(cap, points.cols());
    const double step = static_cast<double>(points.rows()) / cap;
    for (int i = 0; i < cap; ++i) out.row(i) = points.row(static_cast<int>(i * step));
    return out;
}

struct LineFit {
    double slope, intercept, stderr_slope, r_squared;
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = static_cast<int>(x.size());
    double sx = 0, sy = 0;
    for (int i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (int i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit fit{};
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double ss_res = 0, ss_tot = 0;
    for (int i = 0; i < n; ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        ss_res += r * r;
        ss_tot += (y[i] - my) * (y[i] - my);
    }
    fit.stderr_slope = (n > 2) ? std::sqrt(ss_res / (n - 2) / sxx) : 0.0;
    fit.r_squared = (ss_tot > 0) ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

}  // namespace

CorrDimFit correlation_dimension(const Eigen::MatrixXd& points, int radii_count,
                                 int window_lo, int window_hi, int subsample_cap) {
    if (points.rows() < 10) throw ConfigError("correlation_dimension: too few points");
    if (radii_count < 8) throw ConfigError("correlation_dimension: too few radii");
    const Eigen::MatrixXd P = subsample_rows(points, subsample_cap);
    const int N = static_cast<int>(P.rows());

    // Pass 1: distance range.
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
            const double d = (P.row(i) - P.row(j)).norm();
            dmax = std::max(dmax, d);
            if (d > 0) dmin = std::min(dmin, d);
        }
    }
    if (!(dmax > 0)) throw ConfigError("correlation_dimension: degenerate cloud");
    const double l_max = dmax;
    const double l_min = std::max(dmin, dmax * 1e-3);

    CorrDimFit fit;
    fit.points_used = N;
    fit.radii.resize(radii_count);
    const double log_lo = std::log(l_min), log_hi = std::log(l_max);
    for (int i = 0; i < radii_count; ++i)
        fit.radii[i] = std::exp(log_lo + (log_hi - log_lo) * i / (radii_count - 1));

    // Pass 2: counts below each radius via a log-bin histogram.
    std::vector<long long> bins(radii_count + 1, 0);
    const double scale = (radii_count - 1) / (log_hi - log_lo);
    for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
            const double d = (P.row(i) - P.row(j)).norm();
            if (d <= 0) {
                ++bins[0];
                continue;
            }
            // First radius index strictly above d.
            int idx = static_cast<int>(std::floor((std::log(d) - log_lo) * scale)) + 1;
            idx = std::clamp(idx, 0, radii_count);
            while (idx < radii_count && fit.radii[idx] <= d) ++idx;
            while (idx > 0 && fit.radii[idx - 1] > d) --idx;
            ++bins[idx];
        }
    }
    fit.corr.resize(radii_count);
    long long cum = 0;
    for (int i = 0; i < radii_count; ++i) {
        cum += bins[i];
        fit.corr[i] = static_cast<double>(cum) / (static_cast<double>(N) * N);
    }

    // Local slopes between consecutive radii with nonzero counts.
    std::vector<int> ok;  // indices with C > 0
    for (int i = 0; i < radii_count; ++i)
        if (fit.corr[i] > 0) ok.push_back(i);

    auto run_valid = [&](int a, int b) {  // ok-index range, inclusive
        double mean = 0.0;
        int cnt = 0;
        std::vector<double> slopes;
        for (int i = a; i < b; ++i) {
            const double s = (std::log(fit.corr[ok[i + 1]]) - std::log(fit.corr[ok[i]])) /
                             (std::log(fit.radii[ok[i + 1]]) - std::log(fit.radii[ok[i]]));
            slopes.push_back(s);
            mean += s;
            ++cnt;
        }
        mean /= cnt;
        if (mean <= 0) return false;
        for (double s : slopes)
            if (std::abs(s - mean) > 0.15 * std::abs(mean)) return false;
        return true;
    };

    int best_a = -1, best_b = -1;
    if (window_lo >= 0 && window_hi > window_lo) {
        fit.window_lo = window_lo;
        fit.window_hi = std::min(window_hi, radii_count - 1);
    } else {
        for (int a = 0; a < static_cast<int>(ok.size()); ++a) {
            for (int b = a + 4; b < static_cast<int>(ok.size()); ++b) {
                if (!run_valid(a, b)) continue;
                if (b - a > best_b - best_a) {
                    best_a = a;
                    best_b = b;
                }
            }
        }
        if (best_a < 0) {
            fit.window_stable = false;
            // Fallback: central half of the usable radii.
            best_a = static_cast<int>(ok.size()) / 4;
            best_b = std::min<int>(best_a + std::max<size_t>(4, ok.size() / 2),
                                   static_cast<int>(ok.size()) - 1);
        }
        fit.window_lo = ok[best_a];
        fit.window_hi = ok[best_b];
    }

    std::vector<double> xs, ys;
    for (int i = fit.window_lo; i <= fit.window_hi; ++i) {
        if (fit.corr[i] <= 0) continue;
        xs.push_back(std::log(fit.radii[i]));
        ys.push_back(std::log(fit.corr[i]));
    }
    if (xs.size() < 5) throw NumericError("correlation_dimension: no usable scaling window");
    const LineFit line = fit_line(xs, ys);
    fit.slope = line.slope;
    fit.slope_stderr = line.stderr_slope;
    return fit;
}

int embedding_dimension_rule(double m) {
    if (m <= 0) throw ConfigError("embedding_dimension_rule: m must be positive");
    int d = 2;
    while (!(d > 2.0 * m)) d += 2;
    return d;
}

LyapunovFit lyapunov_from_ensemble(const std::vector<Eigen::MatrixXd>& members,
                                   double dt, double attractor_diameter) {
    const int n = static_cast<int>(members.size());
    if (n < 2) throw ConfigError("lyapunov: need at least 2 ensemble members");
    const int T = static_cast<int>(members[0].rows());
    for (const auto& m : members)
        if (m.rows() != T) throw ConfigError("lyapunov: ensemble members must align");

    LyapunovFit out;
    out.times.resize(T);
    out.mean_normalized.assign(T, 0.0);
    out.mean_raw.assign(T, 0.0);

    std::vector<double> d0;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            d0.push_back((members[i].row(0) - members[j].row(0)).norm());

    const int pairs = static_cast<int>(d0.size());
    for (int t = 0; t < T; ++t) {
        out.times[t] = t * dt;
        double acc = 0.0, raw = 0.0;
        int p = 0;
        for (int i = 0; i < n; ++i) {
            for (int j = i + 1; j < n; ++j, ++p) {
                const double d = (members[i].row(t) - members[j].row(t)).norm();
                raw += d;
                if (d0[p] > 0) acc += d / d0[p];
            }
        }
        out.mean_normalized[t] = acc / pairs;
        out.mean_raw[t] = raw / pairs;
    }

    int cut = T;
    for (int t = 0; t < T; ++t) {
        if (out.mean_raw[t] > 0.1 * attractor_diameter) {
            cut = t;
            break;
        }
    }
    if (cut < 5)
        throw NumericError("lyapunov: separation saturates immediately; use a smaller epsilon");

    std::vector<double> xs, ys;
    for (int t = 0; t < cut; ++t) {
        if (out.mean_normalized[t] <= 0) continue;
        xs.push_back(out.times[t]);
        ys.push_back(std::log(out.mean_normalized[t]));
    }
    const LineFit line = fit_line(xs, ys);
    out.fit_points = static_cast<int>(xs.size());
    out.lambda = line.slope;
    out.r_squared = line.r_squared;
    return out;
}

PdfReport pdf_compare(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, int bins) {
    if (a.rows() == 0 || b.rows() == 0) throw ConfigError("pdf_compare: empty input");
    if (a.cols() != b.cols()) throw ConfigError("pdf_compare: coordinate count mismatch");
    const int dim = static_cast<int>(a.cols());
    PdfReport report;
    report.ranges.resize(dim);
    report.hist_a.resize(dim);
    report.hist_b.resize(dim);
    report.l1.resize(dim);

    for (int c = 0; c < dim; ++c) {
        const double lo = std::min(a.col(c).minCoeff(), b.col(c).minCoeff());
        const double hi = std::max(a.col(c).maxCoeff(), b.col(c).maxCoeff());
        report.ranges[c] = {lo, hi};

        int nb = bins;
        if (nb <= 0) {
            // Freedman-Diaconis on the union sample.
            std::vector<double> all;
            all.reserve(a.rows() + b.rows());
            for (int i = 0; i < a.rows(); ++i) all.push_back(a(i, c));
            for (int i = 0; i < b.rows(); ++i) all.push_back(b(i, c));
            std::sort(all.begin(), all.end());
            const double q1 = all[all.size() / 4];
            const double q3 = all[(3 * all.size()) / 4];
            const double width = 2.0 * (q3 - q1) / std::cbrt(static_cast<double>(all.size()));
            nb = (width > 0 && hi > lo)
                     ? std::clamp(static_cast<int>(std::ceil((hi - lo) / width)), 1, 512)
                     : 1;
        }
        if (hi <= lo) nb = 1;

        auto histogram = [&](const Eigen::MatrixXd& m) {
            Eigen::VectorXd h = Eigen::VectorXd::Zero(nb);
            for (int i = 0; i < m.rows(); ++i) {
                int idx = (hi > lo) ? static_cast<int>((m(i, c) - lo) / (hi - lo) * nb) : 0;
                idx = std::clamp(idx, 0, nb - 1);
                h(idx) += 1.0;
            }
            return (h / m.rows()).eval();
        };
        report.hist_a[c] = histogram(a);
        report.hist_b[c] = histogram(b);
        report.l1[c] = (report.hist_a[c] - report.hist_b[c]).cwiseAbs().sum();
        report.max_l1 = std::max(report.max_l1, report.l1[c]);
        report.bins = nb;
    }
    return report;
}

}  // namespace ssmdelay
