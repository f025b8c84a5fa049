#include "paramest/interpolation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "paramest/errors.hpp"
#include "paramest/series.hpp"

namespace paramest {

double BarycentricInterpolant::operator()(double t) const {
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < support_points.size(); ++j) {
        const double diff = t - support_points[j];
        if (diff == 0.0 && weights[j] != 0.0) return support_values[j];
        if (diff == 0.0) continue;
        const double c = weights[j] / diff;
        num += c * support_values[j];
        den += c;
    }
    if (den == 0.0) throw PoleError("barycentric denominator vanishes");
    return num / den;
}

std::string SchemeSpec::name() const {
    if (family == Family::aaa) {
        if (tol == 1e-13) return "aaa";
        std::ostringstream out;
        out << "aaa:" << tol;
        return out.str();
    }
    return "fh" + std::to_string(d);
}

SchemeSpec parse_scheme(const std::string& text) {
    if (text == "aaa") return SchemeSpec::aaa();
    if (text.rfind("aaa:", 0) == 0) {
        std::size_t used = 0;
        double tol = 0.0;
        try {
            tol = std::stod(text.substr(4), &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != text.size() - 4 || !(tol > 0.0 && tol < 1.0))
            throw std::invalid_argument("bad AAA tolerance in '" + text + "' (expected aaa:<tol> with 0 < tol < 1)");
        return SchemeSpec::aaa(tol);
    }
    if (text.size() > 2 && text.rfind("fh", 0) == 0) {
        const std::string digits = text.substr(2);
        if (std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; }))
            return SchemeSpec::floater_hormann(std::stoi(digits));
    }
    throw std::invalid_argument("unknown interpolation scheme '" + text + "' (expected aaa, aaa:<tol> or fh<d>)");
}

std::vector<SchemeSpec> default_schemes() {
    return {SchemeSpec::aaa(), SchemeSpec::floater_hormann(3), SchemeSpec::floater_hormann(6),
            SchemeSpec::floater_hormann(8)};
}

namespace {
void check_data(std::span<const double> times, std::span<const double> values) {
    if (times.size() != values.size()) throw std::invalid_argument("times and values differ in length");
    if (times.empty()) throw std::invalid_argument("interpolation needs at least one point");
    for (std::size_t i = 1; i < times.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (times[i] == times[j]) throw std::invalid_argument("interpolation times must be distinct");
}
}  // namespace

BarycentricInterpolant aaa_fit(std::span<const double> times, std::span<const double> values, double tol,
                               std::size_t mmax) {
    check_data(times, values);
    const std::size_t n = times.size();
    if (mmax == 0 || mmax > n) mmax = n;

    double fmax = 0.0;
    double fmean = 0.0;
    for (double f : values) {
        fmax = std::max(fmax, std::abs(f));
        fmean += f;
    }
    fmean /= static_cast<double>(n);

    BarycentricInterpolant r;
    std::vector<bool> is_support(n, false);
    Eigen::VectorXd approx = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), fmean);
    Eigen::VectorXd weights;
    for (std::size_t m = 1; m <= mmax; ++m) {
        std::size_t pick = n;
        double worst = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (is_support[i]) continue;
            const double e = std::abs(values[i] - approx[static_cast<Eigen::Index>(i)]);
            if (e > worst) {
                worst = e;
                pick = i;
            }
        }
        if (pick == n) break;
        if (m > 1 && worst <= tol * fmax) break;
        is_support[pick] = true;
        r.support_points.push_back(times[pick]);
        r.support_values.push_back(values[pick]);

        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < n; ++i)
            if (!is_support[i]) rest.push_back(i);
        const Eigen::Index rows = static_cast<Eigen::Index>(rest.size());
        const Eigen::Index cols = static_cast<Eigen::Index>(m);
        Eigen::MatrixXd cauchy(rows, cols);
        Eigen::MatrixXd loewner(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            const std::size_t di = rest[static_cast<std::size_t>(i)];
            for (Eigen::Index k = 0; k < cols; ++k) {
                const double c = 1.0 / (times[di] - r.support_points[static_cast<std::size_t>(k)]);
                cauchy(i, k) = c;
                loewner(i, k) = (values[di] - r.support_values[static_cast<std::size_t>(k)]) * c;
            }
        }
        if (rows == 0) {
            weights = Eigen::VectorXd::Ones(cols);
            break;
        }
        if (rows + 1 < cols) {
            // Fewer samples than weights: pick the lowest denominator degree
            // (sum of weights zero) within the null space.
            loewner.conservativeResize(rows + 1, cols);
            const double norm = std::max(loewner.topRows(rows).norm(), 1.0);
            loewner.row(rows).setConstant(norm);
        }
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(loewner, Eigen::ComputeFullV);
        weights = svd.matrixV().col(cols - 1);

        Eigen::VectorXd fw(cols);
        for (Eigen::Index k = 0; k < cols; ++k) fw[k] = weights[k] * r.support_values[static_cast<std::size_t>(k)];
        const Eigen::VectorXd num = cauchy * fw;
        const Eigen::VectorXd den = cauchy * weights;
        for (std::size_t i = 0; i < n; ++i) approx[static_cast<Eigen::Index>(i)] = values[i];
        for (Eigen::Index i = 0; i < rows; ++i)
            approx[static_cast<Eigen::Index>(rest[static_cast<std::size_t>(i)])] = num[i] / den[i];
    }
    if (weights.size() == 0) weights = Eigen::VectorXd::Ones(1);
    r.weights.assign(weights.data(), weights.data() + weights.size());
    return r;
}

BarycentricInterpolant fh_fit(std::span<const double> times, std::span<const double> values, int d) {
    check_data(times, values);
    const int n = static_cast<int>(times.size()) - 1;
    if (d < 0 || d > n) throw std::invalid_argument("Floater-Hormann order must satisfy 0 <= d < number of points");
    std::vector<std::size_t> order(times.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return times[a] < times[b]; });
    BarycentricInterpolant r;
    for (std::size_t i : order) {
        r.support_points.push_back(times[i]);
        r.support_values.push_back(values[i]);
    }
    const auto& x = r.support_points;
    r.weights.assign(x.size(), 0.0);
    for (int k = 0; k <= n; ++k) {
        double sum = 0.0;
        for (int i = std::max(0, k - d); i <= std::min(k, n - d); ++i) {
            double prod = 1.0;
            for (int j = i; j <= i + d; ++j)
                if (j != k) prod /= std::abs(x[static_cast<std::size_t>(k)] - x[static_cast<std::size_t>(j)]);
            sum += prod;
        }
        r.weights[static_cast<std::size_t>(k)] = ((k - d) % 2 == 0 ? 1.0 : -1.0) * sum;
    }
    return r;
}

BarycentricInterpolant fit(const SchemeSpec& scheme, std::span<const double> times, std::span<const double> values) {
    if (scheme.family == SchemeSpec::Family::aaa) return aaa_fit(times, values, scheme.tol, scheme.mmax);
    return fh_fit(times, values, scheme.d);
}

std::vector<double> taylor_eval(const BarycentricInterpolant& r, double t, int order) {
    if (order < 0) throw std::invalid_argument("order must be non-negative");
    const std::size_t len = static_cast<std::size_t>(order) + 1;
    const std::size_t m = r.size();
    std::size_t anchor = m;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
        if (r.weights[j] == 0.0) continue;
        const double dist = std::abs(t - r.support_points[j]);
        if (dist < best) {
            best = dist;
            anchor = j;
        }
    }
    if (anchor == m) throw PoleError("interpolant has no nonzero weights");

    // (t - z_a) / (t - z_j) as a series in h, t -> t + h.
    const Series<double> near(std::vector<double>{t - r.support_points[anchor], 1.0});
    // r - f_a is accumulated directly so constant data stays exactly constant.
    const double fa = r.support_values[anchor];
    Series<double> num(0.0);
    Series<double> den(r.weights[anchor]);
    double scale = std::abs(r.weights[anchor]);
    for (std::size_t j = 0; j < m; ++j) {
        if (j == anchor || r.weights[j] == 0.0) continue;
        const double b = t - r.support_points[j];
        if (b == 0.0) throw PoleError("evaluation point coincides with a zero-weight support point");
        std::vector<double> inv(len);
        double p = 1.0 / b;
        for (std::size_t k = 0; k < len; ++k) {
            inv[k] = p;
            p *= -1.0 / b;
        }
        Series<double> ratio = near * Series<double>(std::move(inv));
        std::vector<double> trimmed(ratio.coefficients().begin(), ratio.coefficients().begin() + static_cast<long>(len));
        ratio = Series<double>(std::move(trimmed));
        num += ratio.scaled(r.weights[j] * (r.support_values[j] - fa));
        den += ratio.scaled(r.weights[j]);
        scale += std::abs(r.weights[j] * ratio[0]);
    }
    if (std::abs(den[0]) < 1e-13 * scale) throw PoleError("evaluation point is a pole of the interpolant");
    std::vector<double> nc(num.coefficients());
    std::vector<double> dc(den.coefficients());
    nc.resize(len, 0.0);
    dc.resize(len, 0.0);
    const Series<double> q = Series<double>(std::move(nc)) / Series<double>(std::move(dc));
    std::vector<double> out(len);
    for (std::size_t k = 0; k < len; ++k) out[k] = q.derivative(k);
    out[0] += fa;
    return out;
}

double nudge_eval_point(const BarycentricInterpolant& r, double t, double lo, double hi) {
    const double span = hi - lo;
    std::size_t nearest = r.size();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < r.size(); ++j) {
        const double dist = std::abs(t - r.support_points[j]);
        if (dist < best) {
            best = dist;
            nearest = j;
        }
    }
    if (nearest == r.size() || best > 1e-8 * span) return t;
    const double z = r.support_points[nearest];
    double shifted = t >= z ? z + 1e-6 * span : z - 1e-6 * span;
    if (shifted > hi) shifted = z - 1e-6 * span;
    if (shifted < lo) shifted = z + 1e-6 * span;
    return shifted;
}

}  // namespace paramest
