#include "paramest/homotopy.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

namespace paramest {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

double norm_inf(const Eigen::VectorXcd& x) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) m = std::max(m, std::abs(x[i]));
    return m;
}

bool finite(const Eigen::VectorXcd& x) {
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (!std::isfinite(x[i].real()) || !std::isfinite(x[i].imag())) return false;
    return true;
}

std::size_t thread_count(const TrackerConfig& c, std::size_t jobs) {
    std::size_t t = c.threads != 0 ? c.threads : std::max(1u, std::thread::hardware_concurrency());
    return std::max<std::size_t>(1, std::min(t, jobs));
}

template <class F>
void parallel_for(std::size_t count, std::size_t threads, F&& body) {
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) body(i);
        });
    for (auto& th : pool) th.join();
}

Complex random_unit(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    return std::polar(1.0, u(rng));
}

Eigen::VectorXcd random_complex(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXcd x(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = Complex(g(rng), g(rng));
    return x;
}

bool same_point(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b, double tol) {
    return norm_inf(a - b) <= tol * std::max(1.0, norm_inf(a));
}

// H(x, s) with derivatives.
class Homotopy {
public:
    virtual ~Homotopy() = default;
    virtual std::size_t dim() const = 0;
    virtual void evaluate(const Eigen::VectorXcd& x, double s, Eigen::VectorXcd& h, Eigen::MatrixXcd& hx,
                          Eigen::VectorXcd* hs) const = 0;
};

class TotalDegreeHomotopy final : public Homotopy {
public:
    TotalDegreeHomotopy(const CompiledSystem& f, std::vector<int> degrees, Complex gamma)
        : f_(f), degrees_(std::move(degrees)), gamma_(gamma) {}
    std::size_t dim() const override { return f_.unknowns(); }
    void evaluate(const Eigen::VectorXcd& x, double s, Eigen::VectorXcd& h, Eigen::MatrixXcd& hx,
                  Eigen::VectorXcd* hs) const override {
        const auto n = static_cast<Eigen::Index>(dim());
        Eigen::VectorXcd f(n);
        f_.evaluate(x.data(), f);
        f_.jacobian(x.data(), hx);
        hx *= s;
        h.resize(n);
        if (hs) hs->resize(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const int d = degrees_[static_cast<std::size_t>(i)];
            const Complex xd1 = std::pow(x[i], d - 1);
            const Complex g = xd1 * x[i] - 1.0;
            h[i] = (1.0 - s) * gamma_ * g + s * f[i];
            hx(i, i) += (1.0 - s) * gamma_ * static_cast<double>(d) * xd1;
            if (hs) (*hs)[i] = f[i] - gamma_ * g;
        }
    }

private:
    const CompiledSystem& f_;
    std::vector<int> degrees_;
    Complex gamma_;
};

class ParameterHomotopy final : public Homotopy {
public:
    ParameterHomotopy(const CompiledSystem& f, Eigen::VectorXcd from, Eigen::VectorXcd to)
        : f_(f), from_(std::move(from)), dir_(to - from_) {}
    std::size_t dim() const override { return f_.unknowns(); }
    void evaluate(const Eigen::VectorXcd& x, double s, Eigen::VectorXcd& h, Eigen::MatrixXcd& hx,
                  Eigen::VectorXcd* hs) const override {
        const auto n = static_cast<Eigen::Index>(f_.unknowns());
        Eigen::VectorXcd at(n + from_.size());
        at.head(n) = x;
        at.tail(from_.size()) = from_ + s * dir_;
        f_.evaluate(at.data(), h);
        f_.jacobian(at.data(), hx);
        if (hs) f_.data_derivative(at.data(), dir_, *hs);
    }

private:
    const CompiledSystem& f_;
    Eigen::VectorXcd from_;
    Eigen::VectorXcd dir_;
};

enum class PathStatus { success, diverged, failed };

struct PathResult {
    Eigen::VectorXcd x;
    PathStatus status = PathStatus::failed;
};

class Tracker {
public:
    Tracker(const Homotopy& h, const TrackerConfig& c) : h_(h), c_(c) {}

    PathResult track(Eigen::VectorXcd x, double max_step) const {
        double s = 0.0;
        double step = std::min(c_.initial_step, max_step);
        int streak = 0;
        for (std::size_t k = 0; k < c_.max_steps && s < 1.0; ++k) {
            const double hstep = std::min(step, 1.0 - s);
            Eigen::VectorXcd xn;
            bool ok = predict(x, s, hstep, xn) && correct(xn, s + hstep);
            if (ok) {
                s = (1.0 - s - hstep <= 0.0) ? 1.0 : s + hstep;
                x = std::move(xn);
                if (norm_inf(x) > c_.divergence) return {x, PathStatus::diverged};
                if (++streak >= 3) {
                    step = std::min(2.0 * step, max_step);
                    streak = 0;
                }
            } else {
                step *= 0.5;
                streak = 0;
                if (step < c_.min_step) {
                    const bool big = norm_inf(x) > std::sqrt(c_.divergence);
                    return {x, big ? PathStatus::diverged : PathStatus::failed};
                }
            }
        }
        return {x, s >= 1.0 ? PathStatus::success : PathStatus::failed};
    }

private:
    bool tangent(const Eigen::VectorXcd& x, double s, Eigen::VectorXcd& dx) const {
        Eigen::VectorXcd h;
        Eigen::MatrixXcd hx;
        Eigen::VectorXcd hs;
        h_.evaluate(x, s, h, hx, &hs);
        dx = -hx.partialPivLu().solve(hs);
        return finite(dx);
    }

    bool predict(const Eigen::VectorXcd& x, double s, double h, Eigen::VectorXcd& out) const {
        Eigen::VectorXcd k1, k2, k3, k4;
        if (!tangent(x, s, k1)) return false;
        if (!tangent(x + 0.5 * h * k1, s + 0.5 * h, k2)) return false;
        if (!tangent(x + 0.5 * h * k2, s + 0.5 * h, k3)) return false;
        if (!tangent(x + h * k3, s + h, k4)) return false;
        out = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        return finite(out);
    }

    bool correct(Eigen::VectorXcd& x, double s) const {
        Eigen::VectorXcd h;
        Eigen::MatrixXcd hx;
        double previous = inf;
        for (int it = 0; it < c_.max_corrector_iterations; ++it) {
            h_.evaluate(x, s, h, hx, nullptr);
            const Eigen::VectorXcd dx = -hx.partialPivLu().solve(h);
            if (!finite(dx)) return false;
            const double size = norm_inf(dx);
            const double scale = 1.0 + norm_inf(x);
            // The first update doubles as the predictor error estimate.
            if (it == 0 && size > 1e-3 * scale) return false;
            // Stagnation at the noise floor of an ill-conditioned Jacobian.
            if (it > 0 && size > 0.5 * previous) return previous <= noise_floor * scale;
            x += dx;
            if (size <= c_.path_tol * scale) return true;
            previous = size;
        }
        return previous <= noise_floor * scale_of(x);
    }

    static double scale_of(const Eigen::VectorXcd& x) { return 1.0 + norm_inf(x); }
    static constexpr double noise_floor = 1e-7;

    const Homotopy& h_;
    const TrackerConfig& c_;
};

std::vector<PathResult> track_all(const Homotopy& h, const std::vector<Eigen::VectorXcd>& starts,
                                  const TrackerConfig& c, double max_step) {
    std::vector<PathResult> out(starts.size());
    const Tracker tracker(h, c);
    parallel_for(starts.size(), thread_count(c, starts.size()),
                 [&](std::size_t i) { out[i] = tracker.track(starts[i], max_step); });
    return out;
}

// Retracks paths whose nonsingular endpoints collide, with smaller steps.
void resolve_collisions(const Homotopy& h, const std::vector<Eigen::VectorXcd>& starts,
                        std::vector<PathResult>& results, const TrackerConfig& c) {
    double max_step = c.max_step;
    for (int round = 0; round < 3; ++round) {
        std::vector<std::size_t> bad;
        for (std::size_t i = 0; i < results.size(); ++i) {
            if (results[i].status != PathStatus::success) continue;
            for (std::size_t j = 0; j < i; ++j) {
                if (results[j].status == PathStatus::success &&
                    same_point(results[i].x, results[j].x, 1e-6)) {
                    bad.push_back(i);
                    bad.push_back(j);
                }
            }
        }
        if (bad.empty()) return;
        std::sort(bad.begin(), bad.end());
        bad.erase(std::unique(bad.begin(), bad.end()), bad.end());
        // Singular endpoints legitimately collide; only retrack when a
        // smaller step could change the outcome.
        max_step /= 8.0;
        TrackerConfig tight = c;
        tight.path_tol = c.path_tol * 1e-2;
        std::vector<Eigen::VectorXcd> again;
        for (std::size_t i : bad) again.push_back(starts[i]);
        const auto redo = track_all(h, again, tight, max_step);
        for (std::size_t k = 0; k < bad.size(); ++k) results[bad[k]] = redo[k];
    }
}

bool is_real(const Eigen::VectorXcd& x, double tol) {
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (std::abs(x[i].imag()) > tol * std::max(1.0, std::abs(x[i]))) return false;
    return true;
}

// Polishes, filters side conditions, dedupes, and scores endpoints.
SolutionSet finish(const PolynomialSystem& numeric, const std::vector<PathResult>& results,
                   const TrackerConfig& c, const char* method) {
    SolutionSet out;
    out.method = method;
    out.paths_tracked = results.size();
    for (const auto& r : results) {
        if (r.status == PathStatus::diverged) {
            ++out.diverged_paths;
            continue;
        }
        if (r.status != PathStatus::success) {
            ++out.failed_paths;
            continue;
        }
        const NewtonResult polished = newton_refine(numeric, r.x, c.corrector_tol, 20);
        Solution s;
        s.polished = polished.converged && finite(polished.point);
        s.point = s.polished ? polished.point : r.x;
        bool violates = false;
        for (const auto& side : numeric.side_conditions)
            if (scaled_value(side, s.point) < c.side_condition_tol) violates = true;
        if (violates) continue;
        bool duplicate = false;
        for (const auto& prev : out.solutions)
            if (same_point(prev.point, s.point, c.dedupe_tol)) duplicate = true;
        if (duplicate) continue;
        s.residual = scaled_residual(numeric.residual_system(), s.point);
        s.real = is_real(s.point, c.real_tol);
        out.solutions.push_back(std::move(s));
    }
    return out;
}

void require_square(const PolynomialSystem& sys) {
    if (!sys.is_square())
        throw std::invalid_argument("homotopy: system has " + std::to_string(sys.polys.size()) + " equations in " +
                                    std::to_string(sys.unknown_count()) + " unknowns");
}

}  // namespace

std::size_t SolutionSet::real_count() const {
    return static_cast<std::size_t>(std::count_if(solutions.begin(), solutions.end(), [](const Solution& s) { return s.real; }));
}

CompiledSystem::CompiledSystem(const std::vector<ComplexPolynomial>& polys, std::size_t unknowns, std::size_t data)
    : rows_(polys.size()), unknowns_(unknowns), data_(data) {
    for (std::size_t i = 0; i < polys.size(); ++i) {
        const auto row = static_cast<std::uint32_t>(i);
        append(polys[i], row, 0, values_);
        for (int v : polys[i].variables()) {
            if (static_cast<std::size_t>(v) < unknowns)
                append(polys[i].derivative(v), row, static_cast<std::uint32_t>(v), jacobian_);
            else
                append(polys[i].derivative(v), row, static_cast<std::uint32_t>(static_cast<std::size_t>(v) - unknowns),
                       data_jacobian_);
        }
    }
}

void CompiledSystem::append(const ComplexPolynomial& p, std::uint32_t row, std::uint32_t column,
                            std::vector<Block>& blocks) {
    Block b{row, column, static_cast<std::uint32_t>(terms_.size()), 0};
    for (const auto& [m, c] : p.terms()) {
        Term t{c, static_cast<std::uint32_t>(factors_.size()), 0};
        for (const auto& [v, e] : m.factors())
            factors_.emplace_back(static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(e));
        t.end = static_cast<std::uint32_t>(factors_.size());
        terms_.push_back(t);
    }
    b.end = static_cast<std::uint32_t>(terms_.size());
    blocks.push_back(b);
}

Complex CompiledSystem::eval_terms(std::uint32_t begin, std::uint32_t end, const Complex* at) const {
    Complex acc(0.0);
    for (std::uint32_t t = begin; t < end; ++t) {
        Complex v = terms_[t].coefficient;
        for (std::uint32_t f = terms_[t].begin; f < terms_[t].end; ++f) {
            const Complex x = at[factors_[f].first];
            Complex p = x;
            for (std::uint32_t k = 1; k < factors_[f].second; ++k) p *= x;
            v *= p;
        }
        acc += v;
    }
    return acc;
}

void CompiledSystem::evaluate(const Complex* at, Eigen::VectorXcd& f) const {
    f.setZero(static_cast<Eigen::Index>(rows_));
    for (const auto& b : values_) f[b.row] += eval_terms(b.begin, b.end, at);
}

void CompiledSystem::jacobian(const Complex* at, Eigen::MatrixXcd& j) const {
    j.setZero(static_cast<Eigen::Index>(rows_), static_cast<Eigen::Index>(unknowns_));
    for (const auto& b : jacobian_) j(b.row, b.column) += eval_terms(b.begin, b.end, at);
}

void CompiledSystem::data_derivative(const Complex* at, const Eigen::VectorXcd& direction, Eigen::VectorXcd& out) const {
    out.setZero(static_cast<Eigen::Index>(rows_));
    for (const auto& b : data_jacobian_) {
        const Complex d = direction[b.column];
        if (d != 0.0) out[b.row] += eval_terms(b.begin, b.end, at) * d;
    }
}

NewtonResult newton_refine(const PolynomialSystem& sys, const Eigen::VectorXcd& point, double tol, int max_iterations) {
    if (sys.data_count() != 0) throw std::invalid_argument("newton_refine: system has unassigned data symbols");
    const CompiledSystem f(sys.polys, sys.unknown_count());
    NewtonResult r;
    r.point = point;
    Eigen::VectorXcd value;
    Eigen::MatrixXcd jac;
    for (int it = 0; it < max_iterations; ++it) {
        f.evaluate(r.point.data(), value);
        f.jacobian(r.point.data(), jac);
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(jac);
        qr.setThreshold(1e-13);
        r.iterations = it + 1;
        if (qr.rank() < jac.cols()) break;
        const Eigen::VectorXcd dx = -qr.solve(value);
        if (!finite(dx)) break;
        r.point += dx;
        if (norm_inf(dx) <= tol * std::max(1.0, norm_inf(r.point))) {
            r.converged = true;
            break;
        }
    }
    r.residual = scaled_residual(sys.residual_system(), r.point);
    return r;
}

SolutionSet solve_total_degree(const PolynomialSystem& sys, const TrackerConfig& config) {
    if (sys.data_count() != 0) throw std::invalid_argument("solve_total_degree: system has unassigned data symbols");
    require_square(sys);
    const std::vector<int> degrees = sys.degrees();
    for (int d : degrees)
        if (d == 0) throw std::invalid_argument("solve_total_degree: constant equation in a square system");
    const std::uint64_t paths = sys.bezout_number();
    if (paths > (std::uint64_t(1) << 26)) throw std::invalid_argument("solve_total_degree: Bezout number too large");

    std::mt19937_64 rng(config.seed);
    const Complex gamma = random_unit(rng);
    std::vector<Eigen::VectorXcd> starts;
    starts.reserve(paths);
    const auto n = static_cast<Eigen::Index>(degrees.size());
    std::vector<int> digit(degrees.size(), 0);
    for (std::uint64_t k = 0; k < paths; ++k) {
        Eigen::VectorXcd x(n);
        for (Eigen::Index i = 0; i < n; ++i)
            x[i] = std::polar(1.0, 2.0 * std::numbers::pi * digit[static_cast<std::size_t>(i)] /
                                       degrees[static_cast<std::size_t>(i)]);
        starts.push_back(std::move(x));
        for (std::size_t i = 0; i < digit.size(); ++i) {
            if (++digit[i] < degrees[i]) break;
            digit[i] = 0;
        }
    }
    const CompiledSystem f(sys.polys, sys.unknown_count());
    const TotalDegreeHomotopy h(f, degrees, gamma);
    auto results = track_all(h, starts, config, config.max_step);
    resolve_collisions(h, starts, results, config);
    return finish(sys, results, config, "total-degree");
}

SolutionSet track_parameter(const PolynomialSystem& parametric, const Eigen::VectorXcd& q_from,
                            const std::vector<Eigen::VectorXcd>& starts, const Eigen::VectorXcd& q_to,
                            const TrackerConfig& config) {
    require_square(parametric);
    const CompiledSystem f(parametric.polys, parametric.unknown_count(), parametric.data_count());
    const ParameterHomotopy h(f, q_from, q_to);
    auto results = track_all(h, starts, config, config.max_step);
    resolve_collisions(h, starts, results, config);
    return finish(parametric.instantiate(q_to), results, config, "parameter");
}

MonodromyResult solve_monodromy(const PolynomialSystem& parametric, const Eigen::VectorXcd& start_point,
                                const Eigen::VectorXcd& start_data, const TrackerConfig& config,
                                const VertexSource& vertex_source) {
    require_square(parametric);
    const CompiledSystem f(parametric.polys, parametric.unknown_count(), parametric.data_count());
    std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
    MonodromyResult out;
    out.data = start_data;
    const PolynomialSystem base = parametric.instantiate(start_data);
    {
        const NewtonResult r = newton_refine(base, start_point, config.corrector_tol, 20);
        out.solutions.push_back(r.converged ? r.point : start_point);
    }

    auto known = [&](const Eigen::VectorXcd& x) {
        for (const auto& s : out.solutions)
            if (same_point(s, x, 1e-6)) return true;
        return false;
    };

    int stall = 0;
    const std::size_t dq = static_cast<std::size_t>(start_data.size());
    while (stall < config.monodromy_stall_loops && out.loops < static_cast<std::size_t>(config.monodromy_max_loops)) {
        ++out.loops;
        // Each data value is multiplied by a random factor whose phase stays
        // within +-0.45 pi, so no coordinate passes near zero along a leg
        // (leading coefficients vanishing there send paths to infinity).
        // Triangles of varying size reach branch points at different
        // distances.
        const double r = std::ldexp(1.0, static_cast<int>(out.loops % 3) - 3);
        std::normal_distribution<double> g(0.0, 1.0);
        auto vertex = [&] {
            Eigen::VectorXcd q(static_cast<Eigen::Index>(dq));
            for (std::size_t j = 0; j < dq; ++j) {
                const auto i = static_cast<Eigen::Index>(j);
                const double phase = std::clamp(r * 1.5 * g(rng), -0.45 * std::numbers::pi, 0.45 * std::numbers::pi);
                const Complex factor = std::polar(std::exp(r * g(rng)), phase);
                q[i] = std::abs(start_data[i]) > 1e-12 ? start_data[i] * factor
                                                        : r * (1.0 + norm_inf(start_data)) * Complex(g(rng), g(rng));
            }
            return q;
        };
        const Eigen::VectorXcd qa = vertex_source ? vertex_source(rng) : vertex();
        const Eigen::VectorXcd qb = vertex_source ? vertex_source(rng) : vertex();
        std::vector<Eigen::VectorXcd> current = out.solutions;
        const std::size_t count = current.size();
        std::vector<bool> alive(count, true);
        const Eigen::VectorXcd legs[4] = {start_data, qa, qb, start_data};
        for (int leg = 0; leg < 3; ++leg) {
            const ParameterHomotopy h(f, legs[leg], legs[leg + 1]);
            std::vector<Eigen::VectorXcd> starts;
            std::vector<std::size_t> which;
            for (std::size_t i = 0; i < count; ++i)
                if (alive[i]) {
                    starts.push_back(current[i]);
                    which.push_back(i);
                }
            const auto results = track_all(h, starts, config, config.max_step);
            out.paths_tracked += results.size();
            for (std::size_t k = 0; k < results.size(); ++k) {
                if (results[k].status == PathStatus::success) {
                    current[which[k]] = results[k].x;
                } else {
                    alive[which[k]] = false;
                    ++out.failed_paths;
                }
            }
        }
        std::size_t found = 0;
        for (std::size_t i = 0; i < count; ++i) {
            if (!alive[i]) continue;
            const NewtonResult r = newton_refine(base, current[i], config.corrector_tol, 20);
            if (!r.converged || known(r.point)) continue;
            out.solutions.push_back(r.point);
            ++found;
        }
        // A loop that lost most of its paths says little about completeness.
        const auto survived = static_cast<std::size_t>(std::count(alive.begin(), alive.end(), true));
        if (found > 0)
            stall = 0;
        else if (2 * survived > count)
            ++stall;
    }
    return out;
}

SolutionSet solve(const PolynomialSystem& sys, const TrackerConfig& config) {
    require_square(sys);
    if (sys.data_count() != 0) throw std::invalid_argument("solve: system has unassigned data symbols");
    if (sys.bezout_number() <= config.max_total_degree_paths) return solve_total_degree(sys, config);

    // Family F(x) - c with the constant shifts c as data.
    const std::size_t n = sys.unknown_count();
    PolynomialSystem family;
    family.variables = sys.variables;
    family.labels = sys.labels;
    for (std::size_t i = 0; i < n; ++i) {
        family.data_symbols.push_back("$c" + std::to_string(i));
        family.polys.push_back(sys.polys[i] - ComplexPolynomial::variable(static_cast<int>(n + i)));
    }
    std::mt19937_64 rng(config.seed);
    const Eigen::VectorXcd x0 = random_complex(n, rng);
    const CompiledSystem f(sys.polys, n);
    Eigen::VectorXcd c0;
    f.evaluate(x0.data(), c0);
    // vertices are images of random points, so every fiber is nonempty
    auto vertex = [&f, n](std::mt19937_64& r) {
        Eigen::VectorXcd c;
        f.evaluate(random_complex(n, r).data(), c);
        return c;
    };
    const MonodromyResult mono = solve_monodromy(family, x0, c0, config, vertex);
    // Residuals and side conditions are those of the original system.
    PolynomialSystem target = family;
    target.side_conditions = sys.side_conditions;
    target.residual_polys.clear();
    for (const auto& p : sys.residual_system()) target.residual_polys.push_back(p);
    SolutionSet out = track_parameter(target, mono.data, mono.solutions, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(n)),
                                      config);
    out.method = "monodromy";
    out.paths_tracked += mono.paths_tracked;
    return out;
}

}  // namespace paramest
