#pragma once

#include "transdro/types.hpp"

#include <functional>

namespace transdro {

struct SolverConfig {
    double pg_tol = 1e-8;        // relative objective-change stop
    int pg_max_iter = 20000;
    double mu_bisect_tol = 1e-6; // relative constraint residual
    double mu_max = 1e12;        // bisection bracket cap
};

/// Euclidean projection onto the probability simplex (sort-and-threshold).
inline Vector project_simplex(const Vector& v) {
    const Eigen::Index k = v.size();
    std::vector<double> u(v.data(), v.data() + k);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double css = 0.0, theta = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
        css += u[static_cast<std::size_t>(j)];
        const double t = (css - 1.0) / static_cast<double>(j + 1);
        if (u[static_cast<std::size_t>(j)] - t > 0.0) theta = t;
    }
    return (v.array() - theta).max(0.0);
}

/// Projection onto the bounded candidate set: entry 0 in [0,1], rest in [-1,1].
inline Vector project_bounded(const Vector& v) {
    Vector w = v;
    w[0] = std::clamp(w[0], 0.0, 1.0);
    for (Eigen::Index i = 1; i < w.size(); ++i) w[i] = std::clamp(w[i], -1.0, 1.0);
    return w;
}

/// f(x) = x'Ax + b'x + c with A symmetric PSD.
struct QuadraticObjective {
    Matrix a;
    Vector b;
    double c = 0.0;

    double value(const Vector& x) const { return x.dot(a * x) + b.dot(x) + c; }
    Vector gradient(const Vector& x) const { return 2.0 * (a * x) + b; }
    // max eigenvalue bound via the row-sum (infinity) norm
    double eigen_bound() const { return a.cwiseAbs().rowwise().sum().maxCoeff(); }

    static QuadraticObjective least_squares(const Matrix& m, const Vector& y) {
        const double inv_n = 1.0 / static_cast<double>(m.rows());
        return QuadraticObjective{(m.transpose() * m) * inv_n, -2.0 * inv_n * (m.transpose() * y),
                                  y.squaredNorm() * inv_n};
    }
};

struct PgResult {
    Vector x;
    double objective = 0.0;
    int iterations = 0;
    double stationarity = 0.0; // ||P(x - s grad) - x|| / s at the final iterate
    bool converged = false;
};

using Projector = Vector (*)(const Vector&);

/// Projected gradient with the fixed step 1/(2 * eigen bound), stopped on
/// relative objective change.
inline PgResult minimize_projected(const QuadraticObjective& f, Projector proj, Vector x0,
                                   const SolverConfig& cfg) {
    const double step = 1.0 / std::max(2.0 * f.eigen_bound(), 1e-12);
    Vector x = proj(x0);
    double fx = f.value(x);
    PgResult res;
    for (res.iterations = 0; res.iterations < cfg.pg_max_iter; ++res.iterations) {
        const Vector x_next = proj(x - step * f.gradient(x));
        const double f_next = f.value(x_next);
        const double move = (x_next - x).lpNorm<Eigen::Infinity>();
        const bool stop =
            move == 0.0 || std::abs(fx - f_next) <= cfg.pg_tol * std::max(1.0, std::abs(f_next));
        x = x_next;
        fx = f_next;
        if (stop) {
            ++res.iterations;
            res.converged = true;
            break;
        }
    }
    res.x = x;
    res.objective = fx;
    res.stationarity = (proj(x - step * f.gradient(x)) - x).norm() / step;
    return res;
}

inline Vector uniform_weight(Eigen::Index k) {
    return Vector::Constant(k, 1.0 / static_cast<double>(k));
}

/// argmin over the simplex of (1/n)||y - M w||^2.
inline PgResult simplex_least_squares(const Matrix& m, const Vector& y,
                                      const SolverConfig& cfg = {}) {
    return minimize_projected(QuadraticObjective::least_squares(m, y), &project_simplex,
                              uniform_weight(m.cols()), cfg);
}

/// Same objective over the bounded candidate set.
inline PgResult bounded_least_squares(const Matrix& m, const Vector& y,
                                      const SolverConfig& cfg = {}) {
    return minimize_projected(QuadraticObjective::least_squares(m, y), &project_bounded,
                              uniform_weight(m.cols()), cfg);
}

} // namespace transdro
