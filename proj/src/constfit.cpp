#include "pisr/constfit.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace pisr {

void FitConfig::validate() const {
    if (max_iterations < 1) throw std::invalid_argument("fit: max_iterations must be >= 1");
    if (!(gradient_tolerance > 0) || !(step_tolerance > 0))
        throw std::invalid_argument("fit: tolerances must be positive");
}

namespace {

Eigen::VectorXd project(Eigen::VectorXd c, const FitConfig& cfg) {
    for (int j = 0; j < c.size(); ++j) {
        if (j < static_cast<int>(cfg.constant_bounds.size()) && cfg.constant_bounds[j]) {
            const auto& [lo, hi] = *cfg.constant_bounds[j];
            c[j] = std::clamp(c[j], lo, hi);
        }
    }
    return c;
}

FitResult quasi_newton(Eigen::VectorXd c, const ResidualFn& residual, const FitConfig& cfg,
                       double sse0) {
    const int n = static_cast<int>(c.size());
    auto sse_at = [&](const Eigen::VectorXd& v) -> double {
        Eigen::VectorXd r = residual(v);
        return r.allFinite() ? r.squaredNorm() : std::numeric_limits<double>::quiet_NaN();
    };
    auto grad_at = [&](const Eigen::VectorXd& v, double fv) {
        Eigen::VectorXd g(n);
        for (int j = 0; j < n; ++j) {
            const double h = 1e-7 * (1.0 + std::abs(v[j]));
            Eigen::VectorXd vp = v;
            vp[j] += h;
            g[j] = (sse_at(vp) - fv) / h;
        }
        return g;
    };

    FitResult best{c, sse0, false, false, 0};
    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
    double f = sse0;
    Eigen::VectorXd g = grad_at(c, f);
    if (!g.allFinite()) {
        best.rejected = true;  // no usable descent information at the start
        return best;
    }

    for (int it = 0; it < cfg.max_iterations; ++it) {
        best.iterations = it + 1;
        if (g.lpNorm<Eigen::Infinity>() < cfg.gradient_tolerance) {
            best.converged = true;
            break;
        }
        Eigen::VectorXd dir = -(hinv * g);
        if (!dir.allFinite() || dir.dot(g) >= 0) {
            hinv.setIdentity();
            dir = -g;
        }
        double alpha = 1.0;
        Eigen::VectorXd c_next;
        double f_next = std::numeric_limits<double>::quiet_NaN();
        bool accepted = false;
        for (int bt = 0; bt < 40; ++bt) {
            c_next = project(c + alpha * dir, cfg);
            f_next = sse_at(c_next);
            if (std::isfinite(f_next) && f_next < f) {
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!accepted) break;

        Eigen::VectorXd g_next = grad_at(c_next, f_next);
        if (!g_next.allFinite()) {
            if (f_next < best.sse) {
                best.constants = c_next;
                best.sse = f_next;
            }
            break;
        }
        Eigen::VectorXd s = c_next - c;
        Eigen::VectorXd y = g_next - g;
        const double sy = s.dot(y);
        if (sy > 1e-12) {
            const double rho = 1.0 / sy;
            Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
            hinv = (eye - rho * s * y.transpose()) * hinv * (eye - rho * y * s.transpose()) +
                   rho * s * s.transpose();
        }
        c = std::move(c_next);
        f = f_next;
        g = std::move(g_next);
        if (f < best.sse) {
            best.constants = c;
            best.sse = f;
        }
        if (s.norm() < cfg.step_tolerance * (1.0 + c.norm())) {
            best.converged = true;
            break;
        }
    }
    return best;
}

FitResult levenberg_marquardt(Eigen::VectorXd c, const ResidualFn& residual, const FitConfig& cfg,
                              Eigen::VectorXd r0) {
    double sse = r0.squaredNorm();
    FitResult best{c, sse, false, false, 0};
    double lambda = 1e-3;
    Eigen::VectorXd r = std::move(r0);

    for (int it = 0; it < cfg.max_iterations; ++it) {
        best.iterations = it + 1;
        Eigen::MatrixXd J = jacobian(residual, c);
        if (!J.allFinite()) return quasi_newton(std::move(c), residual, cfg, sse);

        Eigen::MatrixXd jtj = J.transpose() * J;
        Eigen::VectorXd jtr = J.transpose() * r;
        if (jtr.lpNorm<Eigen::Infinity>() < cfg.gradient_tolerance) {
            best.converged = true;
            break;
        }

        Eigen::VectorXd diag = jtj.diagonal().cwiseMax(1e-12);
        Eigen::MatrixXd damped = jtj;
        damped.diagonal() += lambda * diag;
        Eigen::VectorXd step = damped.ldlt().solve(-jtr);
        if (!step.allFinite()) {
            lambda *= 10.0;
            if (lambda > 1e12) break;
            continue;
        }

        Eigen::VectorXd c_try = project(c + step, cfg);
        Eigen::VectorXd r_try = residual(c_try);
        const double sse_try = r_try.allFinite() ? r_try.squaredNorm()
                                                 : std::numeric_limits<double>::infinity();
        if (sse_try < sse) {
            const double step_norm = (c_try - c).norm();
            c = std::move(c_try);
            r = std::move(r_try);
            sse = sse_try;
            lambda /= 10.0;
            best.constants = c;
            best.sse = sse;
            if (step_norm < cfg.step_tolerance * (1.0 + c.norm())) {
                best.converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) {
                best.converged = true;  // damping exhausted, stationary to working precision
                break;
            }
        }
    }
    return best;
}

}  // namespace

Eigen::MatrixXd jacobian(const ResidualFn& residual, const Eigen::VectorXd& constants) {
    Eigen::VectorXd r0 = residual(constants);
    Eigen::MatrixXd J(r0.size(), constants.size());
    for (int j = 0; j < constants.size(); ++j) {
        const double h = 1e-7 * (1.0 + std::abs(constants[j]));
        Eigen::VectorXd c = constants;
        c[j] += h;
        J.col(j) = (residual(c) - r0) / h;
    }
    return J;
}

FitResult fit_constants(const Eigen::VectorXd& initial, const ResidualFn& residual,
                        const FitConfig& config) {
    config.validate();
    Eigen::VectorXd c0 = project(initial, config);
    if (c0.size() == 0) return {c0, 0.0, true, false, 0};

    Eigen::VectorXd r0 = residual(c0);
    if (!r0.allFinite()) return {c0, 0.0, false, true, 0};
    const double sse0 = r0.squaredNorm();
    if (sse0 == 0.0) return {c0, 0.0, true, false, 0};

    FitResult res = config.method == FitConfig::Method::LevenbergMarquardt
                        ? levenberg_marquardt(std::move(c0), residual, config, std::move(r0))
                        : quasi_newton(std::move(c0), residual, config, sse0);
    res.constants = project(res.constants, config);
    return res;
}

}  // namespace pisr
