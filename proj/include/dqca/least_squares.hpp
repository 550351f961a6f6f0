#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

namespace dqca {

// Damped least squares (Levenberg-Marquardt) with a numerical Jacobian and
// projection onto box bounds. Shared by the noise-model calibration and the
// oscillating-Gaussian surface fit.

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct LeastSquaresOptions {
    int max_iterations = 500;
    double gradient_tol = 1e-10;   // stop on ||J^T r||_inf
    double step_tol = 1e-14;       // stop on relative step size
    double fd_step = 1e-6;         // central-difference step scale
    double lambda_init = 1e-3;
};

struct LeastSquaresResult {
    Eigen::VectorXd params;
    double objective = 0;                     // sum of squared residuals
    bool converged = false;
    int iterations = 0;
    std::vector<double> objective_trace;      // objective after each accepted step
    Eigen::MatrixXd covariance;               // sigma^2 (J^T J)^{-1} at the optimum
    Eigen::VectorXd stderrs;                  // sqrt of the covariance diagonal
    bool degenerate_covariance = false;
};

namespace detail {

inline Eigen::MatrixXd numerical_jacobian(const ResidualFn& fn, const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                                          double h0, int m_rows) {
    const int p = int(x.size());
    Eigen::MatrixXd jac(m_rows, p);
    for (int a = 0; a < p; ++a) {
        double h = h0 * std::max(1.0, std::abs(x[a]));
        Eigen::VectorXd xp = x, xm = x;
        xp[a] = std::min(x[a] + h, hi[a]);
        xm[a] = std::max(x[a] - h, lo[a]);
        const double dx = xp[a] - xm[a];
        if (dx <= 0) {
            jac.col(a).setZero();
            continue;
        }
        jac.col(a) = (fn(xp) - fn(xm)) / dx;
    }
    return jac;
}

}  // namespace detail

inline LeastSquaresResult levenberg_marquardt(const ResidualFn& fn, const Eigen::VectorXd& x0,
                                              const Eigen::VectorXd& lower,
                                              const Eigen::VectorXd& upper,
                                              const LeastSquaresOptions& opt = {}) {
    const int p = int(x0.size());
    if (lower.size() != p || upper.size() != p)
        throw std::invalid_argument("levenberg_marquardt: bound size mismatch");
    auto clamp_box = [&](Eigen::VectorXd v) {
        for (int a = 0; a < p; ++a) v[a] = std::clamp(v[a], lower[a], upper[a]);
        return v;
    };

    LeastSquaresResult res;
    Eigen::VectorXd x = clamp_box(x0);
    Eigen::VectorXd r = fn(x);
    const int m = int(r.size());
    double cost = r.squaredNorm();
    res.objective_trace.push_back(cost);
    double lambda = opt.lambda_init;

    Eigen::MatrixXd jac;
    bool jac_fresh = false;
    for (res.iterations = 0; res.iterations < opt.max_iterations; ++res.iterations) {
        if (!jac_fresh) {
            jac = detail::numerical_jacobian(fn, x, lower, upper, opt.fd_step, m);
            jac_fresh = true;
        }
        Eigen::VectorXd grad = jac.transpose() * r;
        if (grad.lpNorm<Eigen::Infinity>() < opt.gradient_tol) {
            res.converged = true;
            break;
        }
        Eigen::MatrixXd jtj = jac.transpose() * jac;
        bool accepted = false;
        for (int trial = 0; trial < 12 && !accepted; ++trial) {
            Eigen::MatrixXd damped = jtj;
            for (int a = 0; a < p; ++a)
                damped(a, a) += lambda * std::max(jtj(a, a), 1e-12);
            Eigen::VectorXd step = damped.ldlt().solve(-grad);
            Eigen::VectorXd xt = clamp_box(x + step);
            Eigen::VectorXd rt = fn(xt);
            const double ct = rt.squaredNorm();
            if (ct < cost) {
                const double rel_step = (xt - x).norm() / std::max(1.0, x.norm());
                x = xt;
                r = rt;
                cost = ct;
                res.objective_trace.push_back(cost);
                lambda = std::max(lambda / 3.0, 1e-12);
                jac_fresh = false;
                accepted = true;
                if (rel_step < opt.step_tol) {
                    res.converged = true;
                    res.iterations++;
                    goto done;
                }
            } else {
                lambda *= 4.0;
            }
        }
        if (!accepted) {
            res.converged = true;  // no descent direction left at damping limit
            break;
        }
    }
done:
    res.params = x;
    res.objective = cost;

    // covariance from the Jacobian at the optimum, scaled by residual variance
    jac = detail::numerical_jacobian(fn, x, lower, upper, opt.fd_step, m);
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
    lu.setThreshold(1e-10);
    res.degenerate_covariance = lu.rank() < p;
    const double dof = std::max(1, m - p);
    const double sigma2 = cost / dof;
    if (!res.degenerate_covariance) {
        res.covariance = lu.inverse() * sigma2;
        res.stderrs = res.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
    } else {
        res.covariance = Eigen::MatrixXd::Constant(p, p, std::numeric_limits<double>::quiet_NaN());
        res.stderrs = Eigen::VectorXd::Constant(p, std::numeric_limits<double>::quiet_NaN());
    }
    return res;
}

}  // namespace dqca
