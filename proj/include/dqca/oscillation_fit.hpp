#pragma once

#include <algorithm>
#include <cmath>

#include "dqca/dataset.hpp"
#include "dqca/least_squares.hpp"

namespace dqca {

// f(t, y) = exp(-(y - mu0 - A cos(w t + phi))^2 / (2 sigma^2)) / (sigma sqrt(2 pi)),
// evaluated as written, with no renormalization over the truncated window.
inline double oscillating_gaussian(double t, double y, double mu0, double amplitude, double omega,
                                   double phase, double sigma) {
    if (sigma <= 0) throw std::invalid_argument("oscillating_gaussian: sigma must be positive");
    const double center = mu0 + amplitude * std::cos(omega * t + phase);
    const double u = (y - center) / sigma;
    return std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * kPi));
}

struct OscillationFit {
    double mu0 = 0;
    double amplitude = 0;  // >= 0, sign absorbed into the phase
    double omega = 0;      // [0, pi]
    double phase = 0;      // (-pi, pi]
    double sigma = 1;
    Eigen::Matrix<double, 5, 5> covariance;
    Eigen::Matrix<double, 5, 1> stderrs;
    double residual_sum = 0;
    int point_count = 0;
    int step_min = 0, step_max = 0;
    int site_min = 0, site_max = 0;
    bool converged = false;
    bool degenerate_covariance = false;
};

struct FitGuess {
    double mu0 = 0, amplitude = 0.3, omega = kPi / 2, phase = 0, sigma = 2.0;
};

// mu0 from the grand mean, sigma pooled within steps, amplitude from the
// half peak-to-peak of the per-step means, omega from the dominant nonzero
// DFT bin of the mean series (pi/2 fallback below 4 steps).
inline FitGuess initial_guess(const StepDataset& data) {
    if (data.steps.empty()) throw std::invalid_argument("initial_guess: empty dataset");
    FitGuess g;
    double wsum = 0, grand = 0, pooled = 0;
    std::vector<double> means;
    for (const auto& d : data.steps) {
        const double tot = d.total();
        const double mean = tot > 0 ? d.mean() / tot : 0.0;
        means.push_back(mean);
        for (std::size_t i = 0; i < d.sites.size(); ++i) {
            grand += d.sites[i] * d.probability[i];
            pooled += (d.sites[i] - mean) * (d.sites[i] - mean) * d.probability[i];
            wsum += d.probability[i];
        }
    }
    if (wsum > 0) {
        g.mu0 = grand / wsum;
        g.sigma = std::max(0.5, std::sqrt(pooled / wsum));
    }
    const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
    g.amplitude = 0.5 * (*hi - *lo);
    const int n = int(means.size());
    if (n >= 4) {
        double mean_of_means = 0;
        for (double m : means) mean_of_means += m;
        mean_of_means /= n;
        double best = -1;
        int best_j = 1;
        for (int j = 1; j <= n / 2; ++j) {
            Complex acc = 0;
            for (int t = 0; t < n; ++t)
                acc += (means[t] - mean_of_means) * std::polar(1.0, -2.0 * kPi * j * t / n);
            if (std::abs(acc) > best) {
                best = std::abs(acc);
                best_j = j;
            }
        }
        g.omega = std::min(kPi, 2.0 * kPi * best_j / n);
    }
    g.phase = 0;
    return g;
}

// Joint least-squares fit of the oscillating Gaussian over all (step, site)
// points inside the window. Optionally 1/stderr^2 weighted.
inline OscillationFit fit_surface(const StepDataset& data, int step_lo, int step_hi, int site_lo,
                                  int site_hi, const FitGuess& guess, bool weighted = false) {
    struct Point {
        double t, y, p, w;
    };
    std::vector<Point> pts;
    std::vector<int> used_steps;
    for (int t = std::max(0, step_lo); t <= std::min(data.step_count() - 1, step_hi); ++t) {
        const auto& d = data.steps[t];
        bool any = false;
        for (std::size_t i = 0; i < d.sites.size(); ++i) {
            if (d.sites[i] < site_lo || d.sites[i] > site_hi) continue;
            double w = 1.0;
            if (weighted && d.has_stderr()) w = 1.0 / std::max(d.stderr_[i], 1e-6);
            pts.push_back({double(t), double(d.sites[i]), d.probability[i], w});
            any = true;
        }
        if (any) used_steps.push_back(t);
    }
    if (int(used_steps.size()) < 5 || int(pts.size()) < 55)
        throw std::invalid_argument("fit_surface: need at least 5 steps and 55 data points");

    auto residual = [&pts](const Eigen::VectorXd& p) {
        Eigen::VectorXd r(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i)
            r[i] = (oscillating_gaussian(pts[i].t, pts[i].y, p[0], p[1], p[2], p[3], p[4]) -
                    pts[i].p) *
                   pts[i].w;
        return r;
    };

    const double big = 1e9;
    Eigen::VectorXd lo(5), hi(5);
    lo << -big, 0.0, 0.0, -2.0 * kPi, 1e-3;
    hi << big, big, kPi, 2.0 * kPi, big;

    // a few omega starts around the DFT guess avoid the w ~ 0 local minimum
    const double halfbin = kPi / std::max(4, int(used_steps.size()));
    LeastSquaresResult best;
    bool have = false;
    for (double w0 : {guess.omega, guess.omega - halfbin, guess.omega + halfbin}) {
        if (w0 < 0 || w0 > kPi) continue;
        Eigen::VectorXd x0(5);
        x0 << guess.mu0, guess.amplitude, w0, guess.phase, guess.sigma;
        auto r = levenberg_marquardt(residual, x0, lo, hi);
        if (!have || r.objective < best.objective) {
            best = r;
            have = true;
        }
    }

    OscillationFit fit;
    fit.mu0 = best.params[0];
    fit.amplitude = best.params[1];
    fit.omega = best.params[2];
    fit.phase = std::remainder(best.params[3], 2.0 * kPi);
    fit.sigma = best.params[4];
    fit.covariance = best.covariance;
    fit.stderrs = best.stderrs;
    fit.residual_sum = best.objective;
    fit.point_count = int(pts.size());
    fit.step_min = used_steps.front();
    fit.step_max = used_steps.back();
    fit.site_min = site_lo;
    fit.site_max = site_hi;
    fit.converged = best.converged;
    fit.degenerate_covariance = best.degenerate_covariance;
    return fit;
}

}  // namespace dqca
