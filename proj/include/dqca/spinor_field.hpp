#pragma once

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dqca/geometry.hpp"

namespace dqca {

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Vector2c = Eigen::Vector2cd;

enum class Representation { position, momentum };

// Coin (x) lattice wavefunction. Row 0 is the |R> coin amplitude, row 1 is |L>.
// Column i corresponds to site label (or momentum label) geometry.label(i).
struct SpinorField {
    LatticeGeometry geometry;
    Representation rep = Representation::position;
    Eigen::Matrix2Xcd amp;

    double squared_norm() const { return amp.squaredNorm(); }
    double norm() const { return amp.norm(); }
};

inline Complex inner_product(const SpinorField& a, const SpinorField& b) {
    if (a.geometry.size != b.geometry.size || a.rep != b.rep)
        throw std::invalid_argument("inner_product: mismatched fields");
    return (a.amp.conjugate().cwiseProduct(b.amp)).sum();
}

// Site-label probabilities after tracing out the coin.
struct SiteDistribution {
    std::vector<int> sites;
    std::vector<double> probability;
    std::vector<double> stderr_;  // empty when exact

    bool has_stderr() const { return !stderr_.empty(); }
    double total() const {
        double s = 0;
        for (double p : probability) s += p;
        return s;
    }
    double mean() const {
        double m = 0;
        for (std::size_t i = 0; i < sites.size(); ++i) m += sites[i] * probability[i];
        return m;
    }
};

// Amplitude profile g(x) proportional to exp(-(x-x0)^2 / (2 sigma^2)) inside
// [xmin, xmax], zero elsewhere, normalized so that sum g(x)^2 = 1. The
// truncated normal density is used only as the unnormalized shape.
inline Eigen::VectorXd truncated_gaussian_profile(int x0, double sigma, int xmin, int xmax,
                                                  const LatticeGeometry& geom) {
    if (sigma <= 0) throw std::invalid_argument("profile sigma must be positive");
    if (xmin >= xmax) throw std::invalid_argument("profile window must satisfy xmin < xmax");
    if (!geom.contains(xmin) || !geom.contains(xmax))
        throw std::invalid_argument("profile window lies outside the lattice");
    Eigen::VectorXd g = Eigen::VectorXd::Zero(geom.size);
    for (int x = xmin; x <= xmax; ++x) {
        double d = (x - x0) / sigma;
        g[geom.index_of(x)] = std::exp(-0.5 * d * d);
    }
    g /= g.norm();
    return g;
}

inline SpinorField make_input_state(const Vector2c& coin, const Eigen::VectorXd& profile,
                                    const LatticeGeometry& geom) {
    if (profile.size() != geom.size) throw std::invalid_argument("profile size mismatch");
    if (std::abs(coin.norm() - 1.0) > 1e-8)
        throw std::invalid_argument("coin amplitudes must be normalized");
    if (std::abs(profile.norm() - 1.0) > 1e-8)
        throw std::invalid_argument("profile must be normalized");
    SpinorField s{geom, Representation::position, Eigen::Matrix2Xcd(2, geom.size)};
    s.amp.row(0) = coin[0] * profile.transpose().cast<Complex>();
    s.amp.row(1) = coin[1] * profile.transpose().cast<Complex>();
    return s;
}

namespace detail {

// Unitary centered DFT, psihat(k_j) = N^{-1/2} sum_x psi(x) exp(-i k_j x),
// via a single twiddle table W[r] = exp(-2 pi i r / N) indexed by (j*x) mod N.
inline Eigen::Matrix2Xcd centered_dft(const Eigen::Matrix2Xcd& in, const LatticeGeometry& geom,
                                      bool forward) {
    const int n = geom.size;
    std::vector<Complex> w(n);
    const double sgn = forward ? -1.0 : 1.0;
    for (int r = 0; r < n; ++r) w[r] = std::polar(1.0, sgn * 2.0 * kPi * r / n);
    Eigen::Matrix2Xcd out(2, n);
    const double scale = 1.0 / std::sqrt(double(n));
    for (int j = 0; j < n; ++j) {
        const long long jl = geom.label(j);
        Complex acc0 = 0, acc1 = 0;
        for (int x = 0; x < n; ++x) {
            const long long r = ((jl * geom.label(x)) % n + n) % n;
            acc0 += in(0, x) * w[r];
            acc1 += in(1, x) * w[r];
        }
        out(0, j) = scale * acc0;
        out(1, j) = scale * acc1;
    }
    return out;
}

}  // namespace detail

inline SpinorField to_momentum(const SpinorField& s) {
    if (s.rep != Representation::position)
        throw std::invalid_argument("to_momentum: state is not in the position representation");
    return SpinorField{s.geometry, Representation::momentum,
                       detail::centered_dft(s.amp, s.geometry, true)};
}

inline SpinorField to_position(const SpinorField& s) {
    if (s.rep != Representation::momentum)
        throw std::invalid_argument("to_position: state is not in the momentum representation");
    return SpinorField{s.geometry, Representation::position,
                       detail::centered_dft(s.amp, s.geometry, false)};
}

inline SiteDistribution site_distribution(const SpinorField& s) {
    if (s.rep != Representation::position)
        throw std::invalid_argument("site_distribution: state must be in position representation");
    if (std::abs(s.squared_norm() - 1.0) > 1e-8)
        throw std::invalid_argument("site_distribution: state is not normalized");
    SiteDistribution d;
    d.sites.resize(s.geometry.size);
    d.probability.resize(s.geometry.size);
    for (int i = 0; i < s.geometry.size; ++i) {
        d.sites[i] = s.geometry.label(i);
        d.probability[i] = std::norm(s.amp(0, i)) + std::norm(s.amp(1, i));
    }
    return d;
}

// Probability within the outermost `band` sites at each lattice edge; used to
// guard against wrap-around contamination of position observables.
inline double boundary_leakage(const SpinorField& s, int band = 2) {
    const SpinorField* pos = &s;
    SpinorField tmp;
    if (s.rep == Representation::momentum) {
        tmp = to_position(s);
        pos = &tmp;
    }
    double leak = 0;
    const int n = pos->geometry.size;
    for (int i = 0; i < band; ++i)
        leak += pos->amp.col(i).squaredNorm() + pos->amp.col(n - 1 - i).squaredNorm();
    return leak;
}

}  // namespace dqca
