#pragma once

#include <cmath>
#include <stdexcept>

#include "dqca/spinor_field.hpp"

namespace dqca {

// One-step walk parameters. Hardware mode models a q-plate preceded by a
// quarter- plus half-waveplate pair; abstract mode is the Dirac walk symbol
// with n^2 + m^2 = 1.
struct WalkParams {
    enum class Mode { hardware, abstract };
    Mode mode = Mode::hardware;

    // hardware
    double delta = kPi;        // q-plate tuning, [0, pi]
    double alpha0 = kPi / 4;   // q-plate axis offset
    double alpha = -kPi / 4;   // QWP fast-axis angle
    double beta = kPi / 4;     // HWP fast-axis angle
    double charge = 0.5;       // topological charge, informational

    // abstract
    double n = std::sqrt(0.5);
    double m = std::sqrt(0.5);

    static WalkParams paper_hardware() { return WalkParams{}; }
    static WalkParams dirac(double n_, double m_) {
        WalkParams p;
        p.mode = Mode::abstract;
        p.n = n_;
        p.m = m_;
        return p;
    }

    void validate() const {
        if (mode == Mode::hardware) {
            if (delta < 0 || delta > kPi)
                throw std::invalid_argument("q-plate tuning delta must lie in [0, pi]");
        } else {
            if (std::abs(n * n + m * m - 1.0) > 1e-12)
                throw std::invalid_argument("abstract walk requires n^2 + m^2 = 1");
        }
    }
};

// C = (1/sqrt2) [[e^{2i(a-b)}, i e^{2ia}], [i e^{-2ia}, e^{-2i(a-b)}]]
inline Matrix2c coin_matrix(double alpha, double beta) {
    const Complex i(0, 1);
    Matrix2c c;
    c << std::exp(2.0 * i * (alpha - beta)), i * std::exp(2.0 * i * alpha),
        i * std::exp(-2.0 * i * alpha), std::exp(-2.0 * i * (alpha - beta));
    return c / std::sqrt(2.0);
}

inline Matrix2c qplate_symbol(double delta, double alpha0, double k) {
    if (delta < 0 || delta > kPi)
        throw std::invalid_argument("q-plate tuning delta must lie in [0, pi]");
    const Complex i(0, 1);
    const double c = std::cos(delta / 2), s = std::sin(delta / 2);
    Matrix2c q;
    q << c, i * std::exp(2.0 * i * alpha0) * s * std::exp(i * k),
        i * std::exp(-2.0 * i * alpha0) * s * std::exp(-i * k), c;
    return q;
}

// Momentum symbol of one walk step in the nearest-neighbor form
//   U(k) = local + e^{ik} hop_up + e^{-ik} hop_down.
// Under the fixed DFT convention the e^{ik} entry pulls amplitude from x+1
// (a delta at x=0 moves to x=-1) and e^{-ik} pulls from x-1.
struct StepSymbol {
    Matrix2c local = Matrix2c::Zero();
    Matrix2c hop_up = Matrix2c::Zero();
    Matrix2c hop_down = Matrix2c::Zero();

    Matrix2c at(double k) const {
        const Complex ph = std::polar(1.0, k);
        return local + ph * hop_up + std::conj(ph) * hop_down;
    }
    // dU/dk, exact
    Matrix2c derivative(double k) const {
        const Complex i(0, 1);
        const Complex ph = std::polar(1.0, k);
        return i * ph * hop_up - i * std::conj(ph) * hop_down;
    }
};

inline StepSymbol step_symbol(const WalkParams& p) {
    p.validate();
    StepSymbol s;
    if (p.mode == WalkParams::Mode::hardware) {
        const Complex i(0, 1);
        const Matrix2c c = coin_matrix(p.alpha, p.beta);
        const double cd = std::cos(p.delta / 2), sd = std::sin(p.delta / 2);
        Matrix2c e_rl = Matrix2c::Zero(), e_lr = Matrix2c::Zero();
        e_rl(0, 1) = 1;
        e_lr(1, 0) = 1;
        s.local = cd * c;
        s.hop_up = (i * std::exp(2.0 * i * p.alpha0) * sd) * (e_rl * c);
        s.hop_down = (i * std::exp(-2.0 * i * p.alpha0) * sd) * (e_lr * c);
    } else {
        const Complex i(0, 1);
        s.local << 0, -i * p.m, -i * p.m, 0;
        s.hop_up(1, 1) = p.n;
        s.hop_down(0, 0) = p.n;
    }
    return s;
}

inline SpinorField apply_step_momentum(const SpinorField& s, const StepSymbol& sym) {
    if (s.rep != Representation::momentum)
        throw std::invalid_argument("apply_step_momentum: state must be in momentum representation");
    SpinorField out{s.geometry, Representation::momentum, Eigen::Matrix2Xcd(2, s.geometry.size)};
    for (int j = 0; j < s.geometry.size; ++j)
        out.amp.col(j) = sym.at(s.geometry.momentum(j)) * s.amp.col(j);
    return out;
}

// Position-space application of the same step: a three-point stencil with
// periodic wrap. Equals the momentum backend on any state.
inline SpinorField apply_step_position(const SpinorField& s, const StepSymbol& sym) {
    if (s.rep != Representation::position)
        throw std::invalid_argument("apply_step_position: state must be in position representation");
    const int n = s.geometry.size;
    SpinorField out{s.geometry, Representation::position, Eigen::Matrix2Xcd(2, n)};
    for (int x = 0; x < n; ++x) {
        const int up = (x + 1) % n, down = (x + n - 1) % n;
        out.amp.col(x) =
            sym.local * s.amp.col(x) + sym.hop_up * s.amp.col(up) + sym.hop_down * s.amp.col(down);
    }
    return out;
}

inline SpinorField apply_step_position(const SpinorField& s, const WalkParams& p) {
    return apply_step_position(s, step_symbol(p));
}

struct Dispersion {
    double omega = 0;     // in [0, pi]
    Vector2c plus;        // U(k) |+> = e^{-i omega} |+>
    Vector2c minus;       // U(k) |-> = e^{+i omega} |->
    bool degenerate = false;
};

namespace detail {

struct Su2Components {
    double p0 = 0;          // cos(omega) = Re tr U / 2
    Eigen::Vector3d pvec;   // U = p0 I - i p.sigma, |p| = sin(omega)
};

// Component extraction, p_j = Re[(i/2) tr(sigma_j M)]; also valid for the
// k-derivative of an SU(2) family, which keeps the p0 I - i p.sigma form.
inline Su2Components su2_components(const Matrix2c& u) {
    Su2Components d;
    d.p0 = 0.5 * (u(0, 0) + u(1, 1)).real();
    d.pvec[0] = 0.5 * (Complex(0, 1) * (u(0, 1) + u(1, 0))).real();
    d.pvec[1] = 0.5 * (u(1, 0) - u(0, 1)).real();
    d.pvec[2] = 0.5 * (Complex(0, 1) * (u(0, 0) - u(1, 1))).real();
    return d;
}

// Bring a unitary into SU(2) by factoring a global phase; a non-unitary
// matrix is an error.
inline Matrix2c into_su2(const Matrix2c& u_in) {
    Matrix2c u = u_in;
    Complex det = u.determinant();
    if (std::abs(std::abs(det) - 1.0) > 1e-10)
        throw std::invalid_argument("symbol is not unitary");
    if (std::abs(det - Complex(1, 0)) > 1e-12) u *= std::polar(1.0, -0.5 * std::arg(det));
    return u;
}

// Eigenvectors of a unit Bloch vector, gauge: first component real and
// nonnegative; if it vanishes, second component real positive.
inline void bloch_eigenvectors(const Eigen::Vector3d& unit, Vector2c& plus, Vector2c& minus) {
    const double theta = std::acos(std::clamp(unit[2], -1.0, 1.0));
    const double phi = std::atan2(unit[1], unit[0]);
    const double ct = std::cos(theta / 2), st = std::sin(theta / 2);
    const Complex eiphi = std::polar(1.0, phi);
    plus = Vector2c(ct, eiphi * st);
    minus = Vector2c(st, -eiphi * ct);
    if (std::abs(plus[0]) < 1e-14) plus = Vector2c(0, 1);
    if (std::abs(minus[0]) < 1e-14) minus = Vector2c(0, 1);
}

}  // namespace detail

inline Dispersion dispersion(const StepSymbol& sym, double k) {
    const double deg_tol = 1e-9;
    auto d = detail::su2_components(detail::into_su2(sym.at(k)));
    double p0 = d.p0;
    if (p0 > 1.0) {
        if (p0 > 1.0 + 1e-12) throw std::invalid_argument("dispersion: |Re tr U / 2| exceeds 1");
        p0 = 1.0;
    } else if (p0 < -1.0) {
        if (p0 < -1.0 - 1e-12) throw std::invalid_argument("dispersion: |Re tr U / 2| exceeds 1");
        p0 = -1.0;
    }
    Dispersion out;
    out.omega = std::acos(p0);
    const double sw = d.pvec.norm();
    if (sw < deg_tol) {
        // omega at 0 or pi: any orthonormal basis diagonalizes U(k)
        out.degenerate = true;
        out.plus = Vector2c(1, 0);
        out.minus = Vector2c(0, 1);
        return out;
    }
    detail::bloch_eigenvectors(d.pvec / sw, out.plus, out.minus);
    return out;
}

}  // namespace dqca
