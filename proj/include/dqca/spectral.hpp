#pragma once

#include <vector>

#include "dqca/walk.hpp"

namespace dqca {

// Per-momentum spectral data of a step symbol:
//   U(k) = exp(-i H(k)),  H(k) = omega(k) (P+ - P-),
//   V(k) = (omega'/omega) H(k)          (sector-diagonal part of dH/dk)
//   F(k) = H'(k) - V(k)                 (sector-off-diagonal part, drives the
//                                        Zitterbewegung; F P+- = P-+ F)
// H'(k) is exact: both symbol families have analytic dU/dk, and
// H = (omega/sin omega) p.sigma with p_j = Re[(i/2) tr(sigma_j U)].
struct SpectralPoint {
    double k = 0;
    double omega = 0;
    double omega_prime = 0;
    Vector2c plus, minus;
    Matrix2c hamiltonian, hamiltonian_prime, velocity, zb_coupling;
    bool degenerate = false;

    Matrix2c projector_plus() const { return plus * plus.adjoint(); }
    Matrix2c projector_minus() const { return minus * minus.adjoint(); }
};

namespace detail {

inline Matrix2c pauli_dot(const Eigen::Vector3d& v) {
    Matrix2c m;
    m << Complex(v[2], 0), Complex(v[0], -v[1]), Complex(v[0], v[1]), Complex(-v[2], 0);
    return m;
}

}  // namespace detail

inline SpectralPoint spectral_point(const StepSymbol& sym, double k) {
    const double deg_tol = 1e-9;
    SpectralPoint sp;
    sp.k = k;
    const Matrix2c u = sym.at(k);
    if (std::abs(u.determinant() - Complex(1, 0)) > 1e-10)
        throw std::invalid_argument("spectral_point: symbol must be special unitary");
    auto d = detail::su2_components(u);
    auto dd = detail::su2_components(sym.derivative(k));
    const double p0 = std::clamp(d.p0, -1.0, 1.0);
    if (std::abs(d.p0) > 1.0 + 1e-12)
        throw std::invalid_argument("spectral_point: |Re tr U / 2| exceeds 1");
    sp.omega = std::acos(p0);
    const double sw = d.pvec.norm();  // sin(omega)
    if (sw < deg_tol || sp.omega < deg_tol || kPi - sp.omega < deg_tol) {
        sp.degenerate = true;
        sp.plus = Vector2c(1, 0);
        sp.minus = Vector2c(0, 1);
        return sp;
    }
    detail::bloch_eigenvectors(d.pvec / sw, sp.plus, sp.minus);
    sp.omega_prime = -dd.p0 / sw;
    const double c = sp.omega / sw;                              // omega / sin(omega)
    const double cp = sp.omega_prime * (sw - sp.omega * p0) / (sw * sw);  // d/dk of it
    sp.hamiltonian = c * detail::pauli_dot(d.pvec);
    sp.hamiltonian_prime = cp * detail::pauli_dot(d.pvec) + c * detail::pauli_dot(dd.pvec);
    sp.velocity = (sp.omega_prime / sp.omega) * sp.hamiltonian;
    sp.zb_coupling = sp.hamiltonian_prime - sp.velocity;
    return sp;
}

inline Matrix2c effective_hamiltonian(const StepSymbol& sym, double k) {
    auto sp = spectral_point(sym, k);
    if (sp.degenerate)
        throw std::invalid_argument("effective_hamiltonian: degenerate spectrum (omega in {0, pi})");
    return sp.hamiltonian;
}

// f(k): the peaked-state Zitterbewegung reduces to
//   z(t) ~= |c+||c-||f(k0)| cos(2 omega(k0) t + phi0)
// with f(k) = <+|F(k)|-> / (i omega(k)).
inline Complex zb_coupling(const StepSymbol& sym, double k) {
    auto sp = spectral_point(sym, k);
    if (sp.degenerate) throw std::invalid_argument("zb_coupling: degenerate spectrum");
    const Complex num = sp.plus.adjoint() * sp.zb_coupling * sp.minus;
    return num / (Complex(0, 1) * sp.omega);
}

struct SpectralData {
    LatticeGeometry geometry;
    StepSymbol symbol;
    std::vector<SpectralPoint> points;  // one per momentum grid index

    int degenerate_count() const {
        int n = 0;
        for (const auto& p : points) n += p.degenerate;
        return n;
    }
    // norm-squared weight of a momentum-space state on degenerate grid points
    double dropped_weight(const SpinorField& psihat) const {
        double w = 0;
        for (std::size_t j = 0; j < points.size(); ++j)
            if (points[j].degenerate) w += psihat.amp.col(j).squaredNorm();
        return w;
    }
};

inline SpectralData make_spectral_data(const StepSymbol& sym, const LatticeGeometry& geom) {
    SpectralData sd{geom, sym, {}};
    sd.points.reserve(geom.size);
    for (int j = 0; j < geom.size; ++j) sd.points.push_back(spectral_point(sym, geom.momentum(j)));
    return sd;
}

enum class Sector { plus, minus };

// P+- psi, evaluated per momentum grid point; degenerate points are dropped.
inline SpinorField project_sector(const SpinorField& psihat, const SpectralData& sd, Sector sector) {
    if (psihat.rep != Representation::momentum)
        throw std::invalid_argument("project_sector: state must be in momentum representation");
    SpinorField out{psihat.geometry, Representation::momentum,
                    Eigen::Matrix2Xcd::Zero(2, psihat.geometry.size)};
    for (int j = 0; j < psihat.geometry.size; ++j) {
        const auto& p = sd.points[j];
        if (p.degenerate) continue;
        const Vector2c& v = sector == Sector::plus ? p.plus : p.minus;
        out.amp.col(j) = v * (v.adjoint() * psihat.amp.col(j));
    }
    return out;
}

// Max spectral-norm deviation of H(k) from the continuum Dirac generator
// k sigma_z + m sigma_x over |k| <= kmax; small for small k and m.
inline double small_k_dirac_limit_check(double n, double m, double kmax, int samples = 65) {
    const StepSymbol sym = step_symbol(WalkParams::dirac(n, m));
    double worst = 0;
    for (int i = 0; i < samples; ++i) {
        const double k = -kmax + 2.0 * kmax * i / (samples - 1);
        SpectralPoint sp = spectral_point(sym, k);
        if (sp.degenerate) continue;
        Matrix2c dirac;
        dirac << Complex(k, 0), Complex(m, 0), Complex(m, 0), Complex(-k, 0);
        const double dev = (sp.hamiltonian - dirac).operatorNorm();
        worst = std::max(worst, dev);
    }
    return worst;
}

}  // namespace dqca
