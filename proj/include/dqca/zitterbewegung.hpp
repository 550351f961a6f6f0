#pragma once

#include <vector>

#include "dqca/spectral.hpp"

namespace dqca {

// <X> = sum_x x p(x) over site labels. Requires the packet to stay away from
// the wrap point; callers that evolve states should watch boundary_leakage.
inline double mean_position(const SpinorField& s) {
    if (s.rep != Representation::position)
        throw std::invalid_argument("mean_position: state must be in position representation");
    double m = 0;
    for (int i = 0; i < s.geometry.size; ++i)
        m += s.geometry.label(i) * (std::norm(s.amp(0, i)) + std::norm(s.amp(1, i)));
    return m;
}

struct Trajectory {
    std::vector<double> mean;   // <X(t)>, t = 0..steps
    bool boundary_warning = false;
    double max_boundary_probability = 0;
};

// <X(t)> by direct state evolution (momentum backend).
inline Trajectory position_trajectory(const SpinorField& initial, const StepSymbol& sym, int steps) {
    if (steps < 0) throw std::invalid_argument("position_trajectory: steps must be >= 0");
    SpinorField psihat = initial.rep == Representation::momentum ? initial : to_momentum(initial);
    Trajectory tr;
    tr.mean.reserve(steps + 1);
    for (int t = 0; t <= steps; ++t) {
        SpinorField pos = to_position(psihat);
        const double leak = boundary_leakage(pos);
        tr.max_boundary_probability = std::max(tr.max_boundary_probability, leak);
        if (leak > 1e-10) tr.boundary_warning = true;
        tr.mean.push_back(mean_position(pos));
        if (t < steps) psihat = apply_step_momentum(psihat, sym);
    }
    return tr;
}

// <X(t)> = x+(t) + x-(t) + x0 + z(t), split by energy sector:
//   x+-(t) = <psi+-| X(0) + V t |psi+->
//   x0     = 2 Re <psi+| X(0) - (2iH)^{-1} F |psi->
//   z(t)   = 2 Re <psi+| (2iH)^{-1} e^{2iHt} F |psi->
// X(0) cross terms are evaluated exactly in position space; everything else
// is a momentum-grid sum over the spectral data.
struct ZbDecomposition {
    std::vector<double> x_plus, x_minus, z, total;
    double x_zero = 0;
    double weight_plus = 0, weight_minus = 0;  // |c+-|^2
    double dropped_weight = 0;                 // norm lost to degenerate grid points
};

inline ZbDecomposition zb_decompose(const SpinorField& initial, const SpectralData& sd, int steps) {
    if (steps < 0) throw std::invalid_argument("zb_decompose: steps must be >= 0");
    const int n = sd.geometry.size;
    SpinorField psihat = initial.rep == Representation::momentum ? initial : to_momentum(initial);
    if (psihat.geometry.size != n) throw std::invalid_argument("zb_decompose: geometry mismatch");

    ZbDecomposition out;
    out.dropped_weight = sd.dropped_weight(psihat);
    SpinorField psi_p = project_sector(psihat, sd, Sector::plus);
    SpinorField psi_m = project_sector(psihat, sd, Sector::minus);
    out.weight_plus = psi_p.squared_norm();
    out.weight_minus = psi_m.squared_norm();

    SpinorField pos_p = to_position(psi_p);
    SpinorField pos_m = to_position(psi_m);

    // X(0) expectations and cross term, exact in position space
    double xp0 = 0, xm0 = 0;
    Complex x_cross = 0;
    for (int i = 0; i < n; ++i) {
        const double x = sd.geometry.label(i);
        xp0 += x * pos_p.amp.col(i).squaredNorm();
        xm0 += x * pos_m.amp.col(i).squaredNorm();
        x_cross += x * (pos_p.amp.col(i).adjoint() * pos_m.amp.col(i))(0, 0);
    }

    // velocity expectations and the F-coupling sums per grid point
    double vp = 0, vm = 0;
    Complex f_static = 0;  // <psi+| (2iH)^{-1} F |psi->
    std::vector<Complex> coupling(n, Complex(0, 0));
    std::vector<double> two_omega(n, 0.0);
    for (int j = 0; j < n; ++j) {
        const auto& p = sd.points[j];
        if (p.degenerate) continue;
        vp += (psi_p.amp.col(j).adjoint() * p.velocity * psi_p.amp.col(j))(0, 0).real();
        vm += (psi_m.amp.col(j).adjoint() * p.velocity * psi_m.amp.col(j))(0, 0).real();
        // F |psi_-> lives in the + sector, so (2iH)^{-1} acts as 1/(2 i omega)
        const Complex amp_p = (p.plus.adjoint() * psihat.amp.col(j))(0, 0);
        const Complex f_elem = (p.plus.adjoint() * p.zb_coupling * p.minus)(0, 0);
        const Complex amp_m = (p.minus.adjoint() * psihat.amp.col(j))(0, 0);
        const Complex c = std::conj(amp_p) * f_elem * amp_m / (Complex(0, 2) * p.omega);
        coupling[j] = c;
        two_omega[j] = 2.0 * p.omega;
        f_static += c;
    }
    out.x_zero = 2.0 * x_cross.real() - 2.0 * f_static.real();

    out.x_plus.resize(steps + 1);
    out.x_minus.resize(steps + 1);
    out.z.resize(steps + 1);
    out.total.resize(steps + 1);
    for (int t = 0; t <= steps; ++t) {
        out.x_plus[t] = xp0 + vp * t;
        out.x_minus[t] = xm0 + vm * t;
        Complex zt = 0;
        for (int j = 0; j < n; ++j)
            if (!sd.points[j].degenerate) zt += coupling[j] * std::polar(1.0, two_omega[j] * t);
        out.z[t] = 2.0 * zt.real();
        out.total[t] = out.x_plus[t] + out.x_minus[t] + out.x_zero + out.z[t];
    }
    return out;
}

// Peaked-packet approximation z(t) ~= A cos(2 omega(k0) t + phi0),
// A = |c+||c-||f(k0)|. phi0 depends on the eigenvector gauge.
struct ZbPrediction {
    double amplitude = 0;
    double frequency = 0;           // 2 omega(k0), radians per step
    double phase = 0;               // phi0 under this module's gauge
    double coupling_magnitude = 0;  // |f(k0)|
};

inline ZbPrediction zb_predict(Complex c_plus, Complex c_minus, double k0, const StepSymbol& sym) {
    const SpectralPoint sp = spectral_point(sym, k0);
    if (sp.degenerate) throw std::invalid_argument("zb_predict: degenerate spectrum at k0");
    const Complex f = zb_coupling(sym, k0);
    ZbPrediction out;
    out.coupling_magnitude = std::abs(f);
    out.amplitude = std::abs(c_plus) * std::abs(c_minus) * std::abs(f);
    out.frequency = 2.0 * sp.omega;
    out.phase = std::arg(std::conj(c_plus) * c_minus * f);
    return out;
}

}  // namespace dqca
