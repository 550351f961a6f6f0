#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dqca/dataset.hpp"
#include "dqca/least_squares.hpp"
#include "dqca/rng.hpp"
#include "dqca/walk.hpp"

namespace dqca {

// The experiment controls and measures OAM modes -5..5 only.
inline constexpr int kWindowLo = -5;
inline constexpr int kWindowHi = 5;
inline constexpr int kWindowSize = kWindowHi - kWindowLo + 1;

// Coherent imperfection model of the 8-step photonic setup: per-step q-plate
// tunings and waveplate offsets, plus per-mode hologram efficiencies for the
// preparation and measurement SLMs. Counting statistics are Poissonian.
struct NoiseModel {
    std::vector<double> qplate_tuning;   // delta_i in [0, pi]; 1.0 efficiency <=> pi
    std::vector<double> alpha_offset;    // QWP offset per step
    std::vector<double> beta_offset;     // HWP offset per step
    std::vector<double> alpha0_offset;   // q-plate axis offset per step
    std::vector<double> gen_efficiency;  // per mode -5..5, (0, 1]
    std::vector<double> det_efficiency;  // per mode -5..5, (0, 1]
    long counts_per_step = 10000;

    int step_count() const { return int(qplate_tuning.size()); }

    static NoiseModel ideal(int steps) {
        NoiseModel n;
        n.qplate_tuning.assign(steps, kPi);
        n.alpha_offset.assign(steps, 0.0);
        n.beta_offset.assign(steps, 0.0);
        n.alpha0_offset.assign(steps, 0.0);
        n.gen_efficiency.assign(kWindowSize, 1.0);
        n.det_efficiency.assign(kWindowSize, 1.0);
        return n;
    }

    void validate() const {
        const std::size_t s = qplate_tuning.size();
        if (alpha_offset.size() != s || beta_offset.size() != s || alpha0_offset.size() != s)
            throw std::invalid_argument("noise model: per-step arrays must have equal length");
        if (gen_efficiency.size() != kWindowSize || det_efficiency.size() != kWindowSize)
            throw std::invalid_argument("noise model: efficiency arrays must cover modes -5..5");
        for (double d : qplate_tuning)
            if (d < 0 || d > kPi) throw std::invalid_argument("noise model: delta outside [0, pi]");
        for (double e : gen_efficiency)
            if (e <= 0 || e > 1) throw std::invalid_argument("noise model: efficiency outside (0, 1]");
        for (double e : det_efficiency)
            if (e <= 0 || e > 1) throw std::invalid_argument("noise model: efficiency outside (0, 1]");
        if (counts_per_step < 1) throw std::invalid_argument("noise model: counts must be positive");
    }
};

inline SiteDistribution window_distribution(const SiteDistribution& d, int lo = kWindowLo,
                                            int hi = kWindowHi) {
    SiteDistribution out;
    for (std::size_t i = 0; i < d.sites.size(); ++i) {
        if (d.sites[i] < lo || d.sites[i] > hi) continue;
        out.sites.push_back(d.sites[i]);
        out.probability.push_back(d.probability[i]);
        if (d.has_stderr()) out.stderr_.push_back(d.stderr_[i]);
    }
    return out;
}

// p~(x) proportional to p(x) eta(x), renormalized; stderr scales with the
// same per-site factor.
inline SiteDistribution apply_detection_efficiency(const SiteDistribution& d,
                                                   const std::vector<double>& eta) {
    if (eta.size() != d.sites.size())
        throw std::invalid_argument("apply_detection_efficiency: efficiency size mismatch");
    SiteDistribution out = d;
    double z = 0;
    for (std::size_t i = 0; i < d.sites.size(); ++i) z += d.probability[i] * eta[i];
    if (z <= 0) throw std::invalid_argument("apply_detection_efficiency: zero total weight");
    for (std::size_t i = 0; i < d.sites.size(); ++i) {
        out.probability[i] = d.probability[i] * eta[i] / z;
        if (d.has_stderr()) out.stderr_[i] = d.stderr_[i] * eta[i] / z;
    }
    return out;
}

// Multinomial counting at fixed total; probabilities become counts/total with
// Poissonian stderr sqrt(counts)/total. Deterministic for a given seed.
inline SiteDistribution sample_counts(const SiteDistribution& d, long total, std::uint64_t seed) {
    Rng rng(seed);
    auto counts = multinomial(rng, d.probability, total);
    SiteDistribution out;
    out.sites = d.sites;
    out.probability.resize(d.sites.size());
    out.stderr_.resize(d.sites.size());
    for (std::size_t i = 0; i < d.sites.size(); ++i) {
        out.probability[i] = double(counts[i]) / total;
        out.stderr_[i] = std::sqrt(double(counts[i])) / total;
    }
    return out;
}

// Classical fidelity (sum_x sqrt(p q))^2; the plain Bhattacharyya overlap is
// exposed separately since the paper leaves the definition open.
inline double bhattacharyya(const SiteDistribution& p, const SiteDistribution& q) {
    if (p.sites != q.sites) throw std::invalid_argument("fidelity: support mismatch");
    double s = 0;
    for (std::size_t i = 0; i < p.sites.size(); ++i)
        s += std::sqrt(std::max(0.0, p.probability[i]) * std::max(0.0, q.probability[i]));
    return s;
}

inline double fidelity(const SiteDistribution& p, const SiteDistribution& q) {
    const double b = bhattacharyya(p, q);
    return b * b;
}

// Applies the preparation-SLM efficiencies at the amplitude level and
// renormalizes; modes outside the window are untouched.
inline SpinorField apply_generation_efficiency(const SpinorField& input,
                                               const std::vector<double>& eta_gen) {
    SpinorField s = input;
    for (int x = kWindowLo; x <= kWindowHi; ++x) {
        if (!s.geometry.contains(x)) continue;
        s.amp.col(s.geometry.index_of(x)) *= std::sqrt(eta_gen[x - kWindowLo]);
    }
    const double nrm = s.norm();
    if (nrm <= 0) throw std::invalid_argument("apply_generation_efficiency: state vanished");
    s.amp /= nrm;
    return s;
}

// Coherent noisy walk: step i uses C(alpha+da_i, beta+db_i) and
// Q(delta_i, alpha0+da0_i); the state stays pure. Each recorded step is the
// [-5, 5] window of the site distribution filtered by the detection
// efficiencies and renormalized. No count sampling here; see sample_counts.
inline StepDataset noisy_evolution(const SpinorField& input, const WalkParams& base,
                                   const NoiseModel& noise, int steps) {
    if (base.mode != WalkParams::Mode::hardware)
        throw std::invalid_argument("noisy_evolution: base parameters must be hardware mode");
    noise.validate();
    if (steps > noise.step_count())
        throw std::invalid_argument("noisy_evolution: not enough per-step noise entries");

    StepDataset ds;
    ds.provenance = StepDataset::Provenance::synthetic;
    SpinorField psi = apply_generation_efficiency(input, noise.gen_efficiency);
    for (int t = 0; t <= steps; ++t) {
        SiteDistribution d = window_distribution(site_distribution(psi));
        ds.steps.push_back(apply_detection_efficiency(d, noise.det_efficiency));
        if (t == steps) break;
        WalkParams p = base;
        p.delta = noise.qplate_tuning[t];
        p.alpha = base.alpha + noise.alpha_offset[t];
        p.beta = base.beta + noise.beta_offset[t];
        p.alpha0 = base.alpha0 + noise.alpha0_offset[t];
        psi = apply_step_position(psi, p);
    }
    return ds;
}

struct CalibrationMask {
    bool qplate_tuning = true;
    bool waveplate_offsets = false;
    bool axis_offsets = false;
    bool det_efficiency = true;
    bool gen_efficiency = false;
};

struct CalibrationReport {
    NoiseModel model;
    double objective = 0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> per_step_residual;
    std::vector<double> per_step_fidelity;
    std::vector<double> objective_trace;
};

namespace detail {

struct NoisePacking {
    CalibrationMask mask;
    int steps = 0;

    int size() const {
        int n = 0;
        if (mask.qplate_tuning) n += steps;
        if (mask.waveplate_offsets) n += 2 * steps;
        if (mask.axis_offsets) n += steps;
        if (mask.det_efficiency) n += kWindowSize;
        if (mask.gen_efficiency) n += kWindowSize;
        return n;
    }
    Eigen::VectorXd pack(const NoiseModel& m) const {
        Eigen::VectorXd v(size());
        int i = 0;
        if (mask.qplate_tuning)
            for (int s = 0; s < steps; ++s) v[i++] = m.qplate_tuning[s];
        if (mask.waveplate_offsets) {
            for (int s = 0; s < steps; ++s) v[i++] = m.alpha_offset[s];
            for (int s = 0; s < steps; ++s) v[i++] = m.beta_offset[s];
        }
        if (mask.axis_offsets)
            for (int s = 0; s < steps; ++s) v[i++] = m.alpha0_offset[s];
        if (mask.det_efficiency)
            for (int x = 0; x < kWindowSize; ++x) v[i++] = m.det_efficiency[x];
        if (mask.gen_efficiency)
            for (int x = 0; x < kWindowSize; ++x) v[i++] = m.gen_efficiency[x];
        return v;
    }
    NoiseModel unpack(const Eigen::VectorXd& v, NoiseModel m) const {
        int i = 0;
        if (mask.qplate_tuning)
            for (int s = 0; s < steps; ++s) m.qplate_tuning[s] = v[i++];
        if (mask.waveplate_offsets) {
            for (int s = 0; s < steps; ++s) m.alpha_offset[s] = v[i++];
            for (int s = 0; s < steps; ++s) m.beta_offset[s] = v[i++];
        }
        if (mask.axis_offsets)
            for (int s = 0; s < steps; ++s) m.alpha0_offset[s] = v[i++];
        if (mask.det_efficiency)
            for (int x = 0; x < kWindowSize; ++x) m.det_efficiency[x] = v[i++];
        if (mask.gen_efficiency)
            for (int x = 0; x < kWindowSize; ++x) m.gen_efficiency[x] = v[i++];
        return m;
    }
    void bounds(Eigen::VectorXd& lo, Eigen::VectorXd& hi) const {
        lo.resize(size());
        hi.resize(size());
        int i = 0;
        if (mask.qplate_tuning)
            for (int s = 0; s < steps; ++s, ++i) lo[i] = 0, hi[i] = kPi;
        if (mask.waveplate_offsets)
            for (int s = 0; s < 2 * steps; ++s, ++i) lo[i] = -0.5, hi[i] = 0.5;
        if (mask.axis_offsets)
            for (int s = 0; s < steps; ++s, ++i) lo[i] = -0.5, hi[i] = 0.5;
        if (mask.det_efficiency)
            for (int x = 0; x < kWindowSize; ++x, ++i) lo[i] = 1e-3, hi[i] = 1.0;
        if (mask.gen_efficiency)
            for (int x = 0; x < kWindowSize; ++x, ++i) lo[i] = 1e-3, hi[i] = 1.0;
    }
};

}  // namespace detail

// Bounded least squares over the masked noise parameters minimizing
// sum_t sum_x (model_t(x) - measured_t(x))^2. Initialization is staged:
// detection efficiencies from the step-0 distribution (closed form), then a
// 1-D scan per q-plate tuning against its own step, then a joint LM polish.
inline CalibrationReport calibrate(const StepDataset& measured, const NoiseModel& guess,
                                   const WalkParams& base, const SpinorField& input,
                                   const CalibrationMask& mask = {}) {
    if (measured.step_count() < 2)
        throw std::invalid_argument("calibrate: need at least two measured steps");
    const int steps = measured.step_count() - 1;
    if (guess.step_count() < steps)
        throw std::invalid_argument("calibrate: guess has too few per-step entries");
    for (const auto& d : measured.steps)
        if (int(d.sites.size()) != kWindowSize)
            throw std::invalid_argument("calibrate: measured steps must cover modes -5..5");

    detail::NoisePacking packing{mask, steps};
    NoiseModel work = guess;

    auto evaluate = [&](const NoiseModel& m) { return noisy_evolution(input, base, m, steps); };
    auto objective_of = [&](const StepDataset& model) {
        double o = 0;
        for (int t = 0; t <= steps; ++t)
            for (int x = 0; x < kWindowSize; ++x) {
                const double d = model.steps[t].probability[x] - measured.steps[t].probability[x];
                o += d * d;
            }
        return o;
    };

    // stage A: detection efficiencies from the unevolved step
    if (mask.det_efficiency) {
        SiteDistribution ideal0 = window_distribution(site_distribution(input));
        double emax = 0;
        std::vector<double> eta(kWindowSize, 1.0);
        for (int x = 0; x < kWindowSize; ++x) {
            eta[x] = ideal0.probability[x] > 1e-12
                         ? measured.steps[0].probability[x] / ideal0.probability[x]
                         : 1.0;
            emax = std::max(emax, eta[x]);
        }
        if (emax > 0)
            for (int x = 0; x < kWindowSize; ++x)
                work.det_efficiency[x] = std::clamp(eta[x] / emax, 1e-3, 1.0);
    }

    // stage B: one-dimensional scan per q-plate tuning against its own step
    if (mask.qplate_tuning) {
        for (int i = 0; i < steps; ++i) {
            const double center = guess.qplate_tuning[i];
            double best = center, best_val = std::numeric_limits<double>::infinity();
            for (int g = 0; g <= 60; ++g) {
                const double d = std::clamp(center - 0.3 + 0.01 * g, 0.0, kPi);
                NoiseModel trial = work;
                trial.qplate_tuning[i] = d;
                StepDataset model = evaluate(trial);
                double v = 0;
                for (int x = 0; x < kWindowSize; ++x) {
                    const double r =
                        model.steps[i + 1].probability[x] - measured.steps[i + 1].probability[x];
                    v += r * r;
                }
                if (v < best_val) {
                    best_val = v;
                    best = d;
                }
            }
            work.qplate_tuning[i] = best;
        }
    }

    // stage C: joint damped-least-squares polish
    auto residual = [&](const Eigen::VectorXd& v) {
        StepDataset model = evaluate(packing.unpack(v, work));
        Eigen::VectorXd r((steps + 1) * kWindowSize);
        int i = 0;
        for (int t = 0; t <= steps; ++t)
            for (int x = 0; x < kWindowSize; ++x)
                r[i++] = model.steps[t].probability[x] - measured.steps[t].probability[x];
        return r;
    };
    Eigen::VectorXd lo, hi;
    packing.bounds(lo, hi);
    LeastSquaresResult lm = levenberg_marquardt(residual, packing.pack(work), lo, hi);

    CalibrationReport rep;
    rep.model = packing.unpack(lm.params, work);
    rep.model.counts_per_step = guess.counts_per_step;
    rep.converged = lm.converged;
    rep.iterations = lm.iterations;
    rep.objective_trace = lm.objective_trace;
    StepDataset final_model = evaluate(rep.model);
    rep.objective = objective_of(final_model);
    for (int t = 0; t <= steps; ++t) {
        double v = 0;
        for (int x = 0; x < kWindowSize; ++x) {
            const double r =
                final_model.steps[t].probability[x] - measured.steps[t].probability[x];
            v += r * r;
        }
        rep.per_step_residual.push_back(v);
        rep.per_step_fidelity.push_back(fidelity(final_model.steps[t], measured.steps[t]));
    }
    return rep;
}

}  // namespace dqca
