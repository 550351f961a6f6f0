// Command-line front end: ideal/noisy simulation, oscillation fitting, noise
// calibration, spectral analytics, and count sampling over the CSV/JSON
// formats defined in formats.hpp.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "dqca/formats.hpp"
#include "dqca/zitterbewegung.hpp"

namespace fs = std::filesystem;
using namespace dqca;

namespace {

struct OutputGuard {
    std::vector<fs::path> written;
    bool keep = false;
    ~OutputGuard() {
        if (keep) return;
        std::error_code ec;
        for (const auto& p : written) fs::remove(p, ec);
    }
};

StepDataset ideal_dataset(const RunConfig& cfg) {
    SpinorField psi = build_input_state(cfg);
    const StepSymbol sym = step_symbol(cfg.walk);
    StepDataset ds;
    ds.provenance = StepDataset::Provenance::synthetic;
    SpinorField psihat = to_momentum(psi);
    for (int t = 0; t <= cfg.steps; ++t) {
        ds.steps.push_back(site_distribution(to_position(psihat)));
        if (t < cfg.steps) psihat = apply_step_momentum(psihat, sym);
    }
    return ds;
}

StepDataset simulate_dataset(const RunConfig& cfg) {
    if (cfg.noise_model_path.empty()) return ideal_dataset(cfg);
    NoiseModel noise = load_noise_model(cfg.noise_model_path);
    if (noise.step_count() < cfg.steps)
        throw ConfigError("noise model has fewer per-step entries than requested steps");
    return noisy_evolution(build_input_state(cfg), cfg.walk, noise, cfg.steps);
}

void apply_sampling(StepDataset& ds, long counts, std::uint64_t seed) {
    for (int t = 0; t < ds.step_count(); ++t)
        ds.steps[t] = sample_counts(ds.steps[t], counts, seed + 1000003ull * t);
}

int cmd_simulate(const std::string& config_path, const std::string& out_override,
                 const std::optional<std::uint64_t>& seed_override,
                 const std::optional<long>& counts_override) {
    RunConfig cfg = load_run_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    if (seed_override || counts_override) {
        cfg.has_sampling = true;
        if (seed_override) cfg.seed = *seed_override;
        if (counts_override) cfg.counts = *counts_override;
    }
    fs::create_directories(cfg.output_dir);

    StepDataset ds = simulate_dataset(cfg);
    if (cfg.has_sampling) apply_sampling(ds, cfg.counts, cfg.seed);

    OutputGuard guard;
    const fs::path dir(cfg.output_dir);
    guard.written = {dir / "distributions.csv", dir / "mean_position.csv", dir / "manifest.json"};
    write_distributions_csv((dir / "distributions.csv").string(), ds);
    write_mean_series_csv((dir / "mean_position.csv").string(), ds);
    Json manifest;
    manifest["artifact"] = "dqca";
    manifest["version"] = kVersion;
    manifest["command"] = "simulate";
    manifest["config"] = run_config_to_json(cfg);
    write_json((dir / "manifest.json").string(), manifest);
    guard.keep = true;

    double first = ds.steps.front().mean() / std::max(1e-300, ds.steps.front().total());
    double last = ds.steps.back().mean() / std::max(1e-300, ds.steps.back().total());
    std::cout << "wrote " << ds.step_count() << " step distributions to " << cfg.output_dir
              << "  (mean position " << format_value(first) << " -> " << format_value(last) << ")\n";
    return 0;
}

int cmd_fit(const std::string& in_dir, int win_lo, int win_hi, int step_lo, int step_hi,
            bool weighted, const std::string& out_override) {
    const fs::path dir(in_dir);
    StepDataset ds = read_distributions_csv((dir / "distributions.csv").string());
    if (step_hi < 0) step_hi = ds.step_count() - 1;
    FitGuess guess = initial_guess(ds);
    OscillationFit fit;
    try {
        fit = fit_surface(ds, step_lo, step_hi, win_lo, win_hi, guess, weighted);
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }
    const fs::path out = out_override.empty() ? dir / "fit_report.json" : fs::path(out_override);
    write_json(out.string(), fit_to_json(fit));
    std::cout << "omega = " << format_value(fit.omega) << " +- " << format_value(fit.stderrs[2])
              << "\n"
              << "A     = " << format_value(fit.amplitude) << " +- " << format_value(fit.stderrs[1])
              << "\n"
              << "report: " << out.string() << "\n";
    if (!fit.converged) std::cerr << "warning: fit did not meet the convergence criterion\n";
    return 0;
}

int cmd_analytics(const std::string& config_path, const std::string& out_override) {
    RunConfig cfg = load_run_config(config_path);
    if (!out_override.empty()) cfg.output_dir = out_override;
    fs::create_directories(cfg.output_dir);

    const LatticeGeometry geom = make_geometry(cfg.lattice_size);
    const StepSymbol sym = step_symbol(cfg.walk);
    const SpectralData sd = make_spectral_data(sym, geom);
    SpinorField psi = build_input_state(cfg);
    SpinorField psihat = to_momentum(psi);

    // packet peak momentum
    int peak = 0;
    double best = -1;
    for (int j = 0; j < geom.size; ++j) {
        const double w = psihat.amp.col(j).squaredNorm();
        if (w > best) {
            best = w;
            peak = j;
        }
    }
    const double k0 = geom.momentum(peak);

    ZbDecomposition dec = zb_decompose(psihat, sd, cfg.steps);
    const Complex c_plus = std::sqrt(dec.weight_plus), c_minus = std::sqrt(dec.weight_minus);
    ZbPrediction pred = zb_predict(c_plus, c_minus, k0, sym);
    Trajectory direct = position_trajectory(psihat, sym, cfg.steps);

    if (dec.dropped_weight > 1e-12)
        std::cerr << "warning: dropped weight " << dec.dropped_weight
                  << " on degenerate momentum grid points\n";
    if (direct.boundary_warning)
        std::cerr << "warning: boundary leakage " << direct.max_boundary_probability << "\n";

    Json j;
    std::vector<double> ks, omegas;
    for (int i = 0; i < geom.size; ++i) {
        ks.push_back(geom.momentum(i));
        omegas.push_back(sd.points[i].omega);
    }
    j["dispersion"] = {{"k", ks}, {"omega", omegas}};
    j["sector_weights"] = {{"plus", dec.weight_plus}, {"minus", dec.weight_minus}};
    j["prediction"] = {{"k0", k0},
                       {"amplitude", pred.amplitude},
                       {"frequency", pred.frequency},
                       {"coupling_magnitude", pred.coupling_magnitude},
                       {"phase", pred.phase}};
    j["decomposition"] = {{"x_plus", dec.x_plus},
                          {"x_minus", dec.x_minus},
                          {"x_zero", dec.x_zero},
                          {"z", dec.z},
                          {"total", dec.total}};
    j["direct_mean"] = direct.mean;
    j["dropped_weight"] = dec.dropped_weight;
    j["degenerate_points"] = sd.degenerate_count();
    const fs::path out = fs::path(cfg.output_dir) / "analytics.json";
    write_json(out.string(), j);
    std::cout << "frequency = " << format_value(pred.frequency)
              << "  amplitude = " << format_value(pred.amplitude)
              << "  |f(k0)| = " << format_value(pred.coupling_magnitude) << "\n"
              << "report: " << out.string() << "\n";
    return 0;
}

int cmd_calibrate(const std::string& in_dir, const std::string& guess_path,
                  const std::string& base_config, const std::string& out_override,
                  bool fit_offsets, bool fit_gen) {
    const fs::path dir(in_dir);
    StepDataset measured = read_distributions_csv((dir / "distributions.csv").string());
    RunConfig cfg = base_config.empty() ? RunConfig{} : load_run_config(base_config);
    NoiseModel guess = guess_path.empty() ? NoiseModel::ideal(measured.step_count() - 1)
                                          : load_noise_model(guess_path);
    CalibrationMask mask;
    mask.waveplate_offsets = fit_offsets;
    mask.axis_offsets = fit_offsets;
    mask.gen_efficiency = fit_gen;
    CalibrationReport rep;
    try {
        rep = calibrate(measured, guess, cfg.walk, build_input_state(cfg), mask);
    } catch (const std::invalid_argument& e) {
        throw DataError(e.what());
    }

    const fs::path out_dir = out_override.empty() ? dir : fs::path(out_override);
    fs::create_directories(out_dir);
    write_json((out_dir / "noise_fit.json").string(), noise_model_to_json(rep.model));
    Json j;
    j["objective"] = rep.objective;
    j["converged"] = rep.converged;
    j["iterations"] = rep.iterations;
    j["per_step_residual"] = rep.per_step_residual;
    j["per_step_fidelity"] = rep.per_step_fidelity;
    write_json((out_dir / "calibration_report.json").string(), j);

    std::cout << "objective = " << format_value(rep.objective) << "  converged = "
              << (rep.converged ? "yes" : "no") << "\n";
    std::cout << "fidelities:";
    for (double f : rep.per_step_fidelity) std::cout << ' ' << format_value(f);
    std::cout << "\nreports: " << (out_dir / "noise_fit.json").string() << ", "
              << (out_dir / "calibration_report.json").string() << "\n";
    if (!rep.converged) std::cerr << "warning: calibration stopped at the iteration budget\n";
    return 0;
}

int cmd_sample(const std::string& in_dir, long counts, std::uint64_t seed,
               const std::string& out_override) {
    const fs::path dir(in_dir);
    StepDataset ds = read_distributions_csv((dir / "distributions.csv").string());
    apply_sampling(ds, counts, seed);
    const fs::path out_dir = out_override.empty() ? dir : fs::path(out_override);
    fs::create_directories(out_dir);
    write_distributions_csv((out_dir / "distributions_sampled.csv").string(), ds);
    write_mean_series_csv((out_dir / "mean_position_sampled.csv").string(), ds);
    std::cout << "sampled " << ds.step_count() << " steps at " << counts << " counts each\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dirac quantum cellular automaton walk simulator and analysis toolkit"};
    app.require_subcommand(1);

    std::string config_path, in_dir, out_dir, guess_path, base_config;
    std::optional<std::uint64_t> seed_opt;
    std::optional<long> counts_opt;
    std::uint64_t seed = 0;
    long counts = 10000;
    int win_lo = kWindowLo, win_hi = kWindowHi, step_lo = 0, step_hi = -1;
    bool weighted = false, fit_offsets = false, fit_gen = false;

    auto* sim = app.add_subcommand("simulate", "run the walk and write step distributions");
    sim->add_option("--config", config_path, "run config JSON")->required();
    sim->add_option("--out", out_dir, "output directory (overrides config)");
    sim->add_option("--seed", seed_opt, "sampling seed (enables count sampling)");
    sim->add_option("--counts", counts_opt, "counts per step (enables count sampling)");

    auto* fit = app.add_subcommand("fit", "fit the oscillating Gaussian surface");
    fit->add_option("--in", in_dir, "directory with distributions.csv")->required();
    fit->add_option("--window", [&win_lo, &win_hi](const std::vector<std::string>& v) {
           win_lo = std::stoi(v.at(0));
           win_hi = std::stoi(v.at(1));
           return true;
       }, "site window MIN MAX")->expected(2);
    fit->add_option("--steps", [&step_lo, &step_hi](const std::vector<std::string>& v) {
           step_lo = std::stoi(v.at(0));
           step_hi = std::stoi(v.at(1));
           return true;
       }, "step range A B")->expected(2);
    fit->add_flag("--weighted", weighted, "weight residuals by 1/stderr");
    fit->add_option("--out", out_dir, "report path");

    auto* ana = app.add_subcommand("analytics", "dispersion, sector weights and decomposition");
    ana->add_option("--config", config_path, "run config JSON")->required();
    ana->add_option("--out", out_dir, "output directory (overrides config)");

    auto* cal = app.add_subcommand("calibrate", "fit a noise model to measured distributions");
    cal->add_option("--in", in_dir, "directory with measured distributions.csv")->required();
    cal->add_option("--guess", guess_path, "initial noise model JSON");
    cal->add_option("--base-config", base_config, "run config with the nominal walk parameters");
    cal->add_option("--out", out_dir, "output directory");
    cal->add_flag("--fit-offsets", fit_offsets, "also fit waveplate and axis offsets");
    cal->add_flag("--fit-gen", fit_gen, "also fit generation efficiencies");

    auto* smp = app.add_subcommand("sample", "apply multinomial count sampling to distributions");
    smp->add_option("--in", in_dir, "directory with distributions.csv")->required();
    smp->add_option("--counts", counts, "counts per step")->required();
    smp->add_option("--seed", seed, "sampling seed")->required();
    smp->add_option("--out", out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(config_path, out_dir, seed_opt, counts_opt);
        if (fit->parsed()) return cmd_fit(in_dir, win_lo, win_hi, step_lo, step_hi, weighted, out_dir);
        if (ana->parsed()) return cmd_analytics(config_path, out_dir);
        if (cal->parsed())
            return cmd_calibrate(in_dir, guess_path, base_config, out_dir, fit_offsets, fit_gen);
        if (smp->parsed()) return cmd_sample(in_dir, counts, seed, out_dir);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
