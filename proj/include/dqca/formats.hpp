#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "dqca/dataset.hpp"
#include "dqca/noise.hpp"
#include "dqca/oscillation_fit.hpp"
#include "dqca/walk.hpp"

namespace dqca {

inline constexpr const char* kVersion = "0.1.0";

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

using Json = nlohmann::json;

// probabilities are printed with 12 significant digits
inline std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

// ---------------------------------------------------------------- CSV

// One combined file, header `step,site,probability,stderr`; the stderr field
// stays empty for exact probabilities.
inline void write_distributions_csv(std::ostream& os, const StepDataset& data) {
    os << "step,site,probability,stderr\n";
    for (int t = 0; t < data.step_count(); ++t) {
        const auto& d = data.steps[t];
        for (std::size_t i = 0; i < d.sites.size(); ++i) {
            os << t << ',' << d.sites[i] << ',' << format_value(d.probability[i]) << ',';
            if (d.has_stderr()) os << format_value(d.stderr_[i]);
            os << '\n';
        }
    }
}

inline void write_distributions_csv(const std::string& path, const StepDataset& data) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path);
    write_distributions_csv(os, data);
}

inline StepDataset read_distributions_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw DataError("empty distribution file");
    std::map<int, SiteDistribution> by_step;
    bool any_stderr = false;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string f0, f1, f2, f3;
        if (!std::getline(ls, f0, ',') || !std::getline(ls, f1, ',') || !std::getline(ls, f2, ','))
            throw DataError("malformed csv line " + std::to_string(lineno));
        std::getline(ls, f3, ',');
        try {
            const int step = std::stoi(f0);
            auto& d = by_step[step];
            d.sites.push_back(std::stoi(f1));
            d.probability.push_back(std::stod(f2));
            if (!f3.empty()) {
                d.stderr_.push_back(std::stod(f3));
                any_stderr = true;
            }
        } catch (const std::exception&) {
            throw DataError("malformed csv line " + std::to_string(lineno));
        }
    }
    if (by_step.empty()) throw DataError("distribution file has no rows");
    StepDataset out;
    out.provenance = StepDataset::Provenance::external;
    int expect = 0;
    for (auto& [step, dist] : by_step) {
        if (step != expect++) throw DataError("distribution steps must be contiguous from 0");
        if (any_stderr && dist.stderr_.size() != dist.sites.size())
            throw DataError("stderr column must be all-present or all-empty per step");
        out.steps.push_back(std::move(dist));
    }
    return out;
}

inline StepDataset read_distributions_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open: " + path);
    return read_distributions_csv(is);
}

inline void write_mean_series_csv(const std::string& path, const StepDataset& data) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path);
    os << "step,mean,stderr\n";
    for (int t = 0; t < data.step_count(); ++t) {
        const auto& d = data.steps[t];
        const double mean = d.mean();
        os << t << ',' << format_value(mean) << ',';
        if (d.has_stderr()) {
            // recover the count total from any sampled site, then the
            // multinomial variance of the mean
            double total = 0;
            for (std::size_t i = 0; i < d.sites.size(); ++i)
                if (d.stderr_[i] > 0) {
                    total = d.probability[i] / (d.stderr_[i] * d.stderr_[i]);
                    break;
                }
            if (total > 0) {
                double x2 = 0;
                for (std::size_t i = 0; i < d.sites.size(); ++i)
                    x2 += double(d.sites[i]) * d.sites[i] * d.probability[i];
                os << format_value(std::sqrt(std::max(0.0, x2 - mean * mean) / total));
            }
        }
        os << '\n';
    }
}

// ---------------------------------------------------------------- JSON

inline void require_keys(const Json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) {
                ok = true;
                break;
            }
        if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

inline Json noise_model_to_json(const NoiseModel& m) {
    Json j;
    j["qplate_tuning"] = m.qplate_tuning;
    j["alpha_offset"] = m.alpha_offset;
    j["beta_offset"] = m.beta_offset;
    j["alpha0_offset"] = m.alpha0_offset;
    j["gen_efficiency"] = m.gen_efficiency;
    j["det_efficiency"] = m.det_efficiency;
    j["counts_per_step"] = m.counts_per_step;
    return j;
}

inline NoiseModel noise_model_from_json(const Json& j) {
    require_keys(j,
                 {"qplate_tuning", "alpha_offset", "beta_offset", "alpha0_offset", "gen_efficiency",
                  "det_efficiency", "counts_per_step"},
                 "noise model");
    NoiseModel m;
    try {
        m.qplate_tuning = j.at("qplate_tuning").get<std::vector<double>>();
        m.alpha_offset = j.at("alpha_offset").get<std::vector<double>>();
        m.beta_offset = j.at("beta_offset").get<std::vector<double>>();
        m.alpha0_offset = j.at("alpha0_offset").get<std::vector<double>>();
        m.gen_efficiency = j.at("gen_efficiency").get<std::vector<double>>();
        m.det_efficiency = j.at("det_efficiency").get<std::vector<double>>();
        m.counts_per_step = j.at("counts_per_step").get<long>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("noise model: ") + e.what());
    }
    try {
        m.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return m;
}

inline NoiseModel load_noise_model(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open noise model: " + path);
    Json j;
    try {
        is >> j;
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("noise model json: ") + e.what());
    }
    return noise_model_from_json(j);
}

// ---------------------------------------------------------------- run config

struct RunConfig {
    int lattice_size = 128;
    int steps = 8;
    WalkParams walk = WalkParams::paper_hardware();
    int x0 = 0;
    double sigma = 3.0;
    int window_lo = -5;
    int window_hi = 5;
    Vector2c coin = Vector2c(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
    std::string noise_model_path;  // empty: ideal run
    bool has_sampling = false;
    long counts = 10000;
    std::uint64_t seed = 0;
    std::string output_dir = "out";
};

inline Json run_config_to_json(const RunConfig& c) {
    Json j;
    j["lattice_size"] = c.lattice_size;
    j["steps"] = c.steps;
    if (c.walk.mode == WalkParams::Mode::hardware)
        j["walk"] = {{"mode", "hardware"}, {"delta", c.walk.delta},   {"alpha0", c.walk.alpha0},
                     {"alpha", c.walk.alpha}, {"beta", c.walk.beta}, {"charge", c.walk.charge}};
    else
        j["walk"] = {{"mode", "abstract"}, {"n", c.walk.n}, {"m", c.walk.m}};
    j["input"] = {{"x0", c.x0},
                  {"sigma", c.sigma},
                  {"window", {c.window_lo, c.window_hi}},
                  {"coin", {{c.coin[0].real(), c.coin[0].imag()}, {c.coin[1].real(), c.coin[1].imag()}}}};
    if (!c.noise_model_path.empty()) j["noise_model"] = c.noise_model_path;
    if (c.has_sampling) j["sampling"] = {{"counts", c.counts}, {"seed", c.seed}};
    j["output_dir"] = c.output_dir;
    return j;
}

inline RunConfig run_config_from_json(const Json& j) {
    require_keys(j, {"lattice_size", "steps", "walk", "input", "noise_model", "sampling", "output_dir"},
                 "run config");
    RunConfig c;
    try {
        if (j.contains("lattice_size")) c.lattice_size = j.at("lattice_size").get<int>();
        if (j.contains("steps")) c.steps = j.at("steps").get<int>();
        if (j.contains("walk")) {
            const Json& w = j.at("walk");
            const std::string mode = w.value("mode", "hardware");
            if (mode == "hardware") {
                require_keys(w, {"mode", "delta", "alpha0", "alpha", "beta", "charge"}, "walk");
                c.walk = WalkParams::paper_hardware();
                c.walk.delta = w.value("delta", c.walk.delta);
                c.walk.alpha0 = w.value("alpha0", c.walk.alpha0);
                c.walk.alpha = w.value("alpha", c.walk.alpha);
                c.walk.beta = w.value("beta", c.walk.beta);
                c.walk.charge = w.value("charge", c.walk.charge);
            } else if (mode == "abstract") {
                require_keys(w, {"mode", "n", "m"}, "walk");
                c.walk = WalkParams::dirac(w.value("n", std::sqrt(0.5)), w.value("m", std::sqrt(0.5)));
            } else {
                throw ConfigError("walk mode must be 'hardware' or 'abstract'");
            }
        }
        if (j.contains("input")) {
            const Json& in = j.at("input");
            require_keys(in, {"x0", "sigma", "window", "coin"}, "input");
            c.x0 = in.value("x0", 0);
            c.sigma = in.value("sigma", 3.0);
            if (in.contains("window")) {
                auto w = in.at("window").get<std::vector<int>>();
                if (w.size() != 2) throw ConfigError("input window must be [min, max]");
                c.window_lo = w[0];
                c.window_hi = w[1];
            }
            if (in.contains("coin")) {
                auto cc = in.at("coin").get<std::vector<std::vector<double>>>();
                if (cc.size() != 2 || cc[0].size() != 2 || cc[1].size() != 2)
                    throw ConfigError("input coin must be [[re, im], [re, im]]");
                c.coin = Vector2c(Complex(cc[0][0], cc[0][1]), Complex(cc[1][0], cc[1][1]));
            }
        }
        if (j.contains("noise_model")) c.noise_model_path = j.at("noise_model").get<std::string>();
        if (j.contains("sampling")) {
            const Json& s = j.at("sampling");
            require_keys(s, {"counts", "seed"}, "sampling");
            c.has_sampling = true;
            c.counts = s.value("counts", 10000L);
            c.seed = s.value("seed", std::uint64_t(0));
        }
        if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("run config: ") + e.what());
    }
    try {
        c.walk.validate();
        make_geometry(c.lattice_size);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (c.steps < 0) throw ConfigError("steps must be nonnegative");
    return c;
}

inline RunConfig load_run_config(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open config: " + path);
    Json j;
    try {
        is >> j;
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config json: ") + e.what());
    }
    return run_config_from_json(j);
}

inline SpinorField build_input_state(const RunConfig& c) {
    const LatticeGeometry geom = make_geometry(c.lattice_size);
    const Eigen::VectorXd profile =
        truncated_gaussian_profile(c.x0, c.sigma, c.window_lo, c.window_hi, geom);
    Vector2c coin = c.coin;
    const double nrm = coin.norm();
    if (nrm <= 0) throw ConfigError("coin amplitudes must not vanish");
    coin /= nrm;
    return make_input_state(coin, profile, geom);
}

inline Json fit_to_json(const OscillationFit& f) {
    Json j;
    j["parameters"] = {{"mu0", f.mu0},
                       {"amplitude", f.amplitude},
                       {"omega", f.omega},
                       {"phase", f.phase},
                       {"sigma", f.sigma}};
    j["stderr"] = {{"mu0", f.stderrs[0]},
                   {"amplitude", f.stderrs[1]},
                   {"omega", f.stderrs[2]},
                   {"phase", f.stderrs[3]},
                   {"sigma", f.stderrs[4]}};
    std::vector<double> cov;
    for (int r = 0; r < 5; ++r)
        for (int c2 = 0; c2 < 5; ++c2) cov.push_back(f.covariance(r, c2));
    j["covariance_row_major"] = cov;
    j["residual_sum"] = f.residual_sum;
    j["point_count"] = f.point_count;
    j["window"] = {{"step_min", f.step_min},
                   {"step_max", f.step_max},
                   {"site_min", f.site_min},
                   {"site_max", f.site_max}};
    j["converged"] = f.converged;
    j["degenerate_covariance"] = f.degenerate_covariance;
    return j;
}

inline void write_json(const std::string& path, const Json& j) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path);
    os << j.dump(2) << '\n';
}

inline Json read_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open: " + path);
    Json j;
    try {
        is >> j;
    } catch (const Json::exception& e) {
        throw DataError(std::string("json parse: ") + e.what());
    }
    return j;
}

}  // namespace dqca
