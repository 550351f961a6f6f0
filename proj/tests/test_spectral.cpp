#include <catch2/catch_amalgamated.hpp>

#include "dqca/spectral.hpp"
#include "helpers.hpp"

using namespace dqca;
using Catch::Approx;

namespace {

const StepSymbol kDirac = step_symbol(WalkParams::dirac(std::sqrt(0.5), std::sqrt(0.5)));
const StepSymbol kHardware = step_symbol(WalkParams::paper_hardware());

// independent route: exponentiate the Hermitian H with Eigen's solver
Matrix2c exp_minus_i(const Matrix2c& h) {
    Eigen::SelfAdjointEigenSolver<Matrix2c> es(h);
    Matrix2c d = Matrix2c::Zero();
    d(0, 0) = std::polar(1.0, -es.eigenvalues()[0]);
    d(1, 1) = std::polar(1.0, -es.eigenvalues()[1]);
    return es.eigenvectors() * d * es.eigenvectors().adjoint();
}

}  // namespace

TEST_CASE("effective Hamiltonian closed form at k=0") {
    Matrix2c h = effective_hamiltonian(kDirac, 0.0);
    REQUIRE(std::abs(h(0, 0)) < 1e-13);
    REQUIRE(std::abs(h(0, 1) - Complex(kPi / 4, 0)) < 1e-13);
    REQUIRE(std::abs(h(1, 0) - Complex(kPi / 4, 0)) < 1e-13);
    REQUIRE(std::abs(h(1, 1)) < 1e-13);
}

TEST_CASE("effective Hamiltonian matches the abstract closed form") {
    const double n = std::sqrt(0.5), m = std::sqrt(0.5);
    auto g = make_geometry(64);
    for (int j = 0; j < g.size; ++j) {
        const double k = g.momentum(j);
        const double w = std::acos(n * std::cos(k));
        Matrix2c expected;
        expected << n * std::sin(k), m, m, -n * std::sin(k);
        expected *= w / std::sin(w);
        REQUIRE((effective_hamiltonian(kDirac, k) - expected).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("exp(-iH(k)) reconstructs U(k) across the grid") {
    auto g = make_geometry(64);
    for (const StepSymbol& sym : {kDirac, kHardware}) {
        for (int j = 0; j < g.size; ++j) {
            const double k = g.momentum(j);
            auto sp = spectral_point(sym, k);
            if (sp.degenerate) continue;
            REQUIRE((exp_minus_i(sp.hamiltonian) - sym.at(k)).cwiseAbs().maxCoeff() < 1e-10);
            REQUIRE((sp.hamiltonian - sp.hamiltonian.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("massless limit: H(k) = k sigma_z away from degeneracies") {
    const StepSymbol shift = step_symbol(WalkParams::dirac(1.0, 0.0));
    for (double k : {0.3, -0.9, 1.7}) {
        Matrix2c h = effective_hamiltonian(shift, k);
        REQUIRE(std::abs(h(0, 0) - Complex(k, 0)) < 1e-12);
        REQUIRE(std::abs(h(1, 1) + Complex(k, 0)) < 1e-12);
        REQUIRE(std::abs(h(0, 1)) < 1e-12);
    }
    REQUIRE_THROWS_AS(effective_hamiltonian(shift, 0.0), std::invalid_argument);
}

TEST_CASE("small-k Dirac equation limit") {
    REQUIRE(small_k_dirac_limit_check(std::sqrt(1 - 0.05 * 0.05), 0.05, 0.05) < 1e-3);
    REQUIRE(small_k_dirac_limit_check(1.0, 0.0, 0.01) < 1e-6);
    // out of regime: returned without error, large deviation
    REQUIRE(small_k_dirac_limit_check(std::sqrt(0.5), std::sqrt(0.5), kPi / 2) > 0.05);
}

TEST_CASE("sector projector algebra") {
    auto g = make_geometry(64);
    for (const StepSymbol& sym : {kDirac, kHardware}) {
        auto sd = make_spectral_data(sym, g);
        for (int j = 0; j < g.size; ++j) {
            const auto& p = sd.points[j];
            REQUIRE_FALSE(p.degenerate);
            const Matrix2c pp = p.projector_plus(), pm = p.projector_minus();
            REQUIRE((pp * pp - pp).cwiseAbs().maxCoeff() < 1e-12);
            REQUIRE((pm * pm - pm).cwiseAbs().maxCoeff() < 1e-12);
            REQUIRE((pp * pm).cwiseAbs().maxCoeff() < 1e-12);
            REQUIRE((pp + pm - Matrix2c::Identity()).cwiseAbs().maxCoeff() < 1e-12);
            const Matrix2c u = sym.at(g.momentum(j));
            REQUIRE((u * pp - pp * u).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("projected states: orthogonality, completeness, commutation") {
    auto g = make_geometry(64);
    auto sd = make_spectral_data(kHardware, g);
    Rng rng(5);
    for (int trial = 0; trial < 3; ++trial) {
        auto psi = to_momentum(dqca::testing::random_state(g, rng));
        auto plus = project_sector(psi, sd, Sector::plus);
        auto minus = project_sector(psi, sd, Sector::minus);
        REQUIRE(std::abs(inner_product(plus, minus)) < 1e-12);
        REQUIRE((plus.amp + minus.amp - psi.amp).cwiseAbs().maxCoeff() < 1e-12);
        // U P+ psi = P+ U psi
        auto left = apply_step_momentum(plus, kHardware);
        auto right = project_sector(apply_step_momentum(psi, kHardware), sd, Sector::plus);
        REQUIRE(dqca::testing::max_amp_deviation(left, right) < 1e-11);
        // projecting twice across sectors annihilates
        auto cross = project_sector(plus, sd, Sector::minus);
        REQUIRE(cross.norm() < 1e-12);
    }
}

TEST_CASE("zb operator is sector-off-diagonal with the expected couplings") {
    auto g = make_geometry(64);
    for (const StepSymbol& sym : {kDirac, kHardware}) {
        auto sd = make_spectral_data(sym, g);
        for (int j = 0; j < g.size; ++j) {
            const auto& p = sd.points[j];
            const Matrix2c f = p.zb_coupling;
            REQUIRE(std::abs((p.plus.adjoint() * f * p.plus)(0, 0)) < 1e-9);
            REQUIRE(std::abs((p.minus.adjoint() * f * p.minus)(0, 0)) < 1e-9);
            // F swaps the sectors: P+ F P+ = 0 and P- F P- = 0
            REQUIRE((p.projector_plus() * f * p.projector_plus()).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
    // coupling normalization: the Dirac walk has |f(0)| = 1, the hardware
    // realization sqrt(2) (same dispersion, different eigenbasis)
    REQUIRE(std::abs(zb_coupling(kDirac, 0.0)) == Approx(1.0).margin(1e-12));
    REQUIRE(std::abs(zb_coupling(kHardware, 0.0)) == Approx(std::sqrt(2.0)).margin(1e-12));
}

TEST_CASE("massless walk has no zitterbewegung coupling") {
    const StepSymbol shift = step_symbol(WalkParams::dirac(1.0, 0.0));
    for (double k : {0.4, -1.3, 2.2}) {
        auto sp = spectral_point(shift, k);
        REQUIRE(sp.zb_coupling.cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("analytic H'(k) agrees with central differences") {
    const double h = 1e-5;
    for (const StepSymbol& sym : {kDirac, kHardware}) {
        for (double k : {0.25, -0.8, 1.9}) {
            auto sp = spectral_point(sym, k);
            const Matrix2c num =
                (spectral_point(sym, k + h).hamiltonian - spectral_point(sym, k - h).hamiltonian) /
                (2 * h);
            REQUIRE((sp.hamiltonian_prime - num).cwiseAbs().maxCoeff() < 1e-8);
            // V is the sector-diagonal part of H'
            const Complex vpp = (sp.plus.adjoint() * sp.velocity * sp.plus)(0, 0);
            REQUIRE(vpp.real() == Approx(sp.omega_prime).margin(1e-10));
        }
    }
}

TEST_CASE("degenerate grid points are flagged and weighted") {
    auto g = make_geometry(64);
    const StepSymbol shift = step_symbol(WalkParams::dirac(1.0, 0.0));
    auto sd = make_spectral_data(shift, g);
    REQUIRE(sd.degenerate_count() == 2);  // k = -pi and k = 0
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(g.size);
    delta[g.index_of(0)] = 1.0;
    auto psi = to_momentum(make_input_state(Vector2c(1, 0), delta, g));
    REQUIRE(sd.dropped_weight(psi) == Approx(2.0 / 64.0).margin(1e-12));
}
