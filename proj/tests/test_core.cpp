#include <catch2/catch_amalgamated.hpp>

#include "dqca/spinor_field.hpp"
#include "dqca/walk.hpp"
#include "helpers.hpp"

using namespace dqca;
using Catch::Approx;

TEST_CASE("geometry labels and momentum grid") {
    auto g = make_geometry(16);
    REQUIRE(g.min_site() == -8);
    REQUIRE(g.max_site() == 7);
    REQUIRE(g.momentum(0) == Approx(-kPi));
    REQUIRE(g.momentum(1) == Approx(-7.0 * kPi / 8.0));
    REQUIRE(g.momentum(15) == Approx(7.0 * kPi / 8.0));
    for (int i = 0; i < g.size; ++i) {
        REQUIRE(g.momentum(i) >= -kPi);
        REQUIRE(g.momentum(i) < kPi);
    }

    auto g128 = make_geometry(128);
    REQUIRE(g128.momentum(1) - g128.momentum(0) == Approx(2.0 * kPi / 128));

    REQUIRE_THROWS_AS(make_geometry(15), std::invalid_argument);
    REQUIRE_THROWS_AS(make_geometry(17), std::invalid_argument);
    REQUIRE_THROWS_AS(make_geometry(8), std::invalid_argument);
}

TEST_CASE("truncated gaussian profile") {
    auto g = make_geometry(128);
    auto prof = truncated_gaussian_profile(0, 3.0, -5, 5, g);
    int support = 0;
    for (int i = 0; i < g.size; ++i)
        if (prof[i] != 0) ++support;
    REQUIRE(support == 11);
    REQUIRE(prof.norm() == Approx(1.0).margin(1e-14));
    for (int d = 1; d <= 5; ++d)
        REQUIRE(prof[g.index_of(d)] == prof[g.index_of(-d)]);  // even, exactly

    // flat limit: huge sigma gives 1/sqrt(11) on each supported site
    auto flat = truncated_gaussian_profile(0, 1e9, -5, 5, g);
    for (int x = -5; x <= 5; ++x)
        REQUIRE(flat[g.index_of(x)] == Approx(1.0 / std::sqrt(11.0)).margin(1e-9));

    REQUIRE_THROWS_AS(truncated_gaussian_profile(0, -1.0, -5, 5, g), std::invalid_argument);
    REQUIRE_THROWS_AS(truncated_gaussian_profile(0, 3.0, 5, -5, g), std::invalid_argument);
    REQUIRE_THROWS_AS(truncated_gaussian_profile(0, 3.0, -200, 5, g), std::invalid_argument);
}

TEST_CASE("input state construction") {
    auto g = make_geometry(128);
    auto prof = truncated_gaussian_profile(0, 3.0, -5, 5, g);
    const Vector2c coin(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0));
    auto psi = make_input_state(coin, prof, g);
    REQUIRE(psi.squared_norm() == Approx(1.0).margin(1e-12));
    REQUIRE(psi.rep == Representation::position);
    REQUIRE(std::abs(psi.amp(0, g.index_of(2)) - coin[0] * prof[g.index_of(2)]) < 1e-15);

    // delta profile with a pure coin: a single nonzero amplitude
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(g.size);
    delta[g.index_of(0)] = 1.0;
    auto basis = make_input_state(Vector2c(1, 0), delta, g);
    REQUIRE(std::abs(basis.amp(0, g.index_of(0)) - Complex(1, 0)) < 1e-15);
    REQUIRE(basis.squared_norm() == Approx(1.0).margin(1e-12));

    Eigen::VectorXd bad = delta * 1.5;
    REQUIRE_THROWS_AS(make_input_state(Vector2c(1, 0), bad, g), std::invalid_argument);
    REQUIRE_THROWS_AS(make_input_state(Vector2c(1, 1), delta, g), std::invalid_argument);
}

TEST_CASE("momentum transform basics") {
    auto g = make_geometry(64);
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(g.size);
    delta[g.index_of(0)] = 1.0;
    auto psi = make_input_state(Vector2c(1, 0), delta, g);
    auto hat = to_momentum(psi);
    for (int j = 0; j < g.size; ++j)
        REQUIRE(std::abs(hat.amp(0, j)) == Approx(1.0 / std::sqrt(64.0)).margin(1e-13));

    auto back = to_position(hat);
    REQUIRE(dqca::testing::max_amp_deviation(psi, back) < 1e-12);

    REQUIRE_THROWS_AS(to_momentum(hat), std::invalid_argument);
    REQUIRE_THROWS_AS(to_position(psi), std::invalid_argument);
}

TEST_CASE("paper input peaks at k=0 with width of order 1/sigma") {
    auto g = make_geometry(128);
    auto psi = make_input_state(Vector2c(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)),
                                truncated_gaussian_profile(0, 3.0, -5, 5, g), g);
    auto hat = to_momentum(psi);
    double best = -1, mean = 0, var = 0;
    int peak = -1;
    std::vector<double> pk(g.size);
    for (int j = 0; j < g.size; ++j) {
        pk[j] = hat.amp.col(j).squaredNorm();
        if (pk[j] > best) {
            best = pk[j];
            peak = j;
        }
        mean += g.momentum(j) * pk[j];
    }
    for (int j = 0; j < g.size; ++j) var += (g.momentum(j) - mean) * (g.momentum(j) - mean) * pk[j];
    REQUIRE(g.momentum(peak) == Approx(0.0).margin(1e-12));
    // |psihat|^2 width 0.2774 for the truncated sigma=3 packet; the paper's
    // amplitude-level 1/sigma = 1/3 sets the scale
    REQUIRE(std::sqrt(var) == Approx(0.27741278).margin(5e-4));
}

TEST_CASE("Fourier unitarity on random states") {
    auto g = make_geometry(64);
    Rng rng(42);
    for (int trial = 0; trial < 5; ++trial) {
        auto a = dqca::testing::random_state(g, rng);
        auto b = dqca::testing::random_state(g, rng);
        const Complex pos = inner_product(a, b);
        const Complex mom = inner_product(to_momentum(a), to_momentum(b));
        REQUIRE(std::abs(pos - mom) < 1e-12);
        REQUIRE(to_momentum(a).squared_norm() == Approx(1.0).margin(1e-12));
    }
}

TEST_CASE("shift symbol convention: e^{ik} moves the delta to x = -1") {
    auto g = make_geometry(32);
    Eigen::VectorXd delta = Eigen::VectorXd::Zero(g.size);
    delta[g.index_of(0)] = 1.0;
    auto psi = make_input_state(Vector2c(1, 0), delta, g);
    StepSymbol shift;
    shift.hop_up = Matrix2c::Identity();  // symbol e^{ik} I
    auto moved = to_position(apply_step_momentum(to_momentum(psi), shift));
    REQUIRE(std::abs(moved.amp(0, g.index_of(-1)) - Complex(1, 0)) < 1e-12);
    for (int x = g.min_site(); x <= g.max_site(); ++x)
        if (x != -1) REQUIRE(std::abs(moved.amp(0, g.index_of(x))) < 1e-12);
}

TEST_CASE("site distribution") {
    auto g = make_geometry(128);
    auto prof = truncated_gaussian_profile(0, 3.0, -5, 5, g);
    auto psi = make_input_state(Vector2c(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)), prof, g);
    auto d = site_distribution(psi);
    REQUIRE(d.total() == Approx(1.0).margin(1e-9));
    REQUIRE(d.mean() == Approx(0.0).margin(1e-12));
    for (int x = 1; x <= 5; ++x)
        REQUIRE(d.probability[g.index_of(x)] == Approx(d.probability[g.index_of(-x)]).margin(1e-15));
    REQUIRE(d.probability[g.index_of(2)] ==
            Approx(prof[g.index_of(2)] * prof[g.index_of(2)]).margin(1e-14));

    // coin-orthogonal superposition: probabilities add per site
    SpinorField two{g, Representation::position, Eigen::Matrix2Xcd::Zero(2, g.size)};
    const Complex a(0.8, 0.0), b(0.0, 0.6);
    two.amp(0, g.index_of(1)) = a;
    two.amp(1, g.index_of(-1)) = b;
    auto d2 = site_distribution(two);
    REQUIRE(d2.probability[g.index_of(1)] == Approx(std::norm(a)).margin(1e-15));
    REQUIRE(d2.probability[g.index_of(-1)] == Approx(std::norm(b)).margin(1e-15));
}
