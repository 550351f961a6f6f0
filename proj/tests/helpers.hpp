#pragma once

#include "dqca/rng.hpp"
#include "dqca/spinor_field.hpp"

namespace dqca::testing {

inline SpinorField random_state(const LatticeGeometry& geom, Rng& rng,
                                Representation rep = Representation::position) {
    SpinorField s{geom, rep, Eigen::Matrix2Xcd(2, geom.size)};
    for (int c = 0; c < 2; ++c)
        for (int x = 0; x < geom.size; ++x)
            s.amp(c, x) = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    s.amp /= s.norm();
    return s;
}

// random state supported well inside the lattice, away from the wrap point
inline SpinorField random_packet(const LatticeGeometry& geom, Rng& rng, int half_width) {
    SpinorField s{geom, Representation::position, Eigen::Matrix2Xcd::Zero(2, geom.size)};
    for (int c = 0; c < 2; ++c)
        for (int x = -half_width; x <= half_width; ++x)
            s.amp(c, geom.index_of(x)) = Complex(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0));
    s.amp /= s.norm();
    return s;
}

inline double max_amp_deviation(const SpinorField& a, const SpinorField& b) {
    return (a.amp - b.amp).cwiseAbs().maxCoeff();
}

}  // namespace dqca::testing
