#pragma once

#include <cmath>
#include <stdexcept>

namespace dqca {

inline constexpr double kPi = 3.14159265358979323846;

// Finite periodic lattice replacing Z. Sites are labeled -N/2 .. N/2-1 and the
// momentum grid is k_j = 2*pi*j/N for the same label range, so k in [-pi, pi).
struct LatticeGeometry {
    int size = 0;

    int min_site() const { return -size / 2; }
    int max_site() const { return size / 2 - 1; }

    // array index 0..N-1 <-> signed label
    int label(int index) const { return index - size / 2; }
    int index_of(int label_) const { return label_ + size / 2; }

    double momentum(int index) const { return 2.0 * kPi * label(index) / size; }

    bool contains(int site) const { return site >= min_site() && site <= max_site(); }
};

inline LatticeGeometry make_geometry(int n_sites) {
    if (n_sites < 16) throw std::invalid_argument("lattice size must be at least 16");
    if (n_sites % 2 != 0) throw std::invalid_argument("lattice size must be even");
    return LatticeGeometry{n_sites};
}

}  // namespace dqca
