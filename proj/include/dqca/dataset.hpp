#pragma once

#include <vector>

#include "dqca/spinor_field.hpp"

namespace dqca {

// Per-step site distributions, e.g. the [-5, 5] window measured at each walk
// step. Index in `steps` is the walk step number.
struct StepDataset {
    enum class Provenance { synthetic, external };
    std::vector<SiteDistribution> steps;
    Provenance provenance = Provenance::synthetic;

    int step_count() const { return int(steps.size()); }
};

}  // namespace dqca
