#pragma once

#include <cstdint>

#include "sfio/fio_solver.hpp"
#include "sfio/grid.hpp"
#include "sfio/random_field.hpp"

namespace sfio {

/// Statistical description of the random material: independent Gaussian E and
/// nu fields plus constant density. Seeds inside the field specs are ignored;
/// realizations are drawn from a sample seed (see sample_medium).
struct MediumSpec {
    RandomFieldSpec E{70.0, 3.5, 3.0, 0};
    RandomFieldSpec nu{0.35, 0.005, 3.0, 0};
    double rho = 2.70;
    GridSpec field_grid = default_field_grid();

    /// 64 x 64 nodes spanning the 10 x 10 cm domain centred on the source.
    static GridSpec default_field_grid(double size_cm = 10.0, std::size_t n = 64);

    void validate() const;
};

/// E field from derive_seed(seed, 0), nu field from derive_seed(seed, 1).
StochasticMedium sample_medium(const MediumSpec& spec, std::uint64_t seed);

}  // namespace sfio
