#include "sfio/medium.hpp"

#include <stdexcept>

#include "sfio/rng.hpp"

namespace sfio {

GridSpec MediumSpec::default_field_grid(double size_cm, std::size_t n) {
    const double half = 0.5 * size_cm;
    return GridSpec::spanning(n, n, -half, half, -half, half);
}

void MediumSpec::validate() const {
    E.validate();
    nu.validate();
    field_grid.validate();
    if (!(rho > 0.0)) throw std::invalid_argument("medium: rho must be > 0");
    if (!(E.mean > 0.0)) throw std::invalid_argument("medium: E mean must be > 0");
    if (!(nu.mean > 0.0 && nu.mean < 0.5)) throw std::invalid_argument("medium: nu mean must be in (0, 0.5)");
}

StochasticMedium sample_medium(const MediumSpec& spec, std::uint64_t seed) {
    spec.validate();
    RandomFieldSpec e = spec.E;
    RandomFieldSpec n = spec.nu;
    e.seed = derive_seed(seed, 0);
    n.seed = derive_seed(seed, 1);
    StochasticMedium m;
    m.E_field = sample_field(e, spec.field_grid, "GPa");
    m.nu_field = sample_poisson_field(n, spec.field_grid);
    m.rho = spec.rho;
    return m;
}

}  // namespace sfio
