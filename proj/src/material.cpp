#include "sfio/material.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sfio {

void MaterialParams::validate() const {
    std::ostringstream msg;
    if (!std::isfinite(E_gpa) || !(E_gpa > 0.0)) msg << "E must be > 0 (got " << E_gpa << ")";
    else if (!std::isfinite(nu) || !(nu > 0.0 && nu < 0.5))
        msg << "nu must lie in (0, 0.5) (got " << nu << ")";
    else if (!std::isfinite(rho) || !(rho > 0.0)) msg << "rho must be > 0 (got " << rho << ")";
    else return;
    throw std::invalid_argument("material: " + msg.str());
}

double MaterialParams::lame_lambda() const {
    return kGpaToInternal * E_gpa * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
}

double MaterialParams::lame_mu() const { return kGpaToInternal * E_gpa / (2.0 * (1.0 + nu)); }

WaveSpeeds wave_speeds(double E_gpa, double nu, double rho) {
    // nu = 0 is a legal degenerate input here; only the upper limit is singular.
    if (!std::isfinite(E_gpa) || !std::isfinite(nu) || !std::isfinite(rho))
        throw std::invalid_argument("wave_speeds: non-finite input");
    if (!(E_gpa > 0.0)) throw std::invalid_argument("wave_speeds: E must be > 0");
    if (!(rho > 0.0)) throw std::invalid_argument("wave_speeds: rho must be > 0");
    if (!(nu < 0.5)) throw std::invalid_argument("wave_speeds: nu >= 0.5 makes c_l singular");
    if (!(nu > -1.0)) throw std::invalid_argument("wave_speeds: nu must be > -1");
    const double stiffness = kGpaToInternal * E_gpa / rho;
    WaveSpeeds c;
    c.c_l = std::sqrt(stiffness * (1.0 - nu) / ((1.0 + nu) * (1.0 - 2.0 * nu)));
    c.c_s = std::sqrt(stiffness / (2.0 * (1.0 + nu)));
    return c;
}

WaveSpeeds wave_speeds(const MaterialParams& mp) { return wave_speeds(mp.E_gpa, mp.nu, mp.rho); }

}  // namespace sfio
