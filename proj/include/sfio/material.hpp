#pragma once

namespace sfio {

/// Internal unit system is cm, g, us. One GPa is 0.01 g / (cm us^2).
inline constexpr double kGpaToInternal = 0.01;

/// Nominal isotropic elastic constants. E in GPa, rho in g/cm^3.
struct MaterialParams {
    double E_gpa = 70.0;
    double nu = 0.35;
    double rho = 2.70;

    void validate() const;

    /// Lame parameters in g / (cm us^2).
    double lame_lambda() const;
    double lame_mu() const;
};

/// Pressure and shear wave speeds in cm/us.
struct WaveSpeeds {
    double c_l = 0.0;
    double c_s = 0.0;
};

WaveSpeeds wave_speeds(const MaterialParams& mp);
WaveSpeeds wave_speeds(double E_gpa, double nu, double rho);

}  // namespace sfio
