#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "flexsac/env.hpp"

namespace flexsac::testing {

// Building with no internal gains, no solar, no ventilation and no tank.
inline EnvConfig passive_config() {
    EnvConfig c;
    c.building.people_gain_w_m2 = 0.0;
    c.building.equipment_power_w_m2 = 0.0;
    c.building.base_power_w_m2 = 0.0;
    c.building.solar_aperture_m2 = 0.0;
    c.building.ventilation_w_k = 0.0;
    c.building.tes_volume_m3 = 0.0;
    c.building.plant_capacity_kw = 500.0;
    return c;
}

// x(t) = x_ss + V exp(L t) V^-1 (x0 - x_ss) for the two-node network with
// constant outdoor temperature.
inline Eigen::Vector2d two_node_closed_form(const BuildingParams& b, double t_out, const Eigen::Vector2d& x0,
                                            double seconds) {
    const double h_out = b.envelope_conductance_w_k() + b.infiltration_w_k;
    const double ca = b.rc.air_capacitance;
    const double cm = b.rc.mass_capacitance;
    const double k = b.rc.air_mass_conductance;
    Eigen::Matrix2d a;
    a << -(h_out + k) / ca, k / ca, k / cm, -k / cm;
    const Eigen::Vector2d x_ss(t_out, t_out);
    Eigen::EigenSolver<Eigen::Matrix2d> es(a);
    const Eigen::Matrix2d v = es.eigenvectors().real();
    const Eigen::Vector2d l = es.eigenvalues().real();
    Eigen::Matrix2d e = Eigen::Matrix2d::Zero();
    e(0, 0) = std::exp(l[0] * seconds);
    e(1, 1) = std::exp(l[1] * seconds);
    return x_ss + v * e * v.inverse() * (x0 - x_ss);
}

}  // namespace flexsac::testing
