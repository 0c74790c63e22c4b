#pragma once

#include <algorithm>
#include <array>
#include <cmath>

namespace flexsac {

/// Two-node RC network: zone air (index 0) and lumped structural mass
/// (index 1).
///
///   C_air  dT_air/dt  = H_out (T_out - T_air) + H_am (T_mass - T_air) + Q_air
///   C_mass dT_mass/dt = H_am (T_air - T_mass) + Q_mass
///
/// With inputs held constant over a step the solution is exact:
///   x(h) = Phi x(0) + Gamma b,   Phi = e^{A h},  Gamma = A^{-1} (Phi - I),
/// where b = [(H_out T_out + Q_air)/C_air, Q_mass/C_mass].
struct TwoNodeRc {
    double air_capacitance = 1.5e9;   // J/K
    double mass_capacitance = 7.0e9;  // J/K
    double air_mass_conductance = 4.0e5;  // W/K

    using Vec2 = std::array<double, 2>;
    using Mat2 = std::array<std::array<double, 2>, 2>;

    struct Propagator {
        Mat2 phi{};
        Mat2 gamma{};
    };

    Mat2 system_matrix(double outdoor_conductance) const {
        const double ca = air_capacitance;
        const double cm = mass_capacitance;
        const double ham = air_mass_conductance;
        return {{{-(outdoor_conductance + ham) / ca, ham / ca}, {ham / cm, -ham / cm}}};
    }

    /// Phi and Gamma for a step of `seconds` via Sylvester's formula on the
    /// two (real, negative) eigenvalues.
    Propagator propagator(double outdoor_conductance, double seconds) const {
        const Mat2 a = system_matrix(outdoor_conductance);
        const double tr = a[0][0] + a[1][1];
        const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        const double disc = std::sqrt(std::max(0.0, 0.25 * tr * tr - det));
        const double l1 = 0.5 * tr + disc;
        const double l2 = 0.5 * tr - disc;
        double c0;
        double c1;
        if (l1 - l2 > 1e-12 * std::abs(l2)) {
            const double e1 = std::exp(l1 * seconds);
            const double e2 = std::exp(l2 * seconds);
            c0 = (l1 * e2 - l2 * e1) / (l1 - l2);
            c1 = (e1 - e2) / (l1 - l2);
        } else {
            const double e = std::exp(l1 * seconds);
            c0 = e * (1.0 - l1 * seconds);
            c1 = e * seconds;
        }
        Propagator p;
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) p.phi[i][j] = (i == j ? c0 : 0.0) + c1 * a[i][j];
        }
        // A^{-1} for the 2x2 case.
        const Mat2 inv{{{a[1][1] / det, -a[0][1] / det}, {-a[1][0] / det, a[0][0] / det}}};
        Mat2 pm = p.phi;
        pm[0][0] -= 1.0;
        pm[1][1] -= 1.0;
        for (int i = 0; i < 2; ++i) {
            for (int j = 0; j < 2; ++j) p.gamma[i][j] = inv[i][0] * pm[0][j] + inv[i][1] * pm[1][j];
        }
        return p;
    }

    Vec2 forcing(double outdoor_conductance, double t_out, double q_air, double q_mass) const {
        return {(outdoor_conductance * t_out + q_air) / air_capacitance, q_mass / mass_capacitance};
    }

    static Vec2 apply(const Propagator& p, const Vec2& x0, const Vec2& b) {
        return {p.phi[0][0] * x0[0] + p.phi[0][1] * x0[1] + p.gamma[0][0] * b[0] + p.gamma[0][1] * b[1],
                p.phi[1][0] * x0[0] + p.phi[1][1] * x0[1] + p.gamma[1][0] * b[0] + p.gamma[1][1] * b[1]};
    }

    /// End-of-step response of both nodes to one watt of constant cooling
    /// extracted from the air node (positive numbers; subtract Q * r).
    Vec2 cooling_response(const Propagator& p) const {
        return {p.gamma[0][0] / air_capacitance, p.gamma[1][0] / air_capacitance};
    }
};

}  // namespace flexsac
