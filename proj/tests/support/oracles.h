#pragma once

// Independent reference formulas for checking the library.

#include <cmath>

namespace pipenet::oracles {

// Colebrook-White by fixed-point iteration on 1/sqrt(f). Roughness and
// diameter in m.
inline double colebrook(double roughness_m, double diameter, double re)
{
    double x = 8.0;  // 1/sqrt(f)
    for (int i = 0; i < 200; ++i) {
        const double next = -2.0 * std::log10(roughness_m / (3.7 * diameter) + 2.51 * x / re);
        if (std::abs(next - x) < 1e-14) {
            x = next;
            break;
        }
        x = next;
    }
    return 1.0 / (x * x);
}

// Swamee-Jain written out independently of the library.
inline double swamee_jain(double roughness_m, double diameter, double re)
{
    const double t = std::log10(roughness_m / (3.7 * diameter) + 5.74 / std::pow(re, 0.9));
    return 0.25 / (t * t);
}

// Head loss through one turbulent pipe, Darcy-Weisbach with Swamee-Jain.
inline double pipe_head_loss(double q, double length, double diameter, double roughness_m,
                             double nu, double g)
{
    const double pi = 3.14159265358979323846;
    const double area = pi * diameter * diameter / 4.0;
    const double v = std::abs(q) / area;
    const double re = v * diameter / nu;
    const double f = swamee_jain(roughness_m, diameter, re);
    return (q < 0 ? -1.0 : 1.0) * f * length / diameter * v * v / (2.0 * g);
}

}  // namespace pipenet::oracles
