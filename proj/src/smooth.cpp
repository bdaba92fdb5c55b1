#include "scg/smooth.hpp"

#include <cmath>

namespace scg {

double smooth_step(double s)
{
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    // e^{-1/s} / (e^{-1/s} + e^{-1/(1-s)}) without overflow
    const double z = 1.0 / s - 1.0 / (1.0 - s);
    if (z > 700.0) return 0.0;
    return 1.0 / (1.0 + std::exp(z));
}

double plateau(double s, double flat, double outer)
{
    const double a = std::abs(s);
    if (a <= flat) return 1.0;
    if (a >= outer) return 0.0;
    return 1.0 - smooth_step((a - flat) / (outer - flat));
}

double smooth_window(double s, double a, double b, double c, double d)
{
    if (s <= a || s >= d) return 0.0;
    return smooth_step((s - a) / (b - a)) * (1.0 - smooth_step((s - c) / (d - c)));
}

}  // namespace scg
