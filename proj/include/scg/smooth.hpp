#pragma once

namespace scg {

// C-infinity transition: 0 for s <= 0, 1 for s >= 1.
double smooth_step(double s);

// 1 on |s| <= flat, 0 on |s| >= outer, smooth in between.
double plateau(double s, double flat, double outer);

// Rises on [a, b], equals 1 on [b, c], falls on [c, d].
double smooth_window(double s, double a, double b, double c, double d);

}  // namespace scg
