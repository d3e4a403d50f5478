#pragma once

#include "ncse/types.hpp"

namespace ncse {

struct ProgressConfig {
  double interval_s = 0.5;   // stage length l
  double pe_base = 10000.0;  // positional-encoding base
};

// floor(t / interval_s); throws NegativeTime for t < 0.
Index stage_index(double t_seconds, double interval_s);

// Sinusoidal encoding: component 2i = sin(k / base^{2i/d}),
// component 2i+1 = cos(k / base^{2i/d}). d must be even. ||PE(k)||^2 = d/2.
Vec positional_encoding(Index k, Index d, double base = 10000.0);

// state + PE(floor(t/l)) while t < clip_duration_s; the plain state once the
// clip has run out (t >= L).
Vec progress_embed(const Vec& state, double t_seconds, double interval_s,
                   double clip_duration_s, double base = 10000.0);

}  // namespace ncse
