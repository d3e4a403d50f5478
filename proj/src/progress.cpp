#include "ncse/progress.hpp"

#include <cmath>

#include "ncse/error.hpp"

namespace ncse {

Index stage_index(double t_seconds, double interval_s) {
  if (t_seconds < 0.0) throw Error(ErrorCode::NegativeTime, "stage_index needs t >= 0");
  if (interval_s <= 0.0) throw Error(ErrorCode::BadArgument, "interval must be positive");
  return static_cast<Index>(std::floor(t_seconds / interval_s));
}

Vec positional_encoding(Index k, Index d, double base) {
  if (d < 2 || d % 2 != 0) {
    throw Error(ErrorCode::OddDimension, "positional encoding needs an even dimension");
  }
  if (k < 0) throw Error(ErrorCode::NegativeTime, "stage index must be >= 0");
  Vec out(d);
  const double kd = static_cast<double>(k);
  for (Index i = 0; 2 * i < d; ++i) {
    const double freq = std::pow(base, static_cast<double>(2 * i) / static_cast<double>(d));
    out[2 * i] = std::sin(kd / freq);
    out[2 * i + 1] = std::cos(kd / freq);
  }
  return out;
}

Vec progress_embed(const Vec& state, double t_seconds, double interval_s,
                   double clip_duration_s, double base) {
  if (t_seconds < 0.0) throw Error(ErrorCode::NegativeTime, "progress_embed needs t >= 0");
  if (t_seconds >= clip_duration_s) return state;
  const Vec pe = positional_encoding(stage_index(t_seconds, interval_s), state.size(), base);
  return state + pe;
}

}  // namespace ncse
