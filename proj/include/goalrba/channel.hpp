#pragma once

// OFDMA uplink rate model. All RBs of one scheduling interval see the same
// per-ED power gain, so an ED's deliverable bits are linear in its RB count.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "goalrba/errors.hpp"
#include "goalrba/random.hpp"

namespace goalrba {

struct RbParams {
  double duration_s = 0.5e-3;   // t
  double bandwidth_hz = 180e3;  // B
  double noise_power_w = 1.0;   // B * sigma^2, stored as one quantity

  void validate() const {
    if (!(duration_s > 0) || !(bandwidth_hz > 0) || !(noise_power_w > 0)) {
      throw std::invalid_argument("RbParams: t, B and noise power must be > 0");
    }
  }
};

struct EdRadio {
  int ed_id = 0;
  double power_w = 1.0;
  double r_min_bits = 0.0;  // payload per scheduling interval

  void validate() const {
    if (!(power_w > 0)) throw std::invalid_argument("EdRadio: power must be > 0");
    if (!(r_min_bits >= 0)) throw std::invalid_argument("EdRadio: r_min must be >= 0");
  }
};

// 15 RBs per 0.5 ms slot over a 1 s interval.
inline constexpr std::int64_t kDefaultIntervalCapacity = 15 * 2000;

struct ChannelRealization {
  std::vector<double> gains;  // indexed by ed_id
  std::int64_t interval_rb_capacity = kDefaultIntervalCapacity;
};

// Bits one RB carries for an ED with power gain `gain`.
inline double rb_bits(double gain, const EdRadio& ed, const RbParams& rb) {
  if (gain < 0) throw std::invalid_argument("rb_bits: negative gain");
  return rb.duration_s * rb.bandwidth_hz *
         std::log2(1.0 + gain * ed.power_w / rb.noise_power_w);
}

inline double cumulative_bits(std::int64_t rb_count, double per_rb) {
  if (rb_count < 0) throw std::invalid_argument("cumulative_bits: negative RB count");
  return static_cast<double>(rb_count) * per_rb;
}

// Minimum RB count such that cumulative_bits(w, per_rb) >= r_min.
inline std::int64_t rb_demand(const EdRadio& ed, double per_rb) {
  if (!(per_rb > 0)) throw UnreachableError(ed.ed_id);
  if (ed.r_min_bits <= 0) return 0;
  auto w = static_cast<std::int64_t>(std::ceil(ed.r_min_bits / per_rb));
  // ceil of a rounded quotient can land one short of the true requirement.
  while (cumulative_bits(w, per_rb) < ed.r_min_bits) ++w;
  return w;
}

// Power gain g = a^2 with a ~ Rayleigh(scale 1), i.e. exponential with mean 2.
inline double sample_gain(Rng& rng) {
  const double u = uniform01(rng);
  const double amplitude = std::sqrt(-2.0 * std::log1p(-u));
  return amplitude * amplitude;
}

inline std::vector<double> sample_gains(Rng& rng, int num_eds) {
  if (num_eds < 1) throw std::invalid_argument("sample_gains: num_eds must be >= 1");
  std::vector<double> gains(static_cast<std::size_t>(num_eds));
  for (auto& g : gains) g = sample_gain(rng);
  return gains;
}

inline std::vector<double> sample_gains(std::uint64_t seed, int num_eds) {
  Rng rng(seed);
  return sample_gains(rng, num_eds);
}

}  // namespace goalrba
