#pragma once

// Synthetic 2063-track dataset with the reference shape: same
// class imbalance, popularity calibrated to min 0 / max 82 / mean ~25, and a
// planted hit signal so learned models can beat the majority baseline.
//
// Every draw comes from SplitMix64(seed) in row order. Per row:
//
//   role        first `hits` entries of a shuffled 0..n-1 are hits
//   popularity  non-hit: min(t, floor((t+1) u^1.2326))      (t = threshold)
//               hit:     t+1 + floor((82-t) u^3.118), capped at 82
//               the first non-hit is pinned to 0, the first hit to 82
//   danceability hit N(0.82, 0.04)   non-hit N(0.62, 0.13)   clipped to [0,1]
//   energy       hit N(0.78, 0.05)   non-hit N(0.60, 0.14)   clipped to [0,1]
//   tempo        hit N(104, 4)       non-hit N(112, 22)      clipped to [60,200]
//   key          -1 with p 0.03, else uniform 0..11
//   loudness     N(-6.5, 2.5) clipped to [-60, 0]
//   mode         Bernoulli(0.55)
//   speechiness  0.03 + 0.40 u^3
//   acousticness u^2.5
//   instrumentalness 0.02 u^4
//   liveness     0.05 + 0.60 u^2.5
//   valence      N(0.65, 0.18) clipped to [0,1]
//   duration_ms  round(N(205000, 40000)) clipped to [90000, 480000]
//   time_signature 4 (p 0.92), 3 (p 0.05), 5 (p 0.03)
//   release_year 2010 + uniform 0..13

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "hitpredict/error.hpp"
#include "hitpredict/random.hpp"
#include "hitpredict/track.hpp"

namespace hitpredict {

inline constexpr std::size_t kReferenceRows = 2063;
inline constexpr std::size_t kReferenceHits = 237;
inline constexpr int kMaxPopularity = 82;

struct SynthOptions {
  std::size_t n = kReferenceRows;
  std::size_t hits = kReferenceHits;
  std::uint64_t seed = 0;
  int threshold = kDefaultHitThreshold;
};

struct SynthDataset {
  std::vector<TrackRecord> records;
  Labels labels;
};

inline SynthDataset synthesize(const SynthOptions& opt) {
  if (!(opt.hits > 0 && opt.hits < opt.n))
    throw ValidationError("synth needs 0 < hits < n, got hits=" + std::to_string(opt.hits) +
                          " n=" + std::to_string(opt.n));
  if (opt.threshold < 0 || opt.threshold >= kMaxPopularity)
    throw ValidationError("synth threshold must lie in [0, 81]");

  SplitMix64 rng(opt.seed);
  std::vector<std::size_t> order(opt.n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  std::vector<char> is_hit(opt.n, 0);
  for (std::size_t k = 0; k < opt.hits; ++k) is_hit[order[k]] = 1;

  auto clip = [](double v, double lo, double hi) { return std::clamp(v, lo, hi); };
  const int t = opt.threshold;
  bool pinned_low = false, pinned_high = false;

  SynthDataset out;
  out.records.reserve(opt.n);
  out.labels.reserve(opt.n);
  for (std::size_t i = 0; i < opt.n; ++i) {
    const bool hit = is_hit[i] != 0;
    TrackRecord r;
    char buf[64];
    std::snprintf(buf, sizeof buf, "syn-%06zu", i + 1);
    r.track_id = buf;
    std::snprintf(buf, sizeof buf, "Synthetic Song %04zu", i + 1);
    r.title = buf;
    std::snprintf(buf, sizeof buf, "Synthetic Artist %03u", static_cast<unsigned>(rng.below(400)));
    r.artist = buf;
    r.release_year = 2010 + static_cast<int>(rng.below(14));

    if (hit) {
      const int span = kMaxPopularity - t;
      r.popularity = std::min(kMaxPopularity,
                              t + 1 + static_cast<int>(std::floor(span * std::pow(rng.uniform01(), 3.118))));
      if (!pinned_high) r.popularity = kMaxPopularity, pinned_high = true;
    } else {
      r.popularity = std::min(t, static_cast<int>(std::floor((t + 1) * std::pow(rng.uniform01(), 1.2326))));
      if (!pinned_low) r.popularity = 0, pinned_low = true;
    }

    r.danceability = clip(hit ? rng.normal(0.82, 0.04) : rng.normal(0.62, 0.13), 0.0, 1.0);
    r.energy = clip(hit ? rng.normal(0.78, 0.05) : rng.normal(0.60, 0.14), 0.0, 1.0);
    r.tempo = clip(hit ? rng.normal(104.0, 4.0) : rng.normal(112.0, 22.0), 60.0, 200.0);
    r.key = rng.bernoulli(0.03) ? -1 : static_cast<int>(rng.below(12));
    r.loudness = clip(rng.normal(-6.5, 2.5), -60.0, 0.0);
    r.mode = rng.bernoulli(0.55) ? 1 : 0;
    r.speechiness = 0.03 + 0.40 * std::pow(rng.uniform01(), 3.0);
    r.acousticness = std::pow(rng.uniform01(), 2.5);
    r.instrumentalness = 0.02 * std::pow(rng.uniform01(), 4.0);
    r.liveness = 0.05 + 0.60 * std::pow(rng.uniform01(), 2.5);
    r.valence = clip(rng.normal(0.65, 0.18), 0.0, 1.0);
    r.duration_ms = static_cast<std::int64_t>(std::llround(clip(rng.normal(205000.0, 40000.0), 90000.0, 480000.0)));
    const double ts = rng.uniform01();
    r.time_signature = ts < 0.92 ? 4 : (ts < 0.97 ? 3 : 5);

    out.labels.push_back(label_hit(r.popularity, t));
    out.records.push_back(std::move(r));
  }
  return out;
}

}  // namespace hitpredict
