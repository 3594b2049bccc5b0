#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ecx {

// A sampled multichannel record: n samples (rows) of d channels on a uniform
// time grid. Stored channel-major so each channel is a contiguous span.
// Immutable after construction; the constructor enforces n >= 2, d >= 1 and
// finite values.
class Record {
 public:
  Record(std::vector<std::vector<double>> channels, double sample_rate_hz,
         std::string subject_id = {});

  std::size_t samples() const noexcept { return n_; }
  std::size_t channels() const noexcept { return d_; }
  double sample_rate_hz() const noexcept { return sample_rate_hz_; }
  const std::string& subject_id() const noexcept { return subject_id_; }

  std::span<const double> channel(std::size_t i) const {
    return {data_.data() + i * n_, n_};
  }
  double at(std::size_t t, std::size_t ch) const { return data_[ch * n_ + t]; }

  Record with_subject_id(std::string id) const;

  friend bool operator==(const Record&, const Record&) = default;

 private:
  Record() = default;

  std::size_t n_ = 0;
  std::size_t d_ = 0;
  double sample_rate_hz_ = 1.0;
  std::string subject_id_;
  std::vector<double> data_;
};

// Per-channel maximum absolute value R_i of the original record.
struct ChannelStats {
  std::vector<double> r;
};

// Hölder condition sum_i |x_i(t) - x_i(s)| <= l * |t - s|^p on t in [0, 1].
struct HolderParams {
  double l = 1.0;
  double p = 1.0;

  void validate() const;
};

// Divides every channel by its max absolute value. Throws DegenerateChannel
// if a channel is identically zero.
std::pair<Record, ChannelStats> normalize(const Record& record);

// k-fold iterated first difference x(t+1) - x(t), channel-wise. Unscaled by
// the sample rate. Throws TooShort unless n > k + 1, so at least two rows remain.
Record difference(const Record& record, int order);

// Largest observed ratio sum_i |x_i(t) - x_i(s)| / |t - s|^exponent over grid
// pairs with 0 < |t - s| <= max_lag (time measured on [0, 1]).
double holder_ratio(const Record& record, double exponent, double max_lag);

// True when every grid pair within max_lag satisfies the Hölder bound.
bool satisfies_holder(const Record& record, const HolderParams& params,
                      double max_lag);

// sum_{j < terms} a^j cos(b^j pi t) on n points of [0, 1]. Requires
// 0 < a < 1, integer b >= 2 with a * b > 1, terms >= 1 and n >= 2.
Record gen_weierstrass(std::size_t n, double a, int b, int terms);

// Standard normal draws for (seed, channel). These are exactly the increments
// gen_fbm_like uses at hurst = 0.5.
std::vector<double> seeded_gaussian(std::size_t count, std::uint64_t seed,
                                    std::size_t channel);

// Fractional Brownian motion sampled on n points of [0, 1]: cumulative sums
// of fractional Gaussian noise synthesised by circulant embedding. Each
// channel draws from its own (seed, channel) stream.
Record gen_fbm_like(std::size_t n, double hurst, std::uint64_t seed,
                    std::size_t channels);

// Polynomial sum_j coeffs[j] t^j on n points of [0, 1]; degree <= 4.
Record gen_polynomial(std::size_t n, int degree, std::span<const double> coeffs);

}  // namespace ecx
