#include "ecx/signal.hpp"

#include "ecx/error.hpp"
#include "ecx/rng.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>
#include <random>
#include <string>

namespace ecx {

Record::Record(std::vector<std::vector<double>> channels, double sample_rate_hz,
               std::string subject_id)
    : sample_rate_hz_(sample_rate_hz), subject_id_(std::move(subject_id)) {
  if (channels.empty()) throw ShapeError("record needs at least one channel");
  n_ = channels.front().size();
  d_ = channels.size();
  if (n_ < 2) throw ShapeError("record needs at least two samples per channel");
  if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
    throw BadParams("sample rate must be positive and finite");
  }
  data_.reserve(n_ * d_);
  for (std::size_t i = 0; i < d_; ++i) {
    if (channels[i].size() != n_) {
      throw ShapeError("channel " + std::to_string(i) + " has " +
                       std::to_string(channels[i].size()) + " samples, expected " +
                       std::to_string(n_));
    }
    for (double v : channels[i]) {
      if (!std::isfinite(v)) {
        throw BadParams("non-finite sample in channel " + std::to_string(i));
      }
    }
    data_.insert(data_.end(), channels[i].begin(), channels[i].end());
  }
}

Record Record::with_subject_id(std::string id) const {
  Record copy = *this;
  copy.subject_id_ = std::move(id);
  return copy;
}

void HolderParams::validate() const {
  if (!(l > 0.0)) throw BadParams("Hölder constant must be positive");
  if (!(p > 0.0 && p <= 1.0)) throw BadParams("Hölder exponent must lie in (0, 1]");
}

namespace {

std::vector<std::vector<double>> channels_of(const Record& record) {
  std::vector<std::vector<double>> out(record.channels());
  for (std::size_t i = 0; i < record.channels(); ++i) {
    auto ch = record.channel(i);
    out[i].assign(ch.begin(), ch.end());
  }
  return out;
}

std::mt19937_64 channel_engine(std::uint64_t seed, std::size_t channel) {
  return derive_engine(seed, channel);
}

// Planner calls are not thread-safe in FFTW; execution is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class FftPlan {
 public:
  explicit FftPlan(std::size_t m)
      : m_(m),
        buf_(static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * m))) {
    if (buf_ == nullptr) throw std::bad_alloc();
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(m), buf_, buf_, FFTW_FORWARD,
                             FFTW_ESTIMATE);
  }
  ~FftPlan() {
    {
      std::lock_guard lock(fftw_planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(buf_);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::complex<double>* data() { return reinterpret_cast<std::complex<double>*>(buf_); }
  std::size_t size() const { return m_; }
  void execute() { fftw_execute(plan_); }

 private:
  std::size_t m_;
  fftw_complex* buf_;
  fftw_plan plan_{};
};

double fgn_autocovariance(std::size_t lag, double hurst) {
  const double k = static_cast<double>(lag);
  const double h2 = 2.0 * hurst;
  return 0.5 * (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) +
                std::pow(std::abs(k - 1.0), h2));
}

// Davies-Harte: exact stationary Gaussian sequence with fGn covariance.
std::vector<double> fractional_gaussian_noise(std::size_t count, double hurst,
                                              std::mt19937_64& engine) {
  std::size_t half = 1;
  while (half < count) half <<= 1;
  const std::size_t m = 2 * half;

  FftPlan fft(m);
  auto* buf = fft.data();
  for (std::size_t j = 0; j <= half; ++j) buf[j] = fgn_autocovariance(j, hurst);
  for (std::size_t j = half + 1; j < m; ++j) buf[j] = buf[m - j];
  fft.execute();

  std::vector<double> scale(m);
  for (std::size_t k = 0; k < m; ++k) {
    // Embedding eigenvalues are nonnegative for fGn; clip rounding noise.
    scale[k] = std::sqrt(std::max(buf[k].real(), 0.0) / static_cast<double>(m));
  }

  std::normal_distribution<double> gauss;
  for (std::size_t k = 0; k < m; ++k) {
    const double re = gauss(engine);
    const double im = gauss(engine);
    buf[k] = scale[k] * std::complex<double>(re, im);
  }
  fft.execute();

  std::vector<double> out(count);
  for (std::size_t j = 0; j < count; ++j) out[j] = buf[j].real();
  return out;
}

}  // namespace

std::pair<Record, ChannelStats> normalize(const Record& record) {
  auto channels = channels_of(record);
  ChannelStats stats;
  stats.r.reserve(channels.size());
  for (std::size_t i = 0; i < channels.size(); ++i) {
    double r = 0.0;
    for (double v : channels[i]) r = std::max(r, std::abs(v));
    if (r == 0.0) {
      throw DegenerateChannel("channel " + std::to_string(i) + " of '" +
                              record.subject_id() + "' is identically zero");
    }
    for (double& v : channels[i]) v /= r;
    stats.r.push_back(r);
  }
  return {Record(std::move(channels), record.sample_rate_hz(), record.subject_id()),
          std::move(stats)};
}

Record difference(const Record& record, int order) {
  if (order < 1) throw BadParams("difference order must be >= 1");
  if (record.samples() <= static_cast<std::size_t>(order) + 1) {
    throw TooShort("record of " + std::to_string(record.samples()) +
                   " samples is too short for difference order " +
                   std::to_string(order));
  }
  auto channels = channels_of(record);
  for (auto& ch : channels) {
    for (int k = 0; k < order; ++k) {
      for (std::size_t t = 0; t + 1 < ch.size(); ++t) ch[t] = ch[t + 1] - ch[t];
      ch.pop_back();
    }
  }
  return Record(std::move(channels), record.sample_rate_hz(), record.subject_id());
}

double holder_ratio(const Record& record, double exponent, double max_lag) {
  const std::size_t n = record.samples();
  const double dt = 1.0 / static_cast<double>(n - 1);
  const auto max_steps = std::min<std::size_t>(
      n - 1, static_cast<std::size_t>(std::floor(max_lag / dt + 1e-9)));
  double worst = 0.0;
  for (std::size_t lag = 1; lag <= max_steps; ++lag) {
    const double denom = std::pow(static_cast<double>(lag) * dt, exponent);
    for (std::size_t t = 0; t + lag < n; ++t) {
      double sum = 0.0;
      for (std::size_t i = 0; i < record.channels(); ++i) {
        sum += std::abs(record.at(t + lag, i) - record.at(t, i));
      }
      worst = std::max(worst, sum / denom);
    }
  }
  return worst;
}

bool satisfies_holder(const Record& record, const HolderParams& params,
                      double max_lag) {
  params.validate();
  return holder_ratio(record, params.p, max_lag) <= params.l;
}

Record gen_weierstrass(std::size_t n, double a, int b, int terms) {
  if (n < 2) throw BadParams("weierstrass: n must be >= 2");
  // Keeps the integer phase products below 2^64.
  if (n > (std::size_t{1} << 31)) throw BadParams("weierstrass: n too large");
  if (!(a > 0.0 && a < 1.0)) throw BadParams("weierstrass: a must lie in (0, 1)");
  if (b < 2) throw BadParams("weierstrass: b must be an integer >= 2");
  if (!(a * b > 1.0)) throw BadParams("weierstrass: a * b must exceed 1");
  if (terms < 1) throw BadParams("weierstrass: terms must be >= 1");

  // cos(b^j pi k / (n-1)) = cos(pi r / (n-1)) with r = b^j k mod 2(n-1), so
  // the phase is reduced exactly in integers before touching floating point.
  const std::uint64_t period = 2 * static_cast<std::uint64_t>(n - 1);
  const double step = std::numbers::pi / static_cast<double>(n - 1);
  std::vector<double> x(n, 0.0);
  std::uint64_t bj = 1 % period;
  double aj = 1.0;
  for (int j = 0; j < terms; ++j) {
    for (std::size_t k = 0; k < n; ++k) {
      const std::uint64_t r = (bj * k) % period;
      x[k] += aj * std::cos(step * static_cast<double>(r));
    }
    bj = (bj * static_cast<std::uint64_t>(b)) % period;
    aj *= a;
  }
  return Record({std::move(x)}, static_cast<double>(n - 1), "weierstrass");
}

std::vector<double> seeded_gaussian(std::size_t count, std::uint64_t seed,
                                    std::size_t channel) {
  auto engine = channel_engine(seed, channel);
  std::normal_distribution<double> gauss;
  std::vector<double> out(count);
  for (double& v : out) v = gauss(engine);
  return out;
}

Record gen_fbm_like(std::size_t n, double hurst, std::uint64_t seed,
                    std::size_t channels) {
  if (n < 2) throw BadParams("fbm: n must be >= 2");
  if (!(hurst > 0.0 && hurst < 1.0)) throw BadParams("fbm: hurst must lie in (0, 1)");
  if (channels < 1) throw BadParams("fbm: channels must be >= 1");

  std::vector<std::vector<double>> out(channels);
  for (std::size_t c = 0; c < channels; ++c) {
    std::vector<double> increments;
    if (hurst == 0.5) {
      increments = seeded_gaussian(n - 1, seed, c);
    } else {
      auto engine = channel_engine(seed, c);
      increments = fractional_gaussian_noise(n - 1, hurst, engine);
    }
    auto& x = out[c];
    x.resize(n);
    x[0] = 0.0;
    for (std::size_t t = 1; t < n; ++t) x[t] = x[t - 1] + increments[t - 1];
  }
  return Record(std::move(out), static_cast<double>(n - 1), "fbm");
}

Record gen_polynomial(std::size_t n, int degree, std::span<const double> coeffs) {
  if (n < 2) throw BadParams("polynomial: n must be >= 2");
  if (degree < 0 || degree > 4) throw BadParams("polynomial: degree must lie in 0..4");
  if (coeffs.size() != static_cast<std::size_t>(degree) + 1) {
    throw BadParams("polynomial: expected degree + 1 coefficients");
  }
  std::vector<double> x(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / static_cast<double>(n - 1);
    double v = 0.0;
    for (auto c = coeffs.rbegin(); c != coeffs.rend(); ++c) v = v * t + *c;
    x[k] = v;
  }
  return Record({std::move(x)}, static_cast<double>(n - 1), "polynomial");
}

}  // namespace ecx
