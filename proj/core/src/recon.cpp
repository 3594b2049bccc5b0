#include "ecx/recon.hpp"

#include "ecx/error.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

namespace ecx {

namespace {

constexpr int kMaxDegree = 8;
constexpr int kMaxWindow = 64;

void check_placement(std::span<const std::size_t> placement, std::size_t n) {
  for (std::size_t i = 0; i < placement.size(); ++i) {
    if (placement[i] >= n) throw BadParams("placement index out of range");
    if (i > 0 && placement[i] <= placement[i - 1]) {
      throw BadParams("placement must be strictly increasing");
    }
  }
}

// Greedily collects up to `count` retained indices nearest to t, ties to the
// lower index. `next` is the position of the first retained index above t.
// Nearest sets for smaller counts are prefixes of the result.
std::size_t nearest_retained(std::span<const std::size_t> retained, std::size_t next,
                             std::size_t t, std::size_t count,
                             std::array<std::size_t, kMaxWindow>& out) {
  std::ptrdiff_t left = static_cast<std::ptrdiff_t>(next) - 1;
  std::size_t right = next;
  std::size_t taken = 0;
  while (taken < count) {
    const bool has_left = left >= 0;
    const bool has_right = right < retained.size();
    if (!has_left && !has_right) break;
    bool take_left = has_left;
    if (has_left && has_right) {
      take_left = t - retained[static_cast<std::size_t>(left)] <= retained[right] - t;
    }
    out[taken++] = take_left ? retained[static_cast<std::size_t>(left--)]
                             : retained[right++];
  }
  return taken;
}

// Least-squares degree-p estimate at offset 0 from nodes recentred on t.
double local_least_squares(std::span<const double> values,
                           std::span<const std::size_t> nodes, std::size_t t,
                           int degree) {
  const auto m = static_cast<Eigen::Index>(nodes.size());
  double scale = 0.0;
  for (auto node : nodes) {
    scale = std::max(scale, std::abs(static_cast<double>(node) - static_cast<double>(t)));
  }
  Eigen::MatrixXd design(m, degree + 1);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto node = nodes[static_cast<std::size_t>(i)];
    const double u = (static_cast<double>(node) - static_cast<double>(t)) / scale;
    double power = 1.0;
    for (int j = 0; j <= degree; ++j) {
      design(i, j) = power;
      power *= u;
    }
    rhs(i) = values[node];
  }
  const Eigen::VectorXd coef = design.colPivHouseholderQr().solve(rhs);
  return coef(0);
}

// Calls visit(t, estimates, available) for every discarded index t, where
// estimates[p] is the degree-p reconstruction for p < available.
template <class Visit>
void for_each_estimate(std::span<const double> values,
                       std::span<const std::size_t> retained,
                       const MethodFamily& family, Visit&& visit) {
  const std::size_t n = values.size();
  const std::size_t degrees = static_cast<std::size_t>(family.max_degree) + 1;
  const std::size_t widest = family.support(family.max_degree);
  const bool interpolating = family.window == family.max_degree + 1;

  std::array<std::size_t, kMaxWindow> nodes{};
  std::array<double, kMaxDegree + 1> estimates{};
  std::array<double, kMaxWindow> offset{};
  std::array<double, kMaxWindow> tail{};

  std::size_t next = 0;
  for (std::size_t t = 0; t < n; ++t) {
    if (next < retained.size() && retained[next] == t) {
      ++next;
      continue;
    }
    const std::size_t found = nearest_retained(retained, next, t, widest, nodes);

    std::size_t available = 0;
    if (interpolating) {
      // Incremental Newton divided differences on offsets node - t; adding
      // the k-th nearest node raises the degree by one.
      double product = 1.0;
      double estimate = 0.0;
      for (std::size_t k = 0; k < found; ++k) {
        offset[k] = static_cast<double>(nodes[k]) - static_cast<double>(t);
        tail[k] = values[nodes[k]];
        for (std::size_t j = k; j-- > 0;) {
          tail[j] = (tail[j + 1] - tail[j]) / (offset[k] - offset[j]);
        }
        estimate = k == 0 ? tail[0] : estimate + tail[0] * product;
        product *= -offset[k];
        estimates[k] = estimate;
      }
      available = found;
    } else {
      for (std::size_t p = 0; p < degrees; ++p) {
        const std::size_t need = family.support(static_cast<int>(p));
        if (need > found) break;
        estimates[p] = local_least_squares(values, {nodes.data(), need}, t,
                                           static_cast<int>(p));
        available = p + 1;
      }
    }
    visit(t, std::span<const double>(estimates.data(), available));
  }
}

MethodFamily interpolation_family(int degree) {
  MethodFamily family;
  family.max_degree = degree;
  family.window = degree + 1;
  return family;
}

}  // namespace

void RetentionGrid::validate() const {
  if (fractions.empty()) throw BadParams("retention grid is empty");
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    const double s = fractions[i];
    if (!(s > 0.0 && s < 1.0)) {
      throw BadParams("retention fraction " + std::to_string(s) + " outside (0, 1)");
    }
    if (i > 0 && !(s < fractions[i - 1])) {
      throw BadParams("retention grid must be strictly decreasing");
    }
  }
}

void MethodFamily::validate() const {
  if (max_degree < 0 || max_degree > kMaxDegree) {
    throw BadParams("max_degree must lie in 0.." + std::to_string(kMaxDegree));
  }
  if (window < max_degree + 1 || window > kMaxWindow) {
    throw BadParams("window must lie in max_degree+1.." + std::to_string(kMaxWindow));
  }
}

SubsamplePlan build_plan(double s, std::size_t n, std::size_t min_retained) {
  if (!(s > 0.0 && s < 1.0)) throw BadParams("retention fraction must lie in (0, 1)");
  if (n < 2) throw BadParams("plan needs at least two grid points");

  SubsamplePlan plan;
  plan.s = s;
  plan.n = n;
  const auto phases = std::max<long long>(1, std::llround(1.0 / s));
  for (long long phase = 0; phase < phases; ++phase) {
    std::vector<std::size_t> kept;
    for (long long j = 0;; ++j) {
      const long long idx = phase + std::llround(static_cast<double>(j) / s);
      if (idx >= static_cast<long long>(n)) break;
      if (kept.empty() || kept.back() != static_cast<std::size_t>(idx)) {
        kept.push_back(static_cast<std::size_t>(idx));
      }
    }
    if (kept.size() < std::max<std::size_t>(min_retained, 1)) {
      throw TooFewPoints("S=" + std::to_string(s) + " on " + std::to_string(n) +
                         " points keeps " + std::to_string(kept.size()) +
                         " values, need " + std::to_string(min_retained));
    }
    plan.placements.push_back(std::move(kept));
  }
  return plan;
}

std::vector<double> reconstruct_channel(std::span<const double> values,
                                        std::span<const std::size_t> placement,
                                        int degree) {
  if (degree < 0 || degree > kMaxDegree) throw BadParams("degree out of range");
  return reconstruct_channel(values, placement, degree, interpolation_family(degree));
}

std::vector<double> reconstruct_channel(std::span<const double> values,
                                        std::span<const std::size_t> placement,
                                        int degree, const MethodFamily& family) {
  family.validate();
  if (degree < 0 || degree > family.max_degree) {
    throw BadParams("degree exceeds the family's max_degree");
  }
  check_placement(placement, values.size());
  if (placement.size() < family.support(degree)) {
    throw InsufficientSupport("degree " + std::to_string(degree) + " needs " +
                              std::to_string(family.support(degree)) +
                              " retained points, placement has " +
                              std::to_string(placement.size()));
  }
  std::vector<double> out;
  out.reserve(values.size() - placement.size());
  for_each_estimate(values, placement, family,
                    [&](std::size_t, std::span<const double> est) {
                      out.push_back(est[static_cast<std::size_t>(degree)]);
                    });
  return out;
}

std::vector<double> family_errors(std::span<const double> values,
                                  std::span<const std::size_t> placement,
                                  const MethodFamily& family) {
  family.validate();
  check_placement(placement, values.size());
  const std::size_t degrees = static_cast<std::size_t>(family.max_degree) + 1;
  std::vector<double> err(degrees, 0.0);
  std::size_t discarded = 0;
  for_each_estimate(values, placement, family,
                    [&](std::size_t t, std::span<const double> est) {
                      ++discarded;
                      for (std::size_t p = 0; p < est.size(); ++p) {
                        const double e = std::abs(values[t] - est[p]);
                        if (family.norm == ErrorNorm::Sup) {
                          err[p] = std::max(err[p], e);
                        } else {
                          err[p] += e;
                        }
                      }
                    });
  for (std::size_t p = 0; p < degrees; ++p) {
    if (placement.size() < family.support(static_cast<int>(p))) {
      err[p] = std::numeric_limits<double>::infinity();
    } else if (family.norm == ErrorNorm::MeanAbsolute && discarded > 0) {
      err[p] /= static_cast<double>(discarded);
    }
  }
  return err;
}

double channel_error(std::span<const double> values,
                     std::span<const std::size_t> placement, int degree,
                     const MethodFamily& family) {
  if (degree < 0 || degree > family.max_degree) {
    throw BadParams("degree exceeds the family's max_degree");
  }
  if (placement.size() < family.support(degree)) {
    throw InsufficientSupport("degree " + std::to_string(degree) +
                              " is not supported by the placement");
  }
  return family_errors(values, placement, family)[static_cast<std::size_t>(degree)];
}

double min_error_over_family(std::span<const double> values,
                             std::span<const std::size_t> placement,
                             const MethodFamily& family) {
  if (placement.size() < family.support(0)) {
    throw InsufficientSupport("placement cannot support even a degree-0 fit");
  }
  const auto err = family_errors(values, placement, family);
  return *std::min_element(err.begin(), err.end());
}

SpectrumPoint spectrum_point(const Record& record, double s,
                             const MethodFamily& family) {
  family.validate();
  const auto plan = build_plan(s, record.samples(), family.support(family.max_degree));
  SpectrumPoint point;
  point.s = s;
  point.per_channel_eps.reserve(record.channels());
  for (std::size_t i = 0; i < record.channels(); ++i) {
    double sum = 0.0;
    for (const auto& placement : plan.placements) {
      sum += min_error_over_family(record.channel(i), placement, family);
    }
    point.per_channel_eps.push_back(sum / static_cast<double>(plan.placements.size()));
  }
  for (double e : point.per_channel_eps) point.eps += e;
  return point;
}

}  // namespace ecx
