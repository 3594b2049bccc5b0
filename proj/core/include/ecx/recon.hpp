#pragma once

#include "ecx/signal.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace ecx {

// Retention fractions S (fraction of grid values kept), strictly decreasing.
struct RetentionGrid {
  std::vector<double> fractions{0.50, 0.33, 0.29, 0.25, 0.225, 0.20};

  void validate() const;
};

// All phase-shifted retained index sets for one retention fraction.
struct SubsamplePlan {
  double s = 0.5;
  std::size_t n = 0;
  std::vector<std::vector<std::size_t>> placements;  // each sorted ascending
};

enum class ErrorNorm { Sup, MeanAbsolute };

// Reconstruction family: local polynomials of degree 0..max_degree.
//
// A degree-p estimate at a discarded index uses the p + 1 + (window -
// max_degree - 1) retained points nearest to it. With the default window of
// max_degree + 1 this is exact interpolation through the p + 1 nearest
// points; a wider window turns each local fit into a least-squares fit.
struct MethodFamily {
  int max_degree = 4;
  int window = 5;
  ErrorNorm norm = ErrorNorm::Sup;

  void validate() const;
  std::size_t support(int degree) const {
    return static_cast<std::size_t>(degree + 1 + (window - max_degree - 1));
  }
};

struct SpectrumPoint {
  double s = 0.0;
  double eps = 0.0;
  std::vector<double> per_channel_eps;
};

// Retained indices for every phase 0..round(1/s)-1: phase + round(j / s) for
// j = 0, 1, ... while below n. Throws TooFewPoints when a placement keeps
// fewer than min_retained indices.
SubsamplePlan build_plan(double s, std::size_t n, std::size_t min_retained);

// Values at the discarded indices (ascending order) reconstructed by a local
// degree-`degree` polynomial on the nearest retained points; ties go to the
// lower index and the window shifts inward at the edges. Uses the default
// interpolation family (window = degree + 1).
std::vector<double> reconstruct_channel(std::span<const double> values,
                                        std::span<const std::size_t> placement,
                                        int degree);

// Same, under an explicit family (for wider least-squares windows).
std::vector<double> reconstruct_channel(std::span<const double> values,
                                        std::span<const std::size_t> placement,
                                        int degree, const MethodFamily& family);

// Error of one degree over the discarded indices, in the family's norm.
double channel_error(std::span<const double> values,
                     std::span<const std::size_t> placement, int degree,
                     const MethodFamily& family = {});

// Errors for every degree 0..max_degree in one pass; degrees whose support
// exceeds the placement are +infinity.
std::vector<double> family_errors(std::span<const double> values,
                                  std::span<const std::size_t> placement,
                                  const MethodFamily& family);

// Minimum of channel_error over the family. Throws InsufficientSupport if
// not even degree 0 can be fitted.
double min_error_over_family(std::span<const double> values,
                             std::span<const std::size_t> placement,
                             const MethodFamily& family);

// Mean over placements of the per-channel minimum error, summed over channels.
// The record is expected to be normalized.
SpectrumPoint spectrum_point(const Record& record, double s,
                             const MethodFamily& family);

}  // namespace ecx
