#include "ecx/complexity.hpp"

#include "ecx/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ecx {

ComplexitySpectrum compute_spectrum(const Record& record, const RetentionGrid& grid,
                                    const MethodFamily& family) {
  grid.validate();
  family.validate();
  const auto normalized = normalize(record).first;

  ComplexitySpectrum spectrum;
  spectrum.points.reserve(grid.fractions.size());
  bool any_above_floor = false;
  for (double s : grid.fractions) {
    spectrum.points.push_back(spectrum_point(normalized, s, family));
    any_above_floor = any_above_floor || spectrum.points.back().eps >= kEpsFloor;
  }
  if (!any_above_floor) {
    throw FTrivialRecord("'" + record.subject_id() +
                         "' is recovered exactly at every retention fraction");
  }
  return spectrum;
}

ComplexityCoefficients fit_coefficients(const ComplexitySpectrum& spectrum) {
  ComplexityCoefficients fit;
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& p : spectrum.points) {
    const bool usable = p.eps >= kEpsFloor && p.s > 0.0;
    fit.used.push_back(usable);
    if (usable) {
      xs.push_back(std::log(p.s));
      ys.push_back(std::log(p.eps));
    }
  }
  if (xs.size() < 2) {
    throw DegenerateFit("need at least two spectrum points above the eps floor, have " +
                        std::to_string(xs.size()));
  }

  const double m = static_cast<double>(xs.size());
  double x_mean = 0.0;
  double y_mean = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    x_mean += xs[i];
    y_mean += ys[i];
  }
  x_mean /= m;
  y_mean /= m;

  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - x_mean;
    const double dy = ys[i] - y_mean;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw DegenerateFit("retention fractions are all equal");

  fit.b = sxy / sxx;
  fit.a = y_mean - fit.b * x_mean;

  double ss_res = 0.0;
  fit.residuals.reserve(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - (fit.a + fit.b * xs[i]);
    fit.residuals.push_back(r);
    ss_res += r * r;
  }
  // A flat spectrum is fitted perfectly by b = 0.
  fit.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - ss_res / syy) : 1.0;
  return fit;
}

Estimate estimate_detailed(const Record& record, const RetentionGrid& grid,
                           const MethodFamily& family) {
  Estimate out;
  out.spectrum = compute_spectrum(record, grid, family);
  try {
    out.coefficients = fit_coefficients(out.spectrum);
  } catch (const DegenerateFit&) {
    throw FTrivialRecord("'" + record.subject_id() +
                         "' leaves fewer than two spectrum points above the eps floor");
  }
  return out;
}

ComplexityCoefficients estimate(const Record& record, const RetentionGrid& grid,
                                const MethodFamily& family) {
  return estimate_detailed(record, grid, family).coefficients;
}

}  // namespace ecx
