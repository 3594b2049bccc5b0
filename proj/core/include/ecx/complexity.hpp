#pragma once

#include "ecx/recon.hpp"
#include "ecx/signal.hpp"

#include <vector>

namespace ecx {

// Errors below this are treated as exact recovery and never reach a log.
inline constexpr double kEpsFloor = 1e-12;

struct ComplexitySpectrum {
  std::vector<SpectrumPoint> points;  // one per retention-grid entry
};

// Least-squares line log(eps) = a + b log(S), natural logs, fitted over the
// points above the eps floor. `used` flags which spectrum points entered the
// fit; residuals are listed for the used points in spectrum order.
struct ComplexityCoefficients {
  double a = 0.0;
  double b = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;
  std::vector<bool> used;
};

// Normalizes the record, then evaluates one spectrum point per grid entry.
// Throws FTrivialRecord when every eps falls below the floor.
ComplexitySpectrum compute_spectrum(const Record& record, const RetentionGrid& grid,
                                    const MethodFamily& family);

// Throws DegenerateFit when fewer than two points clear the floor.
ComplexityCoefficients fit_coefficients(const ComplexitySpectrum& spectrum);

// compute_spectrum + fit_coefficients. A spectrum with at most one usable
// point is reported as FTrivialRecord.
ComplexityCoefficients estimate(const Record& record, const RetentionGrid& grid,
                                const MethodFamily& family);

struct Estimate {
  ComplexitySpectrum spectrum;
  ComplexityCoefficients coefficients;
};

// estimate() keeping the spectrum, for plot-data output.
Estimate estimate_detailed(const Record& record, const RetentionGrid& grid,
                           const MethodFamily& family);

}  // namespace ecx
