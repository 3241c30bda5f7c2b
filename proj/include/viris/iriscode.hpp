#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "viris/dataset.hpp"
#include "viris/normalize.hpp"

namespace viris {

/// Application-point grid: strip rows are averaged into `rows` bands and
/// each band is resampled to `cols` angular positions.
struct CodeGrid {
  int rows = 8;
  int cols = 336;

  void validate(const StripGeometry& strip = {}) const;
};

struct FilterBankParams {
  std::vector<double> wavelengths{18.0, 36.0, 72.0};
  double sigma_ratio = 0.5;
};

/// Log-Gabor transfer value at frequency f (cycles per sample), zero at DC.
double log_gabor(double f, double f0, double sigma_ratio);

/// One-sided frequency-domain kernels over a grid row.
struct FilterBank {
  std::vector<double> wavelengths;
  double sigma_ratio = 0.5;
  int length = 0;
  std::vector<Eigen::ArrayXd> kernels;

  int size() const { return static_cast<int>(kernels.size()); }
};

FilterBank build_bank(const CodeGrid& grid, const FilterBankParams& params = {});

/// Magnitudes below this floor yield fragile bits, which are masked.
inline constexpr double kFragileFloor = 1e-6;

/// Complex filter responses for one strip: [band][filter] rows of grid.cols
/// samples, plus per-band column validity.
struct FilterResponses {
  std::vector<std::vector<Eigen::ArrayXcd>> bands;
  std::vector<std::vector<bool>> valid;
};

FilterResponses filter_strip(const NormalizedStrip& strip, const FilterBank& bank, const CodeGrid& grid);

TemplateRecord encode(const NormalizedStrip& strip, const FilterBank& bank, const CodeGrid& grid);

/// Returns t with every grid column moved by k: out[c] = t[(c - k) mod cols].
TemplateRecord column_shift(const TemplateRecord& t, int k);

struct MatchScore {
  double hd = 1.0;
  int best_shift = 0;
  std::int64_t compared_bits = 0;
};

struct MatchPolicy {
  int max_shift = 14;
  /// Minimum jointly unmasked bits as a fraction of all bits.
  double min_bits_fraction = 0.2;
};

/// Template with each grid column packed into whole 64-bit words.
struct PackedTemplate {
  int rows = 0, cols = 0, n_filters = 0;
  int words_per_col = 0;
  std::vector<std::uint64_t> code;
  std::vector<std::uint64_t> mask;

  std::size_t bit_count() const { return static_cast<std::size_t>(rows) * cols * 2 * n_filters; }
};

PackedTemplate pack(const TemplateRecord& t);

/// Masked fractional Hamming distance minimised over circular column shifts;
/// ties go to the smallest |shift|, then the negative one.
MatchScore match(const PackedTemplate& a, const PackedTemplate& b, const MatchPolicy& policy = {});
MatchScore match(const TemplateRecord& a, const TemplateRecord& b, const MatchPolicy& policy = {});

}  // namespace viris
