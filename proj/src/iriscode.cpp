#include "viris/iriscode.hpp"

#include <unsupported/Eigen/FFT>

#include <bit>
#include <cmath>

namespace viris {

void CodeGrid::validate(const StripGeometry& strip) const {
  if (rows < 1 || strip.height % rows != 0) throw ParameterError("code grid rows must divide the strip height");
  if (cols < 8 || cols > strip.width) throw ParameterError("code grid columns must lie in [8, strip width]");
}

double log_gabor(double f, double f0, double sigma_ratio) {
  if (f <= 0.0) return 0.0;
  const double num = std::log(f / f0);
  const double den = std::log(sigma_ratio);
  return std::exp(-(num * num) / (2.0 * den * den));
}

FilterBank build_bank(const CodeGrid& grid, const FilterBankParams& params) {
  if (params.wavelengths.empty()) throw ParameterError("filter bank needs at least one wavelength");
  if (!(params.sigma_ratio > 0.0 && params.sigma_ratio < 1.0)) throw ParameterError("sigma_ratio must lie in (0, 1)");
  for (std::size_t i = 0; i < params.wavelengths.size(); ++i) {
    const double w = params.wavelengths[i];
    if (!(w >= 4.0 && w <= grid.cols / 2.0))
      throw ParameterError("wavelength " + std::to_string(w) + " outside [4, grid width / 2]");
    if (i > 0 && !(w > params.wavelengths[i - 1])) throw ParameterError("wavelengths must be strictly increasing");
  }
  FilterBank bank{params.wavelengths, params.sigma_ratio, grid.cols, {}};
  const int n = grid.cols;
  for (double w : params.wavelengths) {
    Eigen::ArrayXd g = Eigen::ArrayXd::Zero(n);
    for (int k = 1; 2 * k < n; ++k) g(k) = log_gabor(static_cast<double>(k) / n, 1.0 / w, params.sigma_ratio);
    bank.kernels.push_back(std::move(g));
  }
  return bank;
}

FilterResponses filter_strip(const NormalizedStrip& strip, const FilterBank& bank, const CodeGrid& grid) {
  if (strip.texture.channels() != 1) throw ParameterError("encoding needs a single-channel strip");
  const int h = strip.height(), w = strip.width();
  grid.validate({w, h});
  if (bank.length != grid.cols) throw ParameterError("filter bank length differs from the grid width");
  if (!strip.validity.any()) throw ParameterError("no usable texture");

  const Plane<double>& tex = strip.texture.channel(0);
  const int band_h = h / grid.rows;
  Eigen::FFT<double> fft;
  FilterResponses out;
  for (int b = 0; b < grid.rows; ++b) {
    const auto rows = tex.middleRows(b * band_h, band_h);
    const auto valid = strip.validity.middleRows(b * band_h, band_h);
    const long n_valid = valid.count();
    const double fill = n_valid > 0 ? valid.select(rows, 0.0).sum() / n_valid : 0.0;
    const Plane<double> filled = valid.select(rows, fill);
    std::vector<double> profile(w);
    for (int x = 0; x < w; ++x) profile[x] = filled.col(x).mean();

    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, profile);
    std::vector<std::complex<double>> resampled(grid.cols, 0.0);
    const double scale = static_cast<double>(grid.cols) / w;
    for (int k = 0; 2 * k < grid.cols; ++k) {
      resampled[k] = scale * spectrum[k];
      if (k > 0) resampled[grid.cols - k] = scale * spectrum[w - k];
    }

    std::vector<bool> col_valid(grid.cols);
    for (int c = 0; c < grid.cols; ++c) {
      const int x0 = static_cast<int>((static_cast<long>(c) * w) / grid.cols);
      const int x1 = static_cast<int>((static_cast<long>(c + 1) * w + grid.cols - 1) / grid.cols);
      col_valid[c] = valid.middleCols(x0, x1 - x0).all();
    }
    out.valid.push_back(std::move(col_valid));

    std::vector<Eigen::ArrayXcd> per_filter;
    for (const auto& g : bank.kernels) {
      std::vector<std::complex<double>> filtered(grid.cols), resp;
      for (int k = 0; k < grid.cols; ++k) filtered[k] = g(k) * resampled[k];
      fft.inv(resp, filtered);
      per_filter.push_back(Eigen::Map<Eigen::ArrayXcd>(resp.data(), grid.cols));
    }
    out.bands.push_back(std::move(per_filter));
  }
  return out;
}

TemplateRecord encode(const NormalizedStrip& strip, const FilterBank& bank, const CodeGrid& grid) {
  const FilterResponses resp = filter_strip(strip, bank, grid);
  TemplateRecord t;
  t.rows = grid.rows;
  t.cols = grid.cols;
  t.n_filters = bank.size();
  t.code_bits.assign(t.bit_count(), 0);
  t.mask_bits.assign(t.bit_count(), 0);
  for (int r = 0; r < grid.rows; ++r)
    for (int f = 0; f < bank.size(); ++f)
      for (int c = 0; c < grid.cols; ++c) {
        const std::complex<double> z = resp.bands[r][f](c);
        const bool usable = resp.valid[r][c] && std::abs(z) >= kFragileFloor;
        const std::size_t re = t.index(r, c, 2 * f), im = t.index(r, c, 2 * f + 1);
        t.code_bits[re] = z.real() > 0.0;
        t.code_bits[im] = z.imag() > 0.0;
        t.mask_bits[re] = usable;
        t.mask_bits[im] = usable;
      }
  return t;
}

TemplateRecord column_shift(const TemplateRecord& t, int k) {
  TemplateRecord out = t;
  const int cols = t.cols;
  const std::size_t per_col = t.bits_per_column();
  for (int r = 0; r < t.rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int src = ((c - k) % cols + cols) % cols;
      for (std::size_t b = 0; b < per_col; ++b) {
        out.code_bits[t.index(r, c, static_cast<int>(b))] = t.code_bits[t.index(r, src, static_cast<int>(b))];
        out.mask_bits[t.index(r, c, static_cast<int>(b))] = t.mask_bits[t.index(r, src, static_cast<int>(b))];
      }
    }
  return out;
}

PackedTemplate pack(const TemplateRecord& t) {
  if (t.rows < 1 || t.cols < 1 || t.n_filters < 1) throw ParameterError("template has empty dimensions");
  if (t.code_bits.size() != t.bit_count() || t.mask_bits.size() != t.bit_count())
    throw ParameterError("template bit arrays do not match its dimensions");
  PackedTemplate p;
  p.rows = t.rows;
  p.cols = t.cols;
  p.n_filters = t.n_filters;
  const std::size_t per_col = static_cast<std::size_t>(t.rows) * t.bits_per_column();
  p.words_per_col = static_cast<int>((per_col + 63) / 64);
  p.code.assign(static_cast<std::size_t>(p.words_per_col) * t.cols, 0);
  p.mask.assign(p.code.size(), 0);
  for (int c = 0; c < t.cols; ++c) {
    std::size_t bit = 0;
    for (int r = 0; r < t.rows; ++r)
      for (std::size_t k = 0; k < t.bits_per_column(); ++k, ++bit) {
        const std::size_t src = t.index(r, c, static_cast<int>(k));
        const std::size_t word = static_cast<std::size_t>(c) * p.words_per_col + bit / 64;
        const std::uint64_t m = std::uint64_t{1} << (bit % 64);
        if (t.code_bits[src]) p.code[word] |= m;
        if (t.mask_bits[src]) p.mask[word] |= m;
      }
  }
  return p;
}

MatchScore match(const PackedTemplate& a, const PackedTemplate& b, const MatchPolicy& policy) {
  if (a.rows != b.rows || a.cols != b.cols || a.n_filters != b.n_filters)
    throw MatchError("templates have different grid dimensions or filter counts");
  if (policy.max_shift < 0) throw ParameterError("max_shift must be non-negative");
  if (!(policy.min_bits_fraction >= 0.0 && policy.min_bits_fraction <= 1.0))
    throw ParameterError("min_bits_fraction must lie in [0, 1]");
  const int cols = a.cols, wpc = a.words_per_col;
  const double min_bits = policy.min_bits_fraction * static_cast<double>(a.bit_count());

  bool found = false;
  std::int64_t best_diff = 0, best_n = 1;
  MatchScore best;
  for (int step = 0; step <= 2 * policy.max_shift; ++step) {
    const int s = step == 0 ? 0 : (step % 2 == 1 ? -(step + 1) / 2 : step / 2);
    std::int64_t diff = 0, n = 0;
    for (int c = 0; c < cols; ++c) {
      const int cb = ((c + s) % cols + cols) % cols;
      const std::uint64_t* ca = &a.code[static_cast<std::size_t>(c) * wpc];
      const std::uint64_t* ma = &a.mask[static_cast<std::size_t>(c) * wpc];
      const std::uint64_t* cb_code = &b.code[static_cast<std::size_t>(cb) * wpc];
      const std::uint64_t* cb_mask = &b.mask[static_cast<std::size_t>(cb) * wpc];
      for (int w = 0; w < wpc; ++w) {
        const std::uint64_t joint = ma[w] & cb_mask[w];
        n += std::popcount(joint);
        diff += std::popcount((ca[w] ^ cb_code[w]) & joint);
      }
    }
    if (n == 0 || static_cast<double>(n) < min_bits) continue;
    if (!found || diff * best_n < best_diff * n) {
      found = true;
      best_diff = diff;
      best_n = n;
      best = {static_cast<double>(diff) / static_cast<double>(n), s, n};
    }
  }
  if (!found) throw MatchError("insufficient overlap between templates");
  return best;
}

MatchScore match(const TemplateRecord& a, const TemplateRecord& b, const MatchPolicy& policy) {
  return match(pack(a), pack(b), policy);
}

}  // namespace viris
