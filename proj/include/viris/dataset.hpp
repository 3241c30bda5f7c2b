#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "viris/raster.hpp"

namespace viris {

enum class Eye { Left, Right };

inline char eye_letter(Eye e) { return e == Eye::Left ? 'L' : 'R'; }
Eye eye_from_letter(char c);

/// Identity of one capture: subject, eye, session and trial.
struct SampleId {
  std::string subject;
  Eye eye = Eye::Left;
  int session = 1;
  int trial = 1;

  friend bool operator==(const SampleId&, const SampleId&) = default;
  friend auto operator<=>(const SampleId&, const SampleId&) = default;
};

/// Throws ParameterError when the id cannot be rendered as a filename.
void validate(const SampleId& id);

/// "<subject>-<L|R><session>-<trial>" without extension.
std::string sample_stem(const SampleId& id);

/// "<subject>-<L|R><session>-<trial>.png"
std::string format_filename(const SampleId& id);

/// Inverse of format_filename; directory components are ignored.
/// Throws ParseError naming the offending field.
SampleId parse_filename(const std::string& name);

/// Parses a stem produced by sample_stem.
SampleId parse_stem(const std::string& stem);

struct ManifestEntry {
  SampleId sample;
  std::string image_path;
  std::optional<std::string> iris_mask_path;
  std::optional<std::string> pupil_mask_path;
  std::optional<BBox> eye_bbox;
};

/// Parsing and validation of the manifest JSON array; errors name the
/// entry index and field. Duplicate (sample, image) pairs are rejected.
std::vector<ManifestEntry> parse_manifest(const std::string& json_text);
std::string serialize_manifest(const std::vector<ManifestEntry>& entries);

/// Relative paths resolve against the manifest's directory.
std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path);
void save_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path);

/// One frame of a replayed capture session. Boxes are in detector-frame
/// coordinates (see SessionConfig::detector_width/height).
struct FrameRecord {
  std::string path;
  std::optional<BBox> eye_bbox;
  std::optional<BBox> iris_bbox;
};

struct FrameStream {
  std::string subject;
  int session = 1;
  Eye eye = Eye::Left;
  std::vector<FrameRecord> frames;
};

FrameStream parse_session(const std::string& json_text);
FrameStream load_session(const std::filesystem::path& path);

/// Binary iris code plus validity mask on a rows x cols x (2 n_filters)
/// grid. Bit (row, col, k) lives at index (row * cols + col) * 2 n_filters + k,
/// with k = 2 * filter + {0: real, 1: imaginary}. One byte per bit, 0 or 1.
struct TemplateRecord {
  std::optional<SampleId> sample;
  int rows = 0;
  int cols = 0;
  int n_filters = 0;
  std::vector<std::uint8_t> code_bits;
  std::vector<std::uint8_t> mask_bits;

  std::size_t bits_per_column() const { return 2 * static_cast<std::size_t>(n_filters); }
  std::size_t bit_count() const {
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols) * bits_per_column();
  }
  std::size_t index(int row, int col, int k) const {
    return (static_cast<std::size_t>(row) * cols + col) * bits_per_column() + k;
  }
};

/// Layout: "VIRT", u8 version = 1, u16 rows, u16 cols, u8 n_filters, code
/// bits then mask bits, each packed MSB-first and padded to a byte; little endian.
std::vector<std::uint8_t> serialize_template(const TemplateRecord& rec);
TemplateRecord deserialize_template(const std::vector<std::uint8_t>& bytes);

/// The file stem carries the sample identity when it parses as one.
void save_template(const TemplateRecord& rec, const std::filesystem::path& path);
TemplateRecord load_template(const std::filesystem::path& path);

inline constexpr const char* kTemplateExtension = ".virt";

}  // namespace viris
