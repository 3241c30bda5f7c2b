#include "viris/dataset.hpp"

#include <json.hpp>

#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

namespace viris {

using nlohmann::json;

Eye eye_from_letter(char c) {
  if (c == 'L') return Eye::Left;
  if (c == 'R') return Eye::Right;
  throw ParseError("eye", "eye must be L or R");
}

void validate(const SampleId& id) {
  if (id.subject.empty()) throw ParameterError("subject id must be non-empty");
  if (id.subject.find_first_of("-/\\") != std::string::npos)
    throw ParameterError("subject id must not contain '-' or path separators");
  if (id.session < 1) throw ParameterError("session id must be a positive integer");
  if (id.trial < 1) throw ParameterError("trial number must be a positive integer");
}

std::string sample_stem(const SampleId& id) {
  validate(id);
  return id.subject + "-" + eye_letter(id.eye) + std::to_string(id.session) + "-" + std::to_string(id.trial);
}

std::string format_filename(const SampleId& id) { return sample_stem(id) + ".png"; }

namespace {

int parse_positive(const std::string& text, const std::string& field) {
  if (text.empty()) throw ParseError(field, field + " is missing");
  for (char c : text)
    if (c < '0' || c > '9') throw ParseError(field, field + " must be numeric, got '" + text + "'");
  if (text[0] == '0') throw ParseError(field, field + " must be a positive integer without leading zeros");
  if (text.size() > 9) throw ParseError(field, field + " is out of range");
  return std::stoi(text);
}

}  // namespace

SampleId parse_stem(const std::string& stem) {
  const auto dash = stem.find('-');
  if (dash == std::string::npos || dash == 0) throw ParseError("subject", "missing subject id before '-'");
  SampleId id;
  id.subject = stem.substr(0, dash);
  const std::string rest = stem.substr(dash + 1);
  if (rest.empty()) throw ParseError("eye", "eye must be L or R");
  id.eye = eye_from_letter(rest[0]);
  const auto dash2 = rest.find('-');
  if (dash2 == std::string::npos) throw ParseError("trial", "missing '-<trial>' suffix");
  id.session = parse_positive(rest.substr(1, dash2 - 1), "session");
  id.trial = parse_positive(rest.substr(dash2 + 1), "trial");
  return id;
}

SampleId parse_filename(const std::string& name) {
  const std::string base = std::filesystem::path(name).filename().string();
  constexpr std::string_view ext = ".png";
  if (base.size() <= ext.size() || base.compare(base.size() - ext.size(), ext.size(), ext) != 0)
    throw ParseError("extension", "file name must end in .png: '" + base + "'");
  return parse_stem(base.substr(0, base.size() - ext.size()));
}

// ---------------------------------------------------------------------------
// Manifest

namespace {

[[noreturn]] void entry_error(std::size_t index, const std::string& field, const std::string& what) {
  throw ParseError(field, "manifest entry " + std::to_string(index) + ": field '" + field + "' " + what);
}

const json& require(const json& obj, std::size_t index, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) entry_error(index, key, "is missing");
  return *it;
}

std::string require_string(const json& obj, std::size_t index, const char* key) {
  const json& v = require(obj, index, key);
  if (!v.is_string() || v.get<std::string>().empty()) entry_error(index, key, "must be a non-empty string");
  return v.get<std::string>();
}

int require_positive(const json& obj, std::size_t index, const char* key) {
  const json& v = require(obj, index, key);
  if (!v.is_number_integer() || v.get<long long>() < 1) entry_error(index, key, "must be a positive integer");
  return v.get<int>();
}

std::optional<std::string> optional_string(const json& obj, std::size_t index, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string() || it->get<std::string>().empty()) entry_error(index, key, "must be a non-empty string");
  return it->get<std::string>();
}

std::optional<BBox> optional_bbox(const json& obj, std::size_t index, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_object()) entry_error(index, key, "must be an object {x0,y0,w,h}");
  BBox b;
  double* fields[] = {&b.x0, &b.y0, &b.w, &b.h};
  const char* names[] = {"x0", "y0", "w", "h"};
  for (int i = 0; i < 4; ++i) {
    auto f = it->find(names[i]);
    if (f == it->end() || !f->is_number()) entry_error(index, std::string(key) + "." + names[i], "must be a number");
    *fields[i] = f->get<double>();
  }
  if (!(b.w > 0) || !(b.h > 0)) entry_error(index, key, "must have positive w and h");
  return b;
}

json bbox_json(const BBox& b) { return json{{"x0", b.x0}, {"y0", b.y0}, {"w", b.w}, {"h", b.h}}; }

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
}

json parse_json(const std::string& text, const char* what) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(what, std::string(what) + " is not valid JSON: " + e.what());
  }
}

}  // namespace

std::vector<ManifestEntry> parse_manifest(const std::string& json_text) {
  const json doc = parse_json(json_text, "manifest");
  if (!doc.is_array()) throw ParseError("manifest", "manifest must be a JSON array");
  std::vector<ManifestEntry> entries;
  std::set<std::pair<SampleId, std::string>> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const json& obj = doc[i];
    if (!obj.is_object()) entry_error(i, "entry", "must be an object");
    ManifestEntry e;
    e.sample.subject = require_string(obj, i, "subject");
    const std::string eye = require_string(obj, i, "eye");
    if (eye != "L" && eye != "R") entry_error(i, "eye", "must be \"L\" or \"R\"");
    e.sample.eye = eye == "L" ? Eye::Left : Eye::Right;
    e.sample.session = require_positive(obj, i, "session");
    e.sample.trial = require_positive(obj, i, "trial");
    try {
      validate(e.sample);
    } catch (const ParameterError& err) {
      entry_error(i, "subject", err.what());
    }
    e.image_path = require_string(obj, i, "image");
    e.iris_mask_path = optional_string(obj, i, "iris_mask");
    e.pupil_mask_path = optional_string(obj, i, "pupil_mask");
    e.eye_bbox = optional_bbox(obj, i, "bbox");
    if (!seen.emplace(e.sample, e.image_path).second)
      entry_error(i, "image", "duplicates an earlier (sample, image) pair");
    entries.push_back(std::move(e));
  }
  return entries;
}

std::string serialize_manifest(const std::vector<ManifestEntry>& entries) {
  json doc = json::array();
  for (const auto& e : entries) {
    json obj{{"subject", e.sample.subject},
             {"eye", std::string(1, eye_letter(e.sample.eye))},
             {"session", e.sample.session},
             {"trial", e.sample.trial},
             {"image", e.image_path}};
    if (e.iris_mask_path) obj["iris_mask"] = *e.iris_mask_path;
    if (e.pupil_mask_path) obj["pupil_mask"] = *e.pupil_mask_path;
    if (e.eye_bbox) obj["bbox"] = bbox_json(*e.eye_bbox);
    doc.push_back(std::move(obj));
  }
  return doc.dump(2) + "\n";
}

std::vector<ManifestEntry> load_manifest(const std::filesystem::path& path) {
  std::vector<ManifestEntry> entries = parse_manifest(read_text(path));
  auto resolve = [&](std::string& p) {
    if (std::filesystem::path(p).is_relative()) p = (path.parent_path() / p).string();
  };
  for (auto& e : entries) {
    resolve(e.image_path);
    if (e.iris_mask_path) resolve(*e.iris_mask_path);
    if (e.pupil_mask_path) resolve(*e.pupil_mask_path);
  }
  return entries;
}

void save_manifest(const std::vector<ManifestEntry>& entries, const std::filesystem::path& path) {
  write_text(path, serialize_manifest(entries));
}

// ---------------------------------------------------------------------------
// Session files

FrameStream parse_session(const std::string& json_text) {
  const json doc = parse_json(json_text, "session");
  if (!doc.is_object()) throw ParseError("session", "session file must be a JSON object");
  FrameStream s;
  s.subject = require_string(doc, 0, "subject");
  s.session = require_positive(doc, 0, "session");
  const std::string eye = require_string(doc, 0, "eye");
  if (eye != "L" && eye != "R") throw ParseError("eye", "session eye must be \"L\" or \"R\"");
  s.eye = eye == "L" ? Eye::Left : Eye::Right;
  validate(SampleId{s.subject, s.eye, s.session, 1});
  const json& frames = require(doc, 0, "frames");
  if (!frames.is_array()) throw ParseError("frames", "frames must be an array");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    FrameRecord r;
    r.path = require_string(frames[i], i, "path");
    r.eye_bbox = optional_bbox(frames[i], i, "bbox");
    r.iris_bbox = optional_bbox(frames[i], i, "iris_bbox");
    s.frames.push_back(std::move(r));
  }
  if (s.frames.empty()) throw ParseError("frames", "session must list at least one frame");
  return s;
}

FrameStream load_session(const std::filesystem::path& path) {
  FrameStream s = parse_session(read_text(path));
  for (auto& f : s.frames) {
    std::filesystem::path p(f.path);
    if (p.is_relative()) f.path = (path.parent_path() / p).string();
  }
  return s;
}

// ---------------------------------------------------------------------------
// Template files

namespace {

constexpr std::uint8_t kTemplateVersion = 1;
constexpr std::size_t kHeaderSize = 4 + 1 + 2 + 2 + 1;

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void pack_bits(const std::vector<std::uint8_t>& bits, std::vector<std::uint8_t>& out) {
  const std::size_t start = out.size();
  out.resize(start + (bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) out[start + i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
}

std::vector<std::uint8_t> unpack_bits(const std::uint8_t* data, std::size_t n) {
  std::vector<std::uint8_t> bits(n);
  for (std::size_t i = 0; i < n; ++i) bits[i] = (data[i / 8] >> (7 - i % 8)) & 1u;
  return bits;
}

}  // namespace

std::vector<std::uint8_t> serialize_template(const TemplateRecord& rec) {
  using Kind = TemplateFormatError::Kind;
  if (rec.rows < 1 || rec.cols < 1 || rec.n_filters < 1 || rec.rows > 0xffff || rec.cols > 0xffff ||
      rec.n_filters > 0xff)
    throw TemplateFormatError(Kind::DimensionOverflow, "template dimensions do not fit the file header");
  if (rec.code_bits.size() != rec.bit_count() || rec.mask_bits.size() != rec.bit_count())
    throw ParameterError("template bit arrays do not match rows*cols*2*n_filters");
  std::vector<std::uint8_t> out = {'V', 'I', 'R', 'T', kTemplateVersion};
  put_u16(out, static_cast<std::uint16_t>(rec.rows));
  put_u16(out, static_cast<std::uint16_t>(rec.cols));
  out.push_back(static_cast<std::uint8_t>(rec.n_filters));
  pack_bits(rec.code_bits, out);
  pack_bits(rec.mask_bits, out);
  return out;
}

TemplateRecord deserialize_template(const std::vector<std::uint8_t>& bytes) {
  using Kind = TemplateFormatError::Kind;
  if (bytes.size() < 4 || bytes[0] != 'V' || bytes[1] != 'I' || bytes[2] != 'R' || bytes[3] != 'T')
    throw TemplateFormatError(Kind::BadMagic, "not a template file");
  if (bytes.size() < kHeaderSize) throw TemplateFormatError(Kind::Truncated, "template header is truncated");
  if (bytes[4] != kTemplateVersion)
    throw TemplateFormatError(Kind::BadVersion, "unsupported template version " + std::to_string(bytes[4]));
  TemplateRecord rec;
  rec.rows = bytes[5] | (bytes[6] << 8);
  rec.cols = bytes[7] | (bytes[8] << 8);
  rec.n_filters = bytes[9];
  if (rec.rows == 0 || rec.cols == 0 || rec.n_filters == 0)
    throw TemplateFormatError(Kind::DimensionOverflow, "template dimensions must be non-zero");
  const std::size_t n = rec.bit_count();
  const std::size_t packed = (n + 7) / 8;
  if (bytes.size() != kHeaderSize + 2 * packed)
    throw TemplateFormatError(Kind::Truncated, "template payload length " + std::to_string(bytes.size() - kHeaderSize) +
                                                   " does not match declared " + std::to_string(2 * packed));
  rec.code_bits = unpack_bits(bytes.data() + kHeaderSize, n);
  rec.mask_bits = unpack_bits(bytes.data() + kHeaderSize + packed, n);
  return rec;
}

void save_template(const TemplateRecord& rec, const std::filesystem::path& path) {
  const auto bytes = serialize_template(rec);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

TemplateRecord load_template(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  TemplateRecord rec = deserialize_template(bytes);
  try {
    rec.sample = parse_stem(path.stem().string());
  } catch (const ParseError&) {
    rec.sample.reset();
  }
  return rec;
}

}  // namespace viris
