#include "ppc/io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <string_view>

namespace ppc {
namespace io {

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec) || ec) throw FileNotFound(path.string());
  if (!std::filesystem::is_regular_file(path, ec) || ec)
    throw IoError(path.string() + ": not a regular file");

  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open for reading");
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError(path.string() + ": read failure");
  return data;
}

// Walks a text buffer line by line, tracking the 1-based line number and the
// absolute byte offset of each line start for error reports.
struct LineCursor {
  std::string_view data;
  std::size_t pos = 0;
  std::size_t line = 0;  // number of the line last returned

  bool eof() const { return pos >= data.size(); }

  std::string_view next(std::size_t& start_offset) {
    start_offset = pos;
    ++line;
    const std::size_t nl = data.find('\n', pos);
    std::string_view out;
    if (nl == std::string_view::npos) {
      out = data.substr(pos);
      pos = data.size();
    } else {
      out = data.substr(pos, nl - pos);
      pos = nl + 1;
    }
    if (!out.empty() && out.back() == '\r') out.remove_suffix(1);
    return out;
  }
};

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\v' || c == '\f'; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

struct Token {
  std::string_view text;
  std::size_t offset;  // absolute byte offset of the first character
};

std::vector<Token> split_whitespace(std::string_view line, std::size_t line_offset) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    const std::size_t start = i;
    while (i < line.size() && !is_space(line[i])) ++i;
    if (i > start) out.push_back({line.substr(start, i - start), line_offset + start});
  }
  return out;
}

std::vector<Token> split_commas(std::string_view line, std::size_t line_offset) {
  std::vector<Token> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? line.size() : comma;
    const std::string_view field = line.substr(start, end - start);
    const std::string_view trimmed = trim(field);
    // offset points at the first non-space character when there is one
    std::size_t field_offset = line_offset + start;
    if (!trimmed.empty()) field_offset += static_cast<std::size_t>(trimmed.data() - field.data());
    out.push_back({trimmed, field_offset});
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_coordinate(const Token& token, std::size_t line) {
  double value = 0.0;
  const char* first = token.text.data();
  const char* last = first + token.text.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last)
    throw ParseError(line, token.offset, "expected a number, got '" + std::string(token.text) + "'");
  if (!std::isfinite(value))
    throw ParseError(line, token.offset, "non-finite coordinate");
  return value;
}

bool parses_as_number(std::string_view text) {
  double value = 0.0;
  const char* first = text.data();
  const auto [ptr, ec] = std::from_chars(first, first + text.size(), value);
  return ec == std::errc{} && ptr == first + text.size();
}

CloudData parse_xyz(std::string_view data) {
  CloudData out;
  LineCursor cursor{data};
  while (!cursor.eof()) {
    std::size_t offset;
    const std::string_view raw = cursor.next(offset);
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const std::vector<Token> tokens = split_whitespace(raw, offset);
    if (tokens.size() != 3)
      throw ParseError(cursor.line, offset,
                       "expected 3 coordinates, got " + std::to_string(tokens.size()));
    out.cloud.points.emplace_back(parse_coordinate(tokens[0], cursor.line),
                                  parse_coordinate(tokens[1], cursor.line),
                                  parse_coordinate(tokens[2], cursor.line));
  }
  if (out.cloud.empty()) throw EmptyCloud();
  return out;
}

CloudData parse_csv(std::string_view data) {
  CloudData out;
  LineCursor cursor{data};
  bool first_content_line = true;
  while (!cursor.eof()) {
    std::size_t offset;
    const std::string_view raw = cursor.next(offset);
    if (trim(raw).empty()) continue;
    const std::vector<Token> tokens = split_commas(raw, offset);
    if (first_content_line) {
      first_content_line = false;
      // Only the first content line may be a header; it is one exactly when
      // its first field is not a number.
      if (!tokens.empty() && !parses_as_number(tokens[0].text)) continue;
    }
    if (tokens.size() != 3)
      throw ParseError(cursor.line, offset,
                       "expected 3 fields, got " + std::to_string(tokens.size()));
    out.cloud.points.emplace_back(parse_coordinate(tokens[0], cursor.line),
                                  parse_coordinate(tokens[1], cursor.line),
                                  parse_coordinate(tokens[2], cursor.line));
  }
  if (out.cloud.empty()) throw EmptyCloud();
  return out;
}

enum class PlyType { INT8, UINT8, INT16, UINT16, INT32, UINT32, FLOAT32, FLOAT64 };

struct PlyProperty {
  PlyType type;
  std::size_t size;
  std::string name;
};

std::optional<std::pair<PlyType, std::size_t>> ply_type_from(std::string_view name) {
  if (name == "char" || name == "int8") return {{PlyType::INT8, 1}};
  if (name == "uchar" || name == "uint8") return {{PlyType::UINT8, 1}};
  if (name == "short" || name == "int16") return {{PlyType::INT16, 2}};
  if (name == "ushort" || name == "uint16") return {{PlyType::UINT16, 2}};
  if (name == "int" || name == "int32") return {{PlyType::INT32, 4}};
  if (name == "uint" || name == "uint32") return {{PlyType::UINT32, 4}};
  if (name == "float" || name == "float32") return {{PlyType::FLOAT32, 4}};
  if (name == "double" || name == "float64") return {{PlyType::FLOAT64, 8}};
  return std::nullopt;
}

struct PlyHeader {
  bool binary = false;
  std::size_t vertex_count = 0;
  std::vector<PlyProperty> properties;
  std::size_t body_offset = 0;
  std::size_t body_line = 0;  // line number right after end_header
  // indices into properties, -1 when absent
  int x = -1, y = -1, z = -1;
  int r = -1, g = -1, b = -1;
};

PlyHeader parse_ply_header(std::string_view data, std::vector<std::string>& warnings) {
  LineCursor cursor{data};
  std::size_t offset;

  std::string_view magic = cursor.next(offset);
  if (trim(magic) != "ply") throw ParseError(cursor.line, offset, "missing ply magic");

  PlyHeader header;
  bool have_format = false;
  bool have_vertex = false;
  bool done = false;

  while (!done) {
    if (cursor.eof()) throw ParseError(cursor.line, data.size(), "unterminated ply header");
    const std::string_view raw = cursor.next(offset);
    const std::vector<Token> tokens = split_whitespace(raw, offset);
    if (tokens.empty()) continue;
    const std::string_view keyword = tokens[0].text;

    if (keyword == "comment" || keyword == "obj_info") continue;

    if (keyword == "format") {
      if (tokens.size() != 3 || tokens[2].text != "1.0")
        throw ParseError(cursor.line, offset, "malformed format line");
      if (tokens[1].text == "ascii") {
        header.binary = false;
      } else if (tokens[1].text == "binary_little_endian") {
        header.binary = true;
      } else if (tokens[1].text == "binary_big_endian") {
        throw UnsupportedFormat("big-endian ply");
      } else {
        throw ParseError(cursor.line, tokens[1].offset, "unknown ply format");
      }
      have_format = true;
      continue;
    }

    if (keyword == "element") {
      if (tokens.size() != 3) throw ParseError(cursor.line, offset, "malformed element line");
      if (tokens[1].text != "vertex")
        throw UnsupportedFormat("ply element '" + std::string(tokens[1].text) +
                                "' (vertex-only files supported)");
      if (have_vertex) throw ParseError(cursor.line, offset, "duplicate vertex element");
      std::size_t count = 0;
      const char* first = tokens[2].text.data();
      const char* last = first + tokens[2].text.size();
      const auto [ptr, ec] = std::from_chars(first, last, count);
      if (ec != std::errc{} || ptr != last)
        throw ParseError(cursor.line, tokens[2].offset, "bad vertex count");
      header.vertex_count = count;
      have_vertex = true;
      continue;
    }

    if (keyword == "property") {
      if (!have_vertex) throw ParseError(cursor.line, offset, "property before element");
      if (tokens.size() >= 2 && tokens[1].text == "list")
        throw UnsupportedFormat("ply list properties");
      if (tokens.size() != 3) throw ParseError(cursor.line, offset, "malformed property line");
      const auto type = ply_type_from(tokens[1].text);
      if (!type)
        throw ParseError(cursor.line, tokens[1].offset,
                         "unknown property type '" + std::string(tokens[1].text) + "'");
      header.properties.push_back(
          {type->first, type->second, std::string(tokens[2].text)});
      continue;
    }

    if (keyword == "end_header") {
      done = true;
      continue;
    }

    throw ParseError(cursor.line, offset,
                     "unknown header keyword '" + std::string(keyword) + "'");
  }

  if (!have_format) throw ParseError(cursor.line, offset, "ply header missing format");
  if (!have_vertex) throw ParseError(cursor.line, offset, "ply header missing vertex element");

  header.body_offset = cursor.pos;
  header.body_line = cursor.line + 1;

  auto is_float = [](PlyType t) { return t == PlyType::FLOAT32 || t == PlyType::FLOAT64; };
  for (std::size_t i = 0; i < header.properties.size(); ++i) {
    const PlyProperty& prop = header.properties[i];
    const int idx = static_cast<int>(i);
    if (prop.name == "x" && is_float(prop.type) && header.x < 0) {
      header.x = idx;
    } else if (prop.name == "y" && is_float(prop.type) && header.y < 0) {
      header.y = idx;
    } else if (prop.name == "z" && is_float(prop.type) && header.z < 0) {
      header.z = idx;
    } else if (prop.name == "red" && prop.type == PlyType::UINT8 && header.r < 0) {
      header.r = idx;
    } else if (prop.name == "green" && prop.type == PlyType::UINT8 && header.g < 0) {
      header.g = idx;
    } else if (prop.name == "blue" && prop.type == PlyType::UINT8 && header.b < 0) {
      header.b = idx;
    } else {
      warnings.push_back("skipped ply property '" + prop.name + "'");
    }
  }
  if (header.x < 0 || header.y < 0 || header.z < 0)
    throw ParseError(header.body_line - 1, header.body_offset,
                     "ply vertex element lacks float x/y/z properties");
  if (!(header.r >= 0 && header.g >= 0 && header.b >= 0)) {
    // A partial color triple is skipped property by property above; only a
    // complete uchar triple becomes a color channel.
    header.r = header.g = header.b = -1;
  }
  return header;
}

CloudData parse_ply_ascii(std::string_view data, const PlyHeader& header,
                          std::vector<std::string>&& warnings) {
  CloudData out;
  out.warnings = std::move(warnings);
  out.cloud.points.reserve(header.vertex_count);
  const bool with_colors = header.r >= 0;
  if (with_colors) out.colors.emplace();

  LineCursor cursor{data};
  cursor.pos = header.body_offset;
  cursor.line = header.body_line - 1;

  std::size_t rows = 0;
  while (rows < header.vertex_count) {
    if (cursor.eof())
      throw ParseError(cursor.line, data.size(),
                       "expected " + std::to_string(header.vertex_count) +
                           " vertex rows, got " + std::to_string(rows));
    std::size_t offset;
    const std::string_view raw = cursor.next(offset);
    if (trim(raw).empty()) continue;
    const std::vector<Token> tokens = split_whitespace(raw, offset);
    if (tokens.size() != header.properties.size())
      throw ParseError(cursor.line, offset,
                       "expected " + std::to_string(header.properties.size()) +
                           " values, got " + std::to_string(tokens.size()));

    const Vec3 p(parse_coordinate(tokens[header.x], cursor.line),
                 parse_coordinate(tokens[header.y], cursor.line),
                 parse_coordinate(tokens[header.z], cursor.line));
    out.cloud.points.push_back(p);

    if (with_colors) {
      auto channel = [&](int idx) -> std::uint8_t {
        const Token& token = tokens[idx];
        unsigned value = 0;
        const char* first = token.text.data();
        const char* last = first + token.text.size();
        const auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc{} || ptr != last || value > 255)
          throw ParseError(cursor.line, token.offset, "bad color value");
        return static_cast<std::uint8_t>(value);
      };
      out.colors->push_back({channel(header.r), channel(header.g), channel(header.b)});
    }
    ++rows;
  }

  while (!cursor.eof()) {
    std::size_t offset;
    if (!trim(cursor.next(offset)).empty()) {
      out.warnings.push_back("trailing content after vertex rows ignored");
      break;
    }
  }
  if (out.cloud.empty()) throw EmptyCloud();
  return out;
}

CloudData parse_ply_binary(std::string_view data, const PlyHeader& header,
                           std::vector<std::string>&& warnings) {
  CloudData out;
  out.warnings = std::move(warnings);
  out.cloud.points.reserve(header.vertex_count);
  const bool with_colors = header.r >= 0;
  if (with_colors) out.colors.emplace();

  std::size_t stride = 0;
  std::vector<std::size_t> field_offset(header.properties.size());
  for (std::size_t i = 0; i < header.properties.size(); ++i) {
    field_offset[i] = stride;
    stride += header.properties[i].size;
  }

  const std::size_t body_size = data.size() - header.body_offset;
  if (body_size < header.vertex_count * stride)
    throw ParseError(header.body_line, data.size(),
                     "binary body truncated: need " +
                         std::to_string(header.vertex_count * stride) + " bytes, have " +
                         std::to_string(body_size));
  if (body_size > header.vertex_count * stride)
    out.warnings.push_back("trailing bytes after vertex data ignored");

  const unsigned char* body =
      reinterpret_cast<const unsigned char*>(data.data()) + header.body_offset;

  auto read_scalar = [&](const unsigned char* at, PlyType type) -> double {
    switch (type) {
      case PlyType::FLOAT32: {
        std::uint32_t bits = 0;
        for (int k = 3; k >= 0; --k) bits = (bits << 8) | at[k];
        return static_cast<double>(std::bit_cast<float>(bits));
      }
      case PlyType::FLOAT64: {
        std::uint64_t bits = 0;
        for (int k = 7; k >= 0; --k) bits = (bits << 8) | at[k];
        return std::bit_cast<double>(bits);
      }
      default:
        return 0.0;  // unreachable for coordinates; integers are skipped
    }
  };

  for (std::size_t row = 0; row < header.vertex_count; ++row) {
    const unsigned char* base = body + row * stride;
    const double x = read_scalar(base + field_offset[header.x], header.properties[header.x].type);
    const double y = read_scalar(base + field_offset[header.y], header.properties[header.y].type);
    const double z = read_scalar(base + field_offset[header.z], header.properties[header.z].type);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
      throw ParseError(header.body_line,
                       header.body_offset + row * stride, "non-finite coordinate");
    out.cloud.points.emplace_back(x, y, z);
    if (with_colors)
      out.colors->push_back({base[field_offset[header.r]], base[field_offset[header.g]],
                             base[field_offset[header.b]]});
  }
  if (out.cloud.empty()) throw EmptyCloud();
  return out;
}

CloudData parse_ply(std::string_view data, std::optional<CloudFormat> requested) {
  std::vector<std::string> warnings;
  const PlyHeader header = parse_ply_header(data, warnings);
  if (requested == CloudFormat::PLY_ASCII && header.binary)
    throw ParseError(1, 0, "expected ascii ply, header declares binary");
  if (requested == CloudFormat::PLY_BINARY_LE && !header.binary)
    throw ParseError(1, 0, "expected binary ply, header declares ascii");
  return header.binary ? parse_ply_binary(data, header, std::move(warnings))
                       : parse_ply_ascii(data, header, std::move(warnings));
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

CloudFormat infer_read_format(const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".xyz" || ext == ".txt") return CloudFormat::XYZ_ASCII;
  if (ext == ".csv") return CloudFormat::CSV;
  if (ext == ".ply") return CloudFormat::PLY_ASCII;  // variant resolved from header
  throw UnsupportedFormat("cannot infer cloud format from '" + path.string() + "'");
}

void append_text(std::string& out, const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  out += buf;
}

void append_le(std::string& out, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int k = 0; k < 8; ++k) out.push_back(static_cast<char>((bits >> (8 * k)) & 0xFF));
}

std::string render_ply(const PointCloud& cloud, const std::optional<std::vector<Rgb>>& colors,
                       bool binary) {
  std::string out;
  out += "ply\n";
  out += binary ? "format binary_little_endian 1.0\n" : "format ascii 1.0\n";
  out += "element vertex " + std::to_string(cloud.size()) + "\n";
  out += "property double x\nproperty double y\nproperty double z\n";
  if (colors) out += "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out += "end_header\n";

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud[i];
    if (binary) {
      append_le(out, p.x());
      append_le(out, p.y());
      append_le(out, p.z());
      if (colors)
        for (std::uint8_t c : (*colors)[i]) out.push_back(static_cast<char>(c));
    } else {
      append_text(out, "%.17g", p.x());
      out += ' ';
      append_text(out, "%.17g", p.y());
      out += ' ';
      append_text(out, "%.17g", p.z());
      if (colors)
        for (std::uint8_t c : (*colors)[i]) out += ' ' + std::to_string(c);
      out += '\n';
    }
  }
  return out;
}

}  // namespace

const char* to_string(CloudFormat format) {
  switch (format) {
    case CloudFormat::XYZ_ASCII: return "xyz";
    case CloudFormat::CSV: return "csv";
    case CloudFormat::PLY_ASCII: return "ply-ascii";
    case CloudFormat::PLY_BINARY_LE: return "ply-binary-le";
  }
  return "unknown";
}

CloudData read_cloud(const std::filesystem::path& path, std::optional<CloudFormat> format) {
  const std::string data = read_file(path);
  const CloudFormat effective = format ? *format : infer_read_format(path);
  switch (effective) {
    case CloudFormat::XYZ_ASCII: return parse_xyz(data);
    case CloudFormat::CSV: return parse_csv(data);
    case CloudFormat::PLY_ASCII:
    case CloudFormat::PLY_BINARY_LE:
      return parse_ply(data, format);
  }
  throw UnsupportedFormat("unknown cloud format");
}

void write_cloud(const std::filesystem::path& path, const PointCloud& cloud,
                 const std::optional<std::vector<Rgb>>& colors,
                 std::optional<CloudFormat> format) {
  if (cloud.empty()) throw EmptyCloud();
  validate_cloud(cloud);

  CloudFormat effective;
  if (format) {
    effective = *format;
  } else {
    const std::string ext = lower_extension(path);
    if (ext == ".xyz" || ext == ".txt") {
      effective = CloudFormat::XYZ_ASCII;
    } else if (ext == ".csv") {
      effective = CloudFormat::CSV;
    } else if (ext == ".ply") {
      effective = CloudFormat::PLY_BINARY_LE;
    } else {
      throw UnsupportedFormat("cannot infer cloud format from '" + path.string() + "'");
    }
  }

  const bool is_ply =
      effective == CloudFormat::PLY_ASCII || effective == CloudFormat::PLY_BINARY_LE;
  if (colors) {
    if (!is_ply) throw InvalidParam("colors are representable only in ply output");
    if (colors->size() != cloud.size()) throw RowCountMismatch(cloud.size(), colors->size());
  }

  std::string data;
  switch (effective) {
    case CloudFormat::XYZ_ASCII:
      for (const Vec3& p : cloud.points) {
        append_text(data, "%.17g", p.x());
        data += ' ';
        append_text(data, "%.17g", p.y());
        data += ' ';
        append_text(data, "%.17g", p.z());
        data += '\n';
      }
      break;
    case CloudFormat::CSV:
      data += "x,y,z\n";
      for (const Vec3& p : cloud.points) {
        append_text(data, "%.17g", p.x());
        data += ',';
        append_text(data, "%.17g", p.y());
        data += ',';
        append_text(data, "%.17g", p.z());
        data += '\n';
      }
      break;
    case CloudFormat::PLY_ASCII:
      data = render_ply(cloud, colors, false);
      break;
    case CloudFormat::PLY_BINARY_LE:
      data = render_ply(cloud, colors, true);
      break;
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string() + ": cannot open for writing");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw IoError(path.string() + ": write failure");
}

}  // namespace io
}  // namespace ppc
