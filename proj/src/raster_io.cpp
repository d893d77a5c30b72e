#include "dpdnet/raster_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpdnet/error.hpp"

namespace dpdnet {
namespace {

std::vector<unsigned char> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_all(const std::filesystem::path& path, const std::vector<unsigned char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

struct PgmHeader {
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::size_t data_offset = 0;
};

// Netpbm header: "P5", then width, height and maxval as ASCII decimals
// separated by whitespace (comments run from '#' to end of line), then
// exactly one whitespace byte before the raster.
PgmHeader parse_pgm_header(const std::vector<unsigned char>& bytes, const std::string& name) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw FormatError(name + ": not a binary PGM (P5)");
  std::size_t pos = 2;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&](const char* what) {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw FormatError(name + ": bad PGM " + what);
    long value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > 1'000'000'000L) throw FormatError(name + ": PGM " + what + " too large");
      ++pos;
    }
    return static_cast<int>(value);
  };
  PgmHeader h;
  h.width = read_int("width");
  h.height = read_int("height");
  h.maxval = read_int("maxval");
  if (h.width <= 0 || h.height <= 0) throw FormatError(name + ": PGM dimensions must be positive");
  if (h.maxval <= 0 || h.maxval > 65535) throw FormatError(name + ": PGM maxval out of range");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw FormatError(name + ": missing PGM header terminator");
  h.data_offset = pos + 1;
  return h;
}

Raster decode_pgm(const std::vector<unsigned char>& bytes, const std::string& name, int required_bytes) {
  const PgmHeader h = parse_pgm_header(bytes, name);
  const int sample_bytes = h.maxval < 256 ? 1 : 2;
  if (required_bytes != 0 && sample_bytes != required_bytes) {
    throw FormatError(name + ": PGM maxval " + std::to_string(h.maxval) + " does not match declared " +
                      std::to_string(8 * required_bytes) + "-bit format");
  }
  const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
  const std::size_t payload = bytes.size() - h.data_offset;
  if (payload < n * sample_bytes) {
    throw TruncationError(name + ": PGM payload has " + std::to_string(payload) + " bytes, expected " +
                          std::to_string(n * sample_bytes));
  }
  Raster out(h.width, h.height, 1);
  auto d = out.data();
  const unsigned char* src = bytes.data() + h.data_offset;
  for (std::size_t p = 0; p < n; ++p) {
    unsigned v = sample_bytes == 1 ? src[p] : (static_cast<unsigned>(src[2 * p]) << 8) | src[2 * p + 1];
    if (v > static_cast<unsigned>(h.maxval)) throw FormatError(name + ": PGM sample exceeds maxval");
    d[p] = static_cast<double>(v) / h.maxval;
  }
  return out;
}

void save_pgm(const Raster& r, const std::filesystem::path& path, int maxval) {
  if (r.channels() != 1) throw UnsupportedFormatError("PGM stores one channel, raster has " +
                                                      std::to_string(r.channels()));
  const std::string header = "P5\n" + std::to_string(r.width()) + " " + std::to_string(r.height()) + "\n" +
                             std::to_string(maxval) + "\n";
  const int sample_bytes = maxval < 256 ? 1 : 2;
  std::vector<unsigned char> bytes(header.begin(), header.end());
  bytes.reserve(header.size() + r.pixel_count() * sample_bytes);
  for (double v : r.data()) {
    if (!std::isfinite(v)) throw InputError("cannot quantise non-finite value");
    const auto q = static_cast<unsigned>(std::lround(std::clamp(v, 0.0, 1.0) * maxval));
    if (sample_bytes == 2) bytes.push_back(static_cast<unsigned char>(q >> 8));
    bytes.push_back(static_cast<unsigned char>(q & 0xff));
  }
  write_all(path, bytes);
}

std::uint32_t to_little_endian(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) {
    return v;
  } else {
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
  }
}

Raster load_f32(const std::filesystem::path& path) {
  const auto sidecar = f32_sidecar_path(path);
  std::ifstream meta_in(sidecar);
  if (!meta_in) throw FormatError("missing sidecar " + sidecar.string());
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(sidecar.string() + ": " + e.what());
  }
  int width = 0, height = 0, channels = 1;
  try {
    width = meta.at("width").get<int>();
    height = meta.at("height").get<int>();
    channels = meta.value("channels", 1);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(sidecar.string() + ": " + e.what());
  }
  if (width <= 0 || height <= 0 || channels <= 0) throw FormatError(sidecar.string() + ": bad dimensions");

  const auto bytes = read_all(path);
  const std::size_t n = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() != n * 4) {
    throw TruncationError(path.string() + ": payload has " + std::to_string(bytes.size()) + " bytes, expected " +
                          std::to_string(n * 4));
  }
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::uint32_t word;
    std::memcpy(&word, bytes.data() + 4 * i, 4);
    const float f = std::bit_cast<float>(to_little_endian(word));
    if (!std::isfinite(f)) throw FormatError(path.string() + ": non-finite sample at index " + std::to_string(i));
    data[i] = f;
  }
  return Raster(width, height, channels, std::move(data));
}

void save_f32(const Raster& r, const std::filesystem::path& path) {
  std::vector<unsigned char> bytes(r.data().size() * 4);
  std::size_t i = 0;
  for (double v : r.data()) {
    if (!std::isfinite(v)) throw InputError("cannot store non-finite value");
    const std::uint32_t word = to_little_endian(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    std::memcpy(bytes.data() + 4 * i++, &word, 4);
  }
  write_all(path, bytes);
  const nlohmann::json meta = {{"width", r.width()}, {"height", r.height()}, {"channels", r.channels()}};
  std::ofstream out(f32_sidecar_path(path), std::ios::trunc);
  out << meta.dump() << '\n';
  if (!out) throw FormatError("write failed for " + f32_sidecar_path(path).string());
}

}  // namespace

RasterFormat parse_raster_format(std::string_view name) {
  if (name == "pgm8") return RasterFormat::pgm8;
  if (name == "pgm16") return RasterFormat::pgm16;
  if (name == "f32raw" || name == "f32") return RasterFormat::f32raw;
  throw ParameterError("unknown raster format '" + std::string(name) + "'");
}

RasterFormat format_from_path(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".pgm") return RasterFormat::pgm8;
  if (ext == ".f32" || ext == ".raw") return RasterFormat::f32raw;
  throw ParameterError("cannot infer raster format from '" + path.string() + "'");
}

std::filesystem::path f32_sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".json";
  return p;
}

Raster load_pgm(const std::filesystem::path& path) { return decode_pgm(read_all(path), path.string(), 0); }

Raster load_raster(const std::filesystem::path& path, RasterFormat format) {
  switch (format) {
    case RasterFormat::pgm8: return decode_pgm(read_all(path), path.string(), 1);
    case RasterFormat::pgm16: return decode_pgm(read_all(path), path.string(), 2);
    case RasterFormat::f32raw: return load_f32(path);
  }
  throw ParameterError("unknown raster format");
}

void save_raster(const Raster& raster, const std::filesystem::path& path, RasterFormat format) {
  switch (format) {
    case RasterFormat::pgm8: return save_pgm(raster, path, 255);
    case RasterFormat::pgm16: return save_pgm(raster, path, 65535);
    case RasterFormat::f32raw: return save_f32(raster, path);
  }
  throw ParameterError("unknown raster format");
}

}  // namespace dpdnet
