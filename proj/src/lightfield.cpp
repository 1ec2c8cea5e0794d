#include "ddan/lightfield.hpp"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>

namespace fs = std::filesystem;

namespace ddan {

LightField::LightField(i64 u, i64 v, i64 h, i64 w, int ch, LfDtype dt, ColorTag tag)
    : U(u), V(v), H(h), W(w), channels(ch), dtype(dt), color(tag) {
  if (u < 1 || v < 1 || h < 1 || w < 1)
    throw std::invalid_argument("LightField: non-positive extent");
  if (ch != 1 && ch != 3) throw std::invalid_argument("LightField: channels must be 1 or 3");
  if (ch == 1 && tag != ColorTag::Y)
    throw std::invalid_argument("LightField: single-channel fields must be tagged Y");
  if (ch == 3 && tag == ColorTag::Y)
    throw std::invalid_argument("LightField: 3-channel fields cannot be tagged Y");
  if (dt == LfDtype::U8)
    data8.assign(expected_size(), 0);
  else
    dataf.assign(expected_size(), 0.0f);
}

void LightField::validate() const {
  const size_t n = expected_size();
  if (dtype == LfDtype::U8) {
    if (data8.size() != n || !dataf.empty())
      throw std::runtime_error("LightField: payload size inconsistent with dims");
  } else {
    if (dataf.size() != n || !data8.empty())
      throw std::runtime_error("LightField: payload size inconsistent with dims");
    for (float v : dataf)
      if (!(v >= 0.0f && v <= 1.0f))
        throw std::runtime_error("LightField: real-valued sample outside [0,1]");
  }
  if (channels != 1 && channels != 3)
    throw std::runtime_error("LightField: channels must be 1 or 3");
}

LightField LightField::to_f32() const {
  if (dtype == LfDtype::F32) return *this;
  LightField out(U, V, H, W, channels, LfDtype::F32, color);
  for (size_t i = 0; i < data8.size(); ++i) out.dataf[i] = static_cast<float>(data8[i]) / 255.0f;
  return out;
}

namespace {

inline std::uint8_t round_u8(double v) {
  return static_cast<std::uint8_t>(std::clamp(std::llround(v), 0ll, 255ll));
}

struct Bt601 {
  // forward: rgb -> (y, cb, cr), offsets handled by caller
  static void to_ycc(double r, double g, double b, double& y, double& cb, double& cr) {
    y = 0.299 * r + 0.587 * g + 0.114 * b;
    cb = 0.564 * (b - y);
    cr = 0.713 * (r - y);
  }
  static void to_rgb(double y, double cb, double cr, double& r, double& g, double& b) {
    r = y + cr / 0.713;
    b = y + cb / 0.564;
    g = (y - 0.299 * r - 0.114 * b) / 0.587;
  }
};

}  // namespace

LightField rgb_to_ycbcr(const LightField& lf) {
  if (lf.channels != 3 || lf.color != ColorTag::RGB)
    throw std::invalid_argument("rgb_to_ycbcr: input must be 3-channel RGB");
  LightField out(lf.U, lf.V, lf.H, lf.W, 3, lf.dtype, ColorTag::YCbCr);
  const i64 n = lf.plane_size();
  const double offset = lf.dtype == LfDtype::U8 ? 128.0 : 0.5;
  for (i64 u = 0; u < lf.U; ++u)
    for (i64 v = 0; v < lf.V; ++v)
      for (i64 i = 0; i < n; ++i) {
        double r, g, b;
        if (lf.dtype == LfDtype::U8) {
          r = lf.data8[lf.offset(u, v, 0, 0, 0) + i];
          g = lf.data8[lf.offset(u, v, 1, 0, 0) + i];
          b = lf.data8[lf.offset(u, v, 2, 0, 0) + i];
        } else {
          r = lf.dataf[lf.offset(u, v, 0, 0, 0) + i];
          g = lf.dataf[lf.offset(u, v, 1, 0, 0) + i];
          b = lf.dataf[lf.offset(u, v, 2, 0, 0) + i];
        }
        double y, cb, cr;
        Bt601::to_ycc(r, g, b, y, cb, cr);
        cb += offset;
        cr += offset;
        if (lf.dtype == LfDtype::U8) {
          out.data8[out.offset(u, v, 0, 0, 0) + i] = round_u8(y);
          out.data8[out.offset(u, v, 1, 0, 0) + i] = round_u8(cb);
          out.data8[out.offset(u, v, 2, 0, 0) + i] = round_u8(cr);
        } else {
          out.dataf[out.offset(u, v, 0, 0, 0) + i] = static_cast<float>(clamp01(y));
          out.dataf[out.offset(u, v, 1, 0, 0) + i] = static_cast<float>(clamp01(cb));
          out.dataf[out.offset(u, v, 2, 0, 0) + i] = static_cast<float>(clamp01(cr));
        }
      }
  return out;
}

LightField ycbcr_to_rgb(const LightField& lf) {
  if (lf.channels != 3 || lf.color != ColorTag::YCbCr)
    throw std::invalid_argument("ycbcr_to_rgb: input must be 3-channel YCbCr");
  LightField out(lf.U, lf.V, lf.H, lf.W, 3, lf.dtype, ColorTag::RGB);
  const i64 n = lf.plane_size();
  const double offset = lf.dtype == LfDtype::U8 ? 128.0 : 0.5;
  for (i64 u = 0; u < lf.U; ++u)
    for (i64 v = 0; v < lf.V; ++v)
      for (i64 i = 0; i < n; ++i) {
        double y, cb, cr;
        if (lf.dtype == LfDtype::U8) {
          y = lf.data8[lf.offset(u, v, 0, 0, 0) + i];
          cb = lf.data8[lf.offset(u, v, 1, 0, 0) + i];
          cr = lf.data8[lf.offset(u, v, 2, 0, 0) + i];
        } else {
          y = lf.dataf[lf.offset(u, v, 0, 0, 0) + i];
          cb = lf.dataf[lf.offset(u, v, 1, 0, 0) + i];
          cr = lf.dataf[lf.offset(u, v, 2, 0, 0) + i];
        }
        double r, g, b;
        Bt601::to_rgb(y, cb - offset, cr - offset, r, g, b);
        if (lf.dtype == LfDtype::U8) {
          out.data8[out.offset(u, v, 0, 0, 0) + i] = round_u8(r);
          out.data8[out.offset(u, v, 1, 0, 0) + i] = round_u8(g);
          out.data8[out.offset(u, v, 2, 0, 0) + i] = round_u8(b);
        } else {
          out.dataf[out.offset(u, v, 0, 0, 0) + i] = static_cast<float>(clamp01(r));
          out.dataf[out.offset(u, v, 1, 0, 0) + i] = static_cast<float>(clamp01(g));
          out.dataf[out.offset(u, v, 2, 0, 0) + i] = static_cast<float>(clamp01(b));
        }
      }
  return out;
}

LightField extract_y(const LightField& lf) {
  if (lf.channels == 1) return lf;
  const LightField ycc = lf.color == ColorTag::RGB ? rgb_to_ycbcr(lf) : lf;
  if (ycc.color != ColorTag::YCbCr)
    throw std::invalid_argument("extract_y: unsupported color tag");
  LightField out(lf.U, lf.V, lf.H, lf.W, 1, lf.dtype, ColorTag::Y);
  const i64 n = lf.plane_size();
  for (i64 u = 0; u < lf.U; ++u)
    for (i64 v = 0; v < lf.V; ++v) {
      const i64 src = ycc.offset(u, v, 0, 0, 0);
      const i64 dst = out.offset(u, v, 0, 0, 0);
      if (lf.dtype == LfDtype::U8)
        std::copy(ycc.data8.begin() + src, ycc.data8.begin() + src + n, out.data8.begin() + dst);
      else
        std::copy(ycc.dataf.begin() + src, ycc.dataf.begin() + src + n, out.dataf.begin() + dst);
    }
  return out;
}

// ---- container I/O ----

namespace {
void put_u16(std::ofstream& f, std::uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>(v >> 8)};
  f.write(reinterpret_cast<const char*>(b), 2);
}
void put_u32(std::ofstream& f, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  f.write(reinterpret_cast<const char*>(b), 4);
}
std::uint16_t get_u16(std::ifstream& f, const char* what) {
  unsigned char b[2];
  if (!f.read(reinterpret_cast<char*>(b), 2))
    throw std::runtime_error(std::string("light-field container truncated at ") + what);
  return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}
std::uint32_t get_u32(std::ifstream& f, const char* what) {
  unsigned char b[4];
  if (!f.read(reinterpret_cast<char*>(b), 4))
    throw std::runtime_error(std::string("light-field container truncated at ") + what);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}
}  // namespace

void save_lf(const LightField& lf, const std::string& path) {
  lf.validate();
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open for writing: " + path);
  f.write("LFSR", 4);
  put_u16(f, 1);
  put_u32(f, static_cast<std::uint32_t>(lf.U));
  put_u32(f, static_cast<std::uint32_t>(lf.V));
  put_u32(f, static_cast<std::uint32_t>(lf.H));
  put_u32(f, static_cast<std::uint32_t>(lf.W));
  const unsigned char meta[3] = {static_cast<unsigned char>(lf.channels),
                                 static_cast<unsigned char>(lf.dtype),
                                 static_cast<unsigned char>(lf.color)};
  f.write(reinterpret_cast<const char*>(meta), 3);
  if (lf.dtype == LfDtype::U8) {
    f.write(reinterpret_cast<const char*>(lf.data8.data()),
            static_cast<std::streamsize>(lf.data8.size()));
  } else {
    static_assert(sizeof(float) == 4);
    f.write(reinterpret_cast<const char*>(lf.dataf.data()),
            static_cast<std::streamsize>(lf.dataf.size() * 4));
  }
  if (!f) throw std::runtime_error("write failed: " + path);
}

LightField load_lf_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open light field: " + path);
  char magic[4];
  if (!f.read(magic, 4) || std::memcmp(magic, "LFSR", 4) != 0)
    throw std::runtime_error("bad magic in light-field container " + path);
  const std::uint16_t version = get_u16(f, "version");
  if (version != 1)
    throw std::runtime_error("unsupported container version " + std::to_string(version));
  const i64 U = get_u32(f, "U"), V = get_u32(f, "V"), H = get_u32(f, "H"), W = get_u32(f, "W");
  unsigned char meta[3];
  if (!f.read(reinterpret_cast<char*>(meta), 3))
    throw std::runtime_error("light-field container truncated at header");
  const int channels = meta[0];
  if (channels != 1 && channels != 3)
    throw std::runtime_error("dimension/channel inconsistency: channels=" +
                             std::to_string(channels));
  if (meta[1] > 1) throw std::runtime_error("unsupported dtype " + std::to_string(meta[1]));
  if (meta[2] > 2) throw std::runtime_error("unsupported color tag " + std::to_string(meta[2]));
  const LfDtype dtype = static_cast<LfDtype>(meta[1]);
  const ColorTag color = static_cast<ColorTag>(meta[2]);
  if ((channels == 1) != (color == ColorTag::Y))
    throw std::runtime_error("dimension/channel inconsistency: channels=" +
                             std::to_string(channels) + " with color tag " +
                             std::to_string(meta[2]));
  LightField lf(U, V, H, W, channels, dtype, color);
  if (dtype == LfDtype::U8) {
    if (!f.read(reinterpret_cast<char*>(lf.data8.data()),
                static_cast<std::streamsize>(lf.data8.size())))
      throw std::runtime_error("light-field container truncated: payload short in " + path);
  } else {
    if (!f.read(reinterpret_cast<char*>(lf.dataf.data()),
                static_cast<std::streamsize>(lf.dataf.size() * 4)))
      throw std::runtime_error("light-field container truncated: payload short in " + path);
  }
  lf.validate();
  return lf;
}

// ---- PGM/PPM directory ingest ----

namespace {

struct PnmImage {
  int channels;
  i64 h, w;
  std::vector<std::uint8_t> data;  // interleaved as stored
};

PnmImage read_pnm(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open image: " + path);
  std::string magic;
  f >> magic;
  if (magic != "P5" && magic != "P6")
    throw std::runtime_error("unsupported image format (need binary P5/P6): " + path);
  auto next_int = [&]() {
    // skip whitespace and '#' comments
    int c = f.get();
    while (c != EOF && (std::isspace(c) || c == '#')) {
      if (c == '#')
        while (c != EOF && c != '\n') c = f.get();
      c = f.get();
    }
    i64 v = 0;
    bool any = false;
    while (c != EOF && std::isdigit(c)) {
      v = v * 10 + (c - '0');
      any = true;
      c = f.get();
    }
    if (!any) throw std::runtime_error("malformed PNM header: " + path);
    return v;
  };
  PnmImage img;
  img.channels = magic == "P5" ? 1 : 3;
  img.w = next_int();
  img.h = next_int();
  const i64 maxval = next_int();
  if (maxval != 255) throw std::runtime_error("unsupported PNM maxval (need 255): " + path);
  img.data.resize(static_cast<size_t>(img.h) * img.w * img.channels);
  if (!f.read(reinterpret_cast<char*>(img.data.data()),
              static_cast<std::streamsize>(img.data.size())))
    throw std::runtime_error("truncated PNM payload: " + path);
  return img;
}

}  // namespace

LightField load_lf_dir(const std::string& path) {
  std::map<std::pair<i64, i64>, std::string> files;
  i64 umax = -1, vmax = -1;
  for (const auto& de : fs::directory_iterator(path)) {
    if (!de.is_regular_file()) continue;
    const std::string name = de.path().filename().string();
    i64 u, v;
    char ext[8] = {0};
    if (std::sscanf(name.c_str(), "view_%lld_%lld.%3s", (long long*)&u, (long long*)&v, ext) == 3 &&
        (std::strcmp(ext, "pgm") == 0 || std::strcmp(ext, "ppm") == 0)) {
      files[{u, v}] = de.path().string();
      umax = std::max(umax, u);
      vmax = std::max(vmax, v);
    }
  }
  if (files.empty()) throw std::runtime_error("no view_{u}_{v} images found in " + path);
  const i64 U = umax + 1, V = vmax + 1;
  LightField lf;
  for (i64 u = 0; u < U; ++u)
    for (i64 v = 0; v < V; ++v) {
      auto it = files.find({u, v});
      if (it == files.end())
        throw std::runtime_error("incomplete angular grid: missing view_" + std::to_string(u) +
                                 "_" + std::to_string(v) + " in " + path);
      PnmImage img = read_pnm(it->second);
      if (u == 0 && v == 0) {
        lf = LightField(U, V, img.h, img.w, img.channels, LfDtype::U8,
                        img.channels == 1 ? ColorTag::Y : ColorTag::RGB);
      } else if (img.h != lf.H || img.w != lf.W || img.channels != lf.channels) {
        throw std::runtime_error("dimension/channel inconsistency at view_" + std::to_string(u) +
                                 "_" + std::to_string(v) + " in " + path);
      }
      // interleaved -> planar
      for (i64 c = 0; c < lf.channels; ++c) {
        std::uint8_t* dst = lf.data8.data() + lf.offset(u, v, c, 0, 0);
        const std::uint8_t* src = img.data.data() + c;
        for (i64 i = 0; i < lf.plane_size(); ++i) dst[i] = src[i * lf.channels];
      }
    }
  return lf;
}

LightField load_lf(const std::string& path) {
  if (fs::is_directory(path)) return load_lf_dir(path);
  return load_lf_file(path);
}

}  // namespace ddan
