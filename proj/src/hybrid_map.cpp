#include "terrapath/hybrid_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <nlohmann/json.hpp>

#include "terrapath/errors.hpp"

namespace terrapath {

HybridMap::HybridMap(double origin_x, double origin_y, double resolution,
                     int width, int height)
    : origin_x_(origin_x),
      origin_y_(origin_y),
      resolution_(resolution),
      width_(width),
      height_(height),
      cells_(static_cast<std::size_t>(width) * height) {
  if (width <= 0 || height <= 0 || resolution <= 0.0)
    throw InvalidSpecError("map dimensions and resolution must be positive");
  cls_.assign(cells_, static_cast<std::uint8_t>(CellClass::Unknown));
  tau_.assign(cells_, 0.0f);
  normal_.assign(cells_ * 3, 0.0f);
  r_sum_.assign(cells_, 0.0f);
  elevation_.assign(cells_, 0.0f);
}

void HybridMap::copy_from(const HybridMap& other) {
  origin_x_ = other.origin_x_;
  origin_y_ = other.origin_y_;
  resolution_ = other.resolution_;
  width_ = other.width_;
  height_ = other.height_;
  cells_ = other.cells_;
  cls_ = other.cls_;
  tau_ = other.tau_;
  normal_ = other.normal_;
  r_sum_ = other.r_sum_;
  elevation_ = other.elevation_;
  spec_ = other.spec_;
  distance_.clear();  // rebuilt lazily
}

HybridMap::HybridMap(const HybridMap& other) { copy_from(other); }

HybridMap& HybridMap::operator=(const HybridMap& other) {
  if (this != &other) copy_from(other);
  return *this;
}

CellState HybridMap::cell(int row, int col) const {
  CellState s;
  const auto i = index(row, col);
  s.cls = static_cast<CellClass>(cls_[i]);
  if (s.cls == CellClass::Terrain) {
    s.normal = Eigen::Vector3d(normal_[3 * i], normal_[3 * i + 1],
                               normal_[3 * i + 2]);
    s.r_sum = r_sum_[i];
    s.tau = tau_[i];
    s.elevation = elevation_[i];
  }
  return s;
}

CellState HybridMap::query(double x, double y) const {
  const int col = col_of(x), row = row_of(y);
  if (!in_bounds(row, col)) return CellState{};
  return cell(row, col);
}

CellClass HybridMap::cls_at(double x, double y) const {
  const int col = col_of(x), row = row_of(y);
  if (!in_bounds(row, col)) return CellClass::Unknown;
  return cls(row, col);
}

void HybridMap::set_obstacle(int row, int col) {
  const auto i = index(row, col);
  cls_[i] = static_cast<std::uint8_t>(CellClass::Obstacle);
  tau_[i] = 0.0f;
  normal_[3 * i] = normal_[3 * i + 1] = normal_[3 * i + 2] = 0.0f;
  r_sum_[i] = 0.0f;
  elevation_[i] = 0.0f;
}

void HybridMap::set_unknown(int row, int col) {
  const auto i = index(row, col);
  cls_[i] = static_cast<std::uint8_t>(CellClass::Unknown);
  tau_[i] = 0.0f;
  normal_[3 * i] = normal_[3 * i + 1] = normal_[3 * i + 2] = 0.0f;
  r_sum_[i] = 0.0f;
  elevation_[i] = 0.0f;
}

void HybridMap::set_terrain(int row, int col, const Eigen::Vector3d& normal,
                            double r_sum, double tau, double elevation) {
  const auto i = index(row, col);
  cls_[i] = static_cast<std::uint8_t>(CellClass::Terrain);
  tau_[i] = static_cast<float>(tau);
  normal_[3 * i] = static_cast<float>(normal.x());
  normal_[3 * i + 1] = static_cast<float>(normal.y());
  normal_[3 * i + 2] = static_cast<float>(normal.z());
  r_sum_[i] = static_cast<float>(r_sum);
  elevation_[i] = static_cast<float>(elevation);
}

// Felzenszwalb & Huttenlocher lower-envelope transform. Distances come out as
// exact integer-valued squared cell offsets plus the source value, so results
// match brute force bit-for-bit.
namespace {

void edt_1d(const std::vector<double>& f, std::vector<double>& d, int n,
            std::vector<int>& v, std::vector<double>& z) {
  int k = 0;
  v[0] = 0;
  z[0] = -std::numeric_limits<double>::infinity();
  z[1] = std::numeric_limits<double>::infinity();
  for (int q = 1; q < n; ++q) {
    double s;
    while (true) {
      s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
      if (s <= z[k]) {
        --k;
      } else {
        break;
      }
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = std::numeric_limits<double>::infinity();
  }
  k = 0;
  for (int q = 0; q < n; ++q) {
    while (z[k + 1] < q) ++k;
    const double dq = q - v[k];
    d[q] = dq * dq + f[v[k]];
  }
}

}  // namespace

std::vector<double> exact_edt_squared(const std::vector<std::uint8_t>& mask,
                                      int width, int height) {
  // large finite stand-in for "no feature"; keeps the parabola intersections
  // finite while staying exact (any real squared distance is far smaller)
  const double far = 1e15;
  std::vector<double> dist(static_cast<std::size_t>(width) * height);
  for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = mask[i] ? 0.0 : far;

  const int n = std::max(width, height);
  std::vector<double> f(n), d(n), z(n + 1);
  std::vector<int> v(n);

  // columns
  for (int col = 0; col < width; ++col) {
    for (int row = 0; row < height; ++row)
      f[row] = dist[static_cast<std::size_t>(row) * width + col];
    edt_1d(f, d, height, v, z);
    for (int row = 0; row < height; ++row)
      dist[static_cast<std::size_t>(row) * width + col] = d[row];
  }
  // rows
  for (int row = 0; row < height; ++row) {
    for (int col = 0; col < width; ++col)
      f[col] = dist[static_cast<std::size_t>(row) * width + col];
    edt_1d(f, d, width, v, z);
    for (int col = 0; col < width; ++col)
      dist[static_cast<std::size_t>(row) * width + col] = d[col];
  }
  return dist;
}

void HybridMap::ensure_distance_field() const {
  std::call_once(distance_once_, [this] {
    std::vector<std::uint8_t> mask(cells_, 0);
    bool any = false;
    for (std::size_t i = 0; i < cells_; ++i) {
      if (cls_[i] == static_cast<std::uint8_t>(CellClass::Obstacle)) {
        mask[i] = 1;
        any = true;
      }
    }
    if (!any) {
      distance_.assign(cells_, kNoObstacle);
      return;
    }
    auto sq = exact_edt_squared(mask, width_, height_);
    distance_.resize(cells_);
    for (std::size_t i = 0; i < cells_; ++i)
      distance_[i] = std::sqrt(sq[i]) * resolution_;
  });
}

double HybridMap::distance_at(int row, int col) const {
  ensure_distance_field();
  return distance_[index(row, col)];
}

double HybridMap::distance_to_obstacle(double x, double y) const {
  const int col = col_of(x), row = row_of(y);
  if (!in_bounds(row, col)) return 0.0;
  return distance_at(row, col);
}

// --- serialization ---------------------------------------------------------

namespace {

constexpr char kMagic[6] = {'T', 'H', 'Y', 'M', 'A', 'P'};
constexpr std::uint16_t kVersion = 1;

std::uint32_t crc32_update(std::uint32_t crc, const void* data, std::size_t n) {
  static std::uint32_t table[256];
  static const bool init = [] {
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
      table[i] = c;
    }
    return true;
  }();
  (void)init;
  const auto* p = static_cast<const std::uint8_t*>(data);
  crc ^= 0xFFFFFFFFu;
  for (std::size_t i = 0; i < n; ++i) crc = table[(crc ^ p[i]) & 0xFF] ^ (crc >> 8);
  return crc ^ 0xFFFFFFFFu;
}

struct CrcWriter {
  std::ofstream out;
  std::uint32_t crc = 0;
  void write(const void* data, std::size_t n) {
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
    crc = crc32_update(crc, data, n);
  }
  template <typename T>
  void put(const T& v) {
    write(&v, sizeof(T));
  }
};

struct CrcReader {
  std::ifstream in;
  std::uint32_t crc = 0;
  void read(void* data, std::size_t n) {
    in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in.gcount()) != n)
      throw CorruptFileError("unexpected end of map file");
    crc = crc32_update(crc, data, n);
  }
  template <typename T>
  T get() {
    T v;
    read(&v, sizeof(T));
    return v;
  }
};

nlohmann::ordered_json spec_to_json(const RobotSpec& s) {
  return {{"robot_length", s.robot_length},
          {"robot_width", s.robot_width},
          {"rho_max", s.rho_max},
          {"h_max", s.h_max},
          {"weight_roughness", s.weight_roughness},
          {"weight_slope", s.weight_slope},
          {"w_roughness", s.w_roughness},
          {"w_roll", s.w_roll},
          {"w_pitch", s.w_pitch},
          {"roll_max", s.roll_max},
          {"pitch_min", s.pitch_min},
          {"pitch_max", s.pitch_max},
          {"k_turn", s.k_turn},
          {"k_trav", s.k_trav},
          {"r_max", s.r_max}};
}

RobotSpec spec_from_json(const nlohmann::json& j) {
  RobotSpec s;
  s.robot_length = j.value("robot_length", s.robot_length);
  s.robot_width = j.value("robot_width", s.robot_width);
  s.rho_max = j.value("rho_max", s.rho_max);
  s.h_max = j.value("h_max", s.h_max);
  s.weight_roughness = j.value("weight_roughness", s.weight_roughness);
  s.weight_slope = j.value("weight_slope", s.weight_slope);
  s.w_roughness = j.value("w_roughness", s.w_roughness);
  s.w_roll = j.value("w_roll", s.w_roll);
  s.w_pitch = j.value("w_pitch", s.w_pitch);
  s.roll_max = j.value("roll_max", s.roll_max);
  s.pitch_min = j.value("pitch_min", s.pitch_min);
  s.pitch_max = j.value("pitch_max", s.pitch_max);
  s.k_turn = j.value("k_turn", s.k_turn);
  s.k_trav = j.value("k_trav", s.k_trav);
  s.r_max = j.value("r_max", s.r_max);
  return s;
}

}  // namespace

void save_map(const HybridMap& map, const std::string& path) {
  CrcWriter w;
  w.out.open(path, std::ios::binary);
  if (!w.out) throw IoError("cannot open for writing: " + path);

  w.write(kMagic, sizeof(kMagic));
  w.put(kVersion);
  w.put(map.origin_x_);
  w.put(map.origin_y_);
  w.put(map.resolution_);
  w.put(static_cast<std::uint32_t>(map.width_));
  w.put(static_cast<std::uint32_t>(map.height_));
  w.write(map.cls_.data(), map.cls_.size());
  w.write(map.tau_.data(), map.tau_.size() * sizeof(float));
  w.write(map.normal_.data(), map.normal_.size() * sizeof(float));
  w.write(map.r_sum_.data(), map.r_sum_.size() * sizeof(float));
  w.write(map.elevation_.data(), map.elevation_.size() * sizeof(float));
  const std::uint32_t crc = w.crc;
  w.out.write(reinterpret_cast<const char*>(&crc), sizeof(crc));
  if (!w.out) throw IoError("write failed: " + path);

  std::ofstream side(path + ".json");
  if (!side) throw IoError("cannot write sidecar: " + path + ".json");
  side << spec_to_json(map.spec_).dump(2) << "\n";
}

HybridMap load_map(const std::string& path) {
  CrcReader r;
  r.in.open(path, std::ios::binary);
  if (!r.in) throw FileNotFoundError(path);

  char magic[6];
  r.read(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw CorruptFileError("bad magic bytes: " + path);
  const auto version = r.get<std::uint16_t>();
  if (version != kVersion)
    throw VersionMismatchError("unsupported map version " +
                               std::to_string(version));

  const double ox = r.get<double>();
  const double oy = r.get<double>();
  const double res = r.get<double>();
  const auto width = r.get<std::uint32_t>();
  const auto height = r.get<std::uint32_t>();
  if (width == 0 || height == 0 || width > 1u << 20 || height > 1u << 20)
    throw CorruptFileError("implausible map dimensions");

  HybridMap map(ox, oy, res, static_cast<int>(width), static_cast<int>(height));
  r.read(map.cls_.data(), map.cls_.size());
  r.read(map.tau_.data(), map.tau_.size() * sizeof(float));
  r.read(map.normal_.data(), map.normal_.size() * sizeof(float));
  r.read(map.r_sum_.data(), map.r_sum_.size() * sizeof(float));
  r.read(map.elevation_.data(), map.elevation_.size() * sizeof(float));
  const std::uint32_t computed = r.crc;
  std::uint32_t stored;
  r.in.read(reinterpret_cast<char*>(&stored), sizeof(stored));
  if (r.in.gcount() != sizeof(stored))
    throw CorruptFileError("map file truncated before checksum");
  if (stored != computed) throw CorruptFileError("checksum mismatch: " + path);

  std::ifstream side(path + ".json");
  if (side) {
    nlohmann::json j;
    side >> j;
    map.spec_ = spec_from_json(j);
  }
  return map;
}

}  // namespace terrapath
