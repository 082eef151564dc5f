#include "pave/params.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace pave {

ParamVector::ParamVector(std::vector<ParamShape> layout) : layout_(std::move(layout)) {
  size_t total = 0;
  offsets_.reserve(layout_.size());
  for (const ParamShape& s : layout_) {
    offsets_.push_back(total);
    total += s.count();
  }
  values_.assign(total, 0.0);
}

std::span<double> ParamVector::entry(size_t i) {
  return {values_.data() + offsets_[i], layout_[i].count()};
}

std::span<const double> ParamVector::entry(size_t i) const {
  return {values_.data() + offsets_[i], layout_[i].count()};
}

void ParamVector::set_flat(std::span<const double> v) {
  if (v.size() != values_.size()) throw std::invalid_argument("ParamVector: flat size mismatch");
  std::memcpy(values_.data(), v.data(), v.size() * sizeof(double));
}

void ParamVector::fill(double v) {
  for (double& x : values_) x = v;
}

void ParamVector::polyak_from(const ParamVector& online, double tau) {
  if (!same_layout(online)) throw std::invalid_argument("ParamVector: layout mismatch in polyak update");
  for (size_t i = 0; i < values_.size(); ++i) {
    values_[i] = (1.0 - tau) * values_[i] + tau * online.values_[i];
  }
}

namespace io {

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                        static_cast<unsigned char>(v >> 16), static_cast<unsigned char>(v >> 24)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("ParamVector: truncated stream");
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 | uint32_t(b[3]) << 24;
}

void put_f64(std::ostream& os, double v) {
  uint64_t u;
  std::memcpy(&u, &v, 8);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(u >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

double get_f64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("ParamVector: truncated stream");
  uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= uint64_t(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

void put_u64(std::ostream& os, uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("ParamVector: truncated stream");
  uint64_t u = 0;
  for (int i = 0; i < 8; ++i) u |= uint64_t(b[i]) << (8 * i);
  return u;
}

}  // namespace io

namespace {
constexpr char kMagic[4] = {'P', 'V', 'E', 'C'};
constexpr uint32_t kVersion = 1;
}  // namespace

using io::get_f64;
using io::get_u32;
using io::put_f64;
using io::put_u32;

void ParamVector::save_binary(std::ostream& os) const {
  os.write(kMagic, 4);
  put_u32(os, kVersion);
  put_u32(os, static_cast<uint32_t>(layout_.size()));
  for (const ParamShape& s : layout_) {
    put_u32(os, s.rows);
    put_u32(os, s.cols);
  }
  for (double v : values_) put_f64(os, v);
}

ParamVector ParamVector::load_binary(std::istream& is) {
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("ParamVector: bad magic");
  uint32_t version = get_u32(is);
  if (version != kVersion) throw std::runtime_error("ParamVector: unsupported version");
  uint32_t n = get_u32(is);
  std::vector<ParamShape> layout(n);
  for (uint32_t i = 0; i < n; ++i) {
    layout[i].rows = get_u32(is);
    layout[i].cols = get_u32(is);
  }
  ParamVector pv(std::move(layout));
  for (double& v : pv.values_) v = get_f64(is);
  return pv;
}

void ParamVector::save_binary_file(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("ParamVector: cannot open " + path);
  save_binary(os);
}

ParamVector ParamVector::load_binary_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("ParamVector: cannot open " + path);
  return load_binary(is);
}

void ParamVector::save_text_file(const std::string& path) const {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("ParamVector: cannot open " + path);
  os << std::setprecision(17);
  for (double v : values_) os << v << "\n";
}

}  // namespace pave
