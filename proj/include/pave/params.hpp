#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pave {

// Little-endian scalar IO shared by the binary containers in this project.
namespace io {
void put_u32(std::ostream& os, uint32_t v);
uint32_t get_u32(std::istream& is);
void put_u64(std::ostream& os, uint64_t v);
uint64_t get_u64(std::istream& is);
void put_f64(std::ostream& os, double v);
double get_f64(std::istream& is);
}  // namespace io

struct ParamShape {
  uint32_t rows = 0, cols = 0;
  size_t count() const { return size_t(rows) * cols; }
  bool operator==(const ParamShape&) const = default;
};

// Flat 64-bit parameter storage plus the (rows, cols) layout of each entry.
// Entry order is fixed at construction; the flat view and the per-entry views
// alias the same memory.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::vector<ParamShape> layout);

  const std::vector<ParamShape>& layout() const { return layout_; }
  size_t size() const { return values_.size(); }
  size_t entries() const { return layout_.size(); }
  size_t offset(size_t entry) const { return offsets_[entry]; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::span<double> flat() { return values_; }
  std::span<const double> flat() const { return values_; }
  std::span<double> entry(size_t i);
  std::span<const double> entry(size_t i) const;

  void set_flat(std::span<const double> v);
  void fill(double v);

  bool same_layout(const ParamVector& other) const { return layout_ == other.layout_; }

  // target = (1 - tau) * target + tau * online
  void polyak_from(const ParamVector& online, double tau);

  // Binary container: "PVEC" magic, version, entry count, per-entry dims,
  // then the flat values as little-endian 64-bit floats.
  void save_binary(std::ostream& os) const;
  static ParamVector load_binary(std::istream& is);
  void save_binary_file(const std::string& path) const;
  static ParamVector load_binary_file(const std::string& path);

  // Debug export, one value per line.
  void save_text_file(const std::string& path) const;

 private:
  std::vector<ParamShape> layout_;
  std::vector<size_t> offsets_;
  std::vector<double> values_;
};

}  // namespace pave
