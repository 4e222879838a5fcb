#pragma once

#include "zsm/core/field.hpp"

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

namespace zsm {

/// CSV with node coordinates followed by the value columns. Masked nodes are
/// written with a trailing `masked` flag of 1.
void write_csv(const std::string& path, const ScalarField& f, const std::string& name = "value");
void write_csv(const std::string& path, const VectorField& f, const std::string& name = "w");
void write_csv(const std::string& path, const ComplexField& f);

/// Plain column table; all columns must have equal length.
void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& columns);

enum class FieldKind : std::uint8_t { scalar = 0, vector = 1, complex = 2 };

/// Writer for the little-endian field dump:
///
///   "ZSMF" | u8 version=1 | u8 kind | u8 topology | u8 components |
///   u32 n0 | u32 n1 | 2 x (f64 origin, f64 spacing, u8 boundary, u8 cell_centred) |
///   repeated { f64 time | f64 payload[n0 * n1 * values_per_node] }
///
/// Complex payloads interleave (re, im); vector payloads are node-major.
class FieldDumpWriter {
 public:
  FieldDumpWriter(const std::string& path, const Grid& grid, FieldKind kind, int components);
  void append(double time, const ScalarField& f);
  void append(double time, const VectorField& f);
  void append(double time, const ComplexField& f);
  int frames() const { return frames_; }

 private:
  void write_frame(double time, const std::vector<double>& payload);

  std::ofstream out_;
  FieldKind kind_;
  int components_;
  Index nodes_;
  int frames_ = 0;
};

struct FieldDump {
  FieldKind kind = FieldKind::scalar;
  Topology topology = Topology::line;
  int components = 1;
  std::array<std::uint32_t, 2> counts{0, 1};
  std::vector<double> times;
  std::vector<std::vector<double>> payloads;
};

FieldDump read_field_dump(const std::string& path);

/// Little-endian primitives shared by the binary formats.
namespace binary {
void put_u8(std::ostream& out, std::uint8_t v);
void put_u32(std::ostream& out, std::uint32_t v);
void put_u64(std::ostream& out, std::uint64_t v);
void put_f64(std::ostream& out, double v);
std::uint8_t get_u8(std::istream& in);
std::uint32_t get_u32(std::istream& in);
std::uint64_t get_u64(std::istream& in);
double get_f64(std::istream& in);
}  // namespace binary

}  // namespace zsm
