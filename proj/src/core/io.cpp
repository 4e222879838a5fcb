#include "zsm/core/io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <iomanip>

namespace zsm {

namespace binary {

namespace {

template <class T>
void put(std::ostream& out, T v) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  out.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  unsigned char b[sizeof(T)];
  if (!in.read(reinterpret_cast<char*>(b), sizeof(T))) throw Error("binary read: unexpected end of file");
  if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
  T v;
  std::memcpy(&v, b, sizeof(T));
  return v;
}

}  // namespace

void put_u8(std::ostream& out, std::uint8_t v) { put(out, v); }
void put_u32(std::ostream& out, std::uint32_t v) { put(out, v); }
void put_u64(std::ostream& out, std::uint64_t v) { put(out, v); }
void put_f64(std::ostream& out, double v) { put(out, v); }
std::uint8_t get_u8(std::istream& in) { return get<std::uint8_t>(in); }
std::uint32_t get_u32(std::istream& in) { return get<std::uint32_t>(in); }
std::uint64_t get_u64(std::istream& in) { return get<std::uint64_t>(in); }
double get_f64(std::istream& in) { return get<double>(in); }

}  // namespace binary

namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << std::setprecision(17);
  return out;
}

void coordinate_header(std::ostream& out, const Grid& g) {
  if (g.topology() == Topology::polar) out << "r,phi";
  else if (g.topology() == Topology::ring) out << "s";
  else if (g.dim() == 1) out << "x";
  else out << "x,y";
}

void coordinates(std::ostream& out, const Grid& g, Index n) {
  out << g.coordinate(n, 0);
  if (g.dim() == 2) out << ',' << g.coordinate(n, 1);
}

}  // namespace

void write_csv(const std::string& path, const ScalarField& f, const std::string& name) {
  auto out = open_csv(path);
  coordinate_header(out, f.grid());
  out << ',' << name << ",masked\n";
  for (Index n = 0; n < f.size(); ++n) {
    coordinates(out, f.grid(), n);
    out << ',' << f.values()(n) << ',' << int(f.masked(n)) << '\n';
  }
}

void write_csv(const std::string& path, const VectorField& f, const std::string& name) {
  auto out = open_csv(path);
  coordinate_header(out, f.grid());
  for (int c = 0; c < f.components(); ++c) out << ',' << name << c;
  out << ",masked\n";
  for (Index n = 0; n < f.size(); ++n) {
    coordinates(out, f.grid(), n);
    for (int c = 0; c < f.components(); ++c) out << ',' << f.values()(n, c);
    out << ',' << int(f.masked(n)) << '\n';
  }
}

void write_csv(const std::string& path, const ComplexField& f) {
  auto out = open_csv(path);
  coordinate_header(out, f.grid());
  out << ",re,im,masked\n";
  for (Index n = 0; n < f.size(); ++n) {
    coordinates(out, f.grid(), n);
    out << ',' << f.values()(n).real() << ',' << f.values()(n).imag() << ',' << int(f.masked(n))
        << '\n';
  }
}

void write_table_csv(const std::string& path, const std::vector<std::string>& header,
                     const std::vector<std::vector<double>>& columns) {
  if (header.size() != columns.size()) throw InvalidArgument("write_table_csv: header/column mismatch");
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (const auto& c : columns)
    if (c.size() != rows) throw InvalidArgument("write_table_csv: ragged columns");
  auto out = open_csv(path);
  for (std::size_t c = 0; c < header.size(); ++c) out << (c ? "," : "") << header[c];
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c][r];
    out << '\n';
  }
}

FieldDumpWriter::FieldDumpWriter(const std::string& path, const Grid& grid, FieldKind kind,
                                 int components)
    : out_(path, std::ios::binary), kind_(kind), components_(components), nodes_(grid.size()) {
  if (!out_) throw Error("cannot write '" + path + "'");
  out_.write("ZSMF", 4);
  binary::put_u8(out_, 1);
  binary::put_u8(out_, static_cast<std::uint8_t>(kind));
  binary::put_u8(out_, static_cast<std::uint8_t>(grid.topology()));
  binary::put_u8(out_, static_cast<std::uint8_t>(components));
  binary::put_u32(out_, static_cast<std::uint32_t>(grid.count(0)));
  binary::put_u32(out_, static_cast<std::uint32_t>(grid.count(1)));
  for (int a = 0; a < 2; ++a) {
    const Axis ax = a < grid.dim() ? grid.axis(a) : Axis{0.0, 1.0, 1, Boundary::reflecting, false};
    binary::put_f64(out_, ax.origin);
    binary::put_f64(out_, ax.spacing);
    binary::put_u8(out_, static_cast<std::uint8_t>(ax.boundary));
    binary::put_u8(out_, ax.cell_centered ? 1 : 0);
  }
}

void FieldDumpWriter::write_frame(double time, const std::vector<double>& payload) {
  binary::put_f64(out_, time);
  for (double v : payload) binary::put_f64(out_, v);
  ++frames_;
}

void FieldDumpWriter::append(double time, const ScalarField& f) {
  if (kind_ != FieldKind::scalar || f.size() != nodes_) throw InvalidArgument("FieldDumpWriter: kind mismatch");
  write_frame(time, {f.values().data(), f.values().data() + f.size()});
}

void FieldDumpWriter::append(double time, const VectorField& f) {
  if (kind_ != FieldKind::vector || f.size() != nodes_ || f.components() != components_)
    throw InvalidArgument("FieldDumpWriter: kind mismatch");
  std::vector<double> p;
  p.reserve(static_cast<std::size_t>(f.size() * components_));
  for (Index n = 0; n < f.size(); ++n)
    for (int c = 0; c < components_; ++c) p.push_back(f.values()(n, c));
  write_frame(time, p);
}

void FieldDumpWriter::append(double time, const ComplexField& f) {
  if (kind_ != FieldKind::complex || f.size() != nodes_) throw InvalidArgument("FieldDumpWriter: kind mismatch");
  std::vector<double> p;
  p.reserve(static_cast<std::size_t>(2 * f.size()));
  for (Index n = 0; n < f.size(); ++n) {
    p.push_back(f.values()(n).real());
    p.push_back(f.values()(n).imag());
  }
  write_frame(time, p);
}

FieldDump read_field_dump(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "ZSMF", 4) != 0) throw Error("not a ZSMF file");
  if (binary::get_u8(in) != 1) throw Error("unsupported ZSMF version");
  FieldDump d;
  d.kind = static_cast<FieldKind>(binary::get_u8(in));
  d.topology = static_cast<Topology>(binary::get_u8(in));
  d.components = binary::get_u8(in);
  d.counts = {binary::get_u32(in), binary::get_u32(in)};
  for (int a = 0; a < 2; ++a) {
    binary::get_f64(in);
    binary::get_f64(in);
    binary::get_u8(in);
    binary::get_u8(in);
  }
  const std::size_t per_node = d.kind == FieldKind::complex ? 2 : d.kind == FieldKind::vector ? d.components : 1;
  const std::size_t n = static_cast<std::size_t>(d.counts[0]) * d.counts[1] * per_node;
  while (in.peek() != std::char_traits<char>::eof()) {
    d.times.push_back(binary::get_f64(in));
    std::vector<double> p(n);
    for (auto& v : p) v = binary::get_f64(in);
    d.payloads.push_back(std::move(p));
  }
  return d;
}

}  // namespace zsm
