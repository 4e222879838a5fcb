#include "zsm/core/io.hpp"
#include "zsm/diffusion/diffusion.hpp"

#include <fstream>

namespace zsm {

namespace {

constexpr char magic[4] = {'Z', 'S', 'M', 'T'};
constexpr std::uint8_t version = 1;

void put_grid(std::ostream& out, const Grid& g) {
  binary::put_u8(out, static_cast<std::uint8_t>(g.topology()));
  binary::put_f64(out, g.radius());
  for (int a = 0; a < 2; ++a) {
    const Axis ax = a < g.dim() ? g.axis(a) : Axis{};
    binary::put_f64(out, ax.origin);
    binary::put_f64(out, ax.spacing);
    binary::put_u32(out, static_cast<std::uint32_t>(ax.count));
    binary::put_u8(out, static_cast<std::uint8_t>(ax.boundary));
  }
}

GridPtr get_grid(std::istream& in) {
  const auto topology = static_cast<Topology>(binary::get_u8(in));
  const double radius = binary::get_f64(in);
  Axis ax[2];
  for (auto& a : ax) {
    a.origin = binary::get_f64(in);
    a.spacing = binary::get_f64(in);
    a.count = static_cast<int>(binary::get_u32(in));
    a.boundary = static_cast<Boundary>(binary::get_u8(in));
  }
  switch (topology) {
    case Topology::line:
      return Grid::line(ax[0].origin, ax[0].origin + ax[0].length(), ax[0].count, ax[0].boundary);
    case Topology::ring: return Grid::ring(radius, ax[0].count);
    case Topology::plane: return Grid::plane(ax[0], ax[1]);
    case Topology::polar: return Grid::polar(radius, ax[0].count, ax[1].count, ax[0].boundary);
  }
  throw Error("trajectory file: unknown grid topology");
}

void put_block(std::ostream& out, const Eigen::ArrayXXd& q) {
  for (Index i = 0; i < q.rows(); ++i)
    for (Index a = 0; a < q.cols(); ++a) binary::put_f64(out, q(i, a));
}

Eigen::ArrayXXd get_block(std::istream& in, Index n, int d) {
  Eigen::ArrayXXd q(n, d);
  for (Index i = 0; i < n; ++i)
    for (int a = 0; a < d; ++a) q(i, a) = binary::get_f64(in);
  return q;
}

}  // namespace

void write_trajectory(const std::string& path, const TrajectoryBundle& b) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  const Index n = b.particles();
  const int d = b.dim();
  out.write(magic, 4);
  binary::put_u8(out, version);
  binary::put_u8(out, b.direction == Direction::forward ? 0 : 1);
  binary::put_u8(out, b.increments.empty() ? 0 : 1);
  binary::put_f64(out, b.dt);
  binary::put_u64(out, static_cast<std::uint64_t>(n));
  binary::put_u32(out, static_cast<std::uint32_t>(d));
  binary::put_u32(out, static_cast<std::uint32_t>(b.frame_stride));
  binary::put_u64(out, b.seed);
  put_grid(out, *b.grid);
  binary::put_u64(out, static_cast<std::uint64_t>(b.removed));
  binary::put_u32(out, static_cast<std::uint32_t>(b.frames.size()));
  for (std::size_t f = 0; f < b.frames.size(); ++f) {
    binary::put_f64(out, b.times[f]);
    for (Index i = 0; i < n; ++i) binary::put_u8(out, b.alive[f](i) ? 1 : 0);
    put_block(out, b.frames[f]);
  }
  binary::put_u32(out, static_cast<std::uint32_t>(b.increments.size()));
  for (const auto& w : b.increments) put_block(out, w);
  binary::put_u64(out, static_cast<std::uint64_t>(b.wiener.samples));
  for (int a = 0; a < 2; ++a) binary::put_f64(out, b.wiener.sum(a));
  for (int e = 0; e < 4; ++e) binary::put_f64(out, b.wiener.outer(e));
  if (!out) throw Error("write failed for '" + path + "'");
}

TrajectoryBundle read_trajectory(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  char m[4];
  if (!in.read(m, 4) || !std::equal(m, m + 4, magic)) throw Error("'" + path + "' is not a ZSMT file");
  if (binary::get_u8(in) != version) throw Error("'" + path + "': unsupported ZSMT version");
  TrajectoryBundle b;
  b.direction = binary::get_u8(in) == 0 ? Direction::forward : Direction::backward;
  binary::get_u8(in);
  b.dt = binary::get_f64(in);
  const auto n = static_cast<Index>(binary::get_u64(in));
  const int d = static_cast<int>(binary::get_u32(in));
  b.frame_stride = static_cast<int>(binary::get_u32(in));
  b.seed = binary::get_u64(in);
  b.grid = get_grid(in);
  b.removed = static_cast<Index>(binary::get_u64(in));
  const std::uint32_t frames = binary::get_u32(in);
  for (std::uint32_t f = 0; f < frames; ++f) {
    b.times.push_back(binary::get_f64(in));
    AliveFlags alive(n);
    for (Index i = 0; i < n; ++i) alive(i) = binary::get_u8(in) != 0;
    b.alive.push_back(std::move(alive));
    b.frames.push_back(get_block(in, n, d));
  }
  const std::uint32_t steps = binary::get_u32(in);
  for (std::uint32_t s = 0; s < steps; ++s) b.increments.push_back(get_block(in, n, d));
  b.wiener.samples = static_cast<Index>(binary::get_u64(in));
  for (int a = 0; a < 2; ++a) b.wiener.sum(a) = binary::get_f64(in);
  for (int e = 0; e < 4; ++e) b.wiener.outer(e) = binary::get_f64(in);
  return b;
}

}  // namespace zsm
