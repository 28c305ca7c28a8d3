#include "bbm/run_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace bbm {

namespace {

constexpr std::array<char, 8> kMagic{'B', 'B', 'M', 'R', 'U', 'N', 0, 0};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kNoParent = 0xffffffffU;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.put(static_cast<char>(v)); }
  void u32(std::uint32_t v) { bytes(v, 4); }
  void u64(std::uint64_t v) { bytes(v, 8); }
  void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

 private:
  void bytes(std::uint64_t v, int n) {
    char buf[8];
    for (int i = 0; i < n; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
    out_.write(buf, n);
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(bytes(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(bytes(4)); }
  std::uint64_t u64() { return bytes(8); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }

 private:
  std::uint64_t bytes(int n) {
    unsigned char buf[8];
    if (!in_.read(reinterpret_cast<char*>(buf), n)) throw std::runtime_error("read_run: truncated input");
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  std::istream& in_;
};

}  // namespace

void write_run(std::ostream& out, const BbmRun& run) {
  out.write(kMagic.data(), kMagic.size());
  Writer w(out);
  w.u32(kVersion);
  const SimConfig& c = run.config();
  w.i32(c.dimension);
  w.f64(c.beta);
  w.f64(c.r0);
  w.f64(c.k);
  w.f64(c.dt);
  w.f64(c.horizon);
  w.u64(c.seed);
  w.u64(c.max_points);
  w.f64(c.eta);
  w.u8(c.resolution == PathResolution::Bridge ? 1 : 0);

  w.u64(run.particles().size());
  for (const Particle& p : run.particles()) {
    w.u32(p.id);
    w.u32(p.parent ? *p.parent : kNoParent);
    w.f64(p.birth_time);
    w.f64(p.death_time);
    w.u8(p.censored ? 1 : 0);
    w.u64(p.first_sample);
    w.u64(p.sample_count);
  }
  w.u64(run.total_points());
  for (double t : run.all_times()) w.f64(t);
  for (double x : run.all_coords()) w.f64(x);
  if (!out) throw std::runtime_error("write_run: stream error");
}

BbmRun read_run(std::istream& in) {
  std::array<char, 8> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw std::runtime_error("read_run: not a BBMRUN file");
  }
  Reader r(in);
  const std::uint32_t version = r.u32();
  if (version != kVersion) throw std::runtime_error("read_run: unsupported version " + std::to_string(version));
  SimConfig c;
  c.dimension = r.i32();
  c.beta = r.f64();
  c.r0 = r.f64();
  c.k = r.f64();
  c.dt = r.f64();
  c.horizon = r.f64();
  c.seed = r.u64();
  c.max_points = r.u64();
  c.eta = r.f64();
  c.resolution = r.u8() ? PathResolution::Bridge : PathResolution::Grid;
  if (c.dimension < 1 || c.dimension > kMaxDim) throw std::runtime_error("read_run: bad dimension");

  const std::uint64_t n_particles = r.u64();
  std::vector<Particle> particles;
  for (std::uint64_t i = 0; i < n_particles; ++i) {
    Particle p;
    p.id = r.u32();
    const std::uint32_t parent = r.u32();
    if (parent != kNoParent) p.parent = parent;
    p.birth_time = r.f64();
    p.death_time = r.f64();
    p.censored = r.u8() != 0;
    p.first_sample = r.u64();
    p.sample_count = r.u64();
    particles.push_back(p);
  }
  const std::uint64_t n = r.u64();
  std::vector<double> times;
  for (std::uint64_t i = 0; i < n; ++i) times.push_back(r.f64());
  const std::uint64_t n_coords = n * static_cast<std::uint64_t>(c.dimension);
  std::vector<double> coords;
  coords.reserve(n_coords);
  for (std::uint64_t i = 0; i < n_coords; ++i) coords.push_back(r.f64());
  return BbmRun(c, std::move(particles), std::move(times), std::move(coords));
}

void save_run(const std::filesystem::path& file, const BbmRun& run) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("save_run: cannot open " + file.string());
  write_run(out, run);
}

BbmRun load_run(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw std::runtime_error("load_run: cannot open " + file.string());
  return read_run(in);
}

}  // namespace bbm
