#include "ebl/field_io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ebl {

namespace {
constexpr char kMagic[8] = {'E', 'B', 'L', 'F', 'L', 'D', '0', '1'};
}

void write_flat_field(const std::string& path, const FlatField& f) {
  std::size_t total = 1;
  for (const auto& a : f.axes) total *= a.size();
  if (f.axes.empty() || total != std::size_t(f.data.size()))
    throw std::invalid_argument("write_flat_field: axes do not match payload");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_flat_field: cannot open " + path);
  os.write(kMagic, 8);
  const std::uint64_t rank = f.axes.size();
  os.write(reinterpret_cast<const char*>(&rank), 8);
  for (const auto& a : f.axes) {
    const std::uint64_t d = a.size();
    os.write(reinterpret_cast<const char*>(&d), 8);
  }
  for (const auto& a : f.axes) os.write(reinterpret_cast<const char*>(a.data()), std::streamsize(8 * a.size()));
  os.write(reinterpret_cast<const char*>(f.data.data()), std::streamsize(8 * f.data.size()));
  if (!os) throw std::runtime_error("write_flat_field: write failed for " + path);
}

FlatField read_flat_field(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_flat_field: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0) throw std::runtime_error("read_flat_field: bad magic in " + path);
  std::uint64_t rank = 0;
  is.read(reinterpret_cast<char*>(&rank), 8);
  if (rank == 0 || rank > 16) throw std::runtime_error("read_flat_field: bad rank");
  std::vector<std::uint64_t> dims(rank);
  is.read(reinterpret_cast<char*>(dims.data()), std::streamsize(8 * rank));
  FlatField f;
  std::size_t total = 1;
  for (auto d : dims) {
    f.axes.emplace_back(d);
    total *= d;
  }
  for (auto& a : f.axes) is.read(reinterpret_cast<char*>(a.data()), std::streamsize(8 * a.size()));
  f.data.resize(Eigen::Index(total));
  is.read(reinterpret_cast<char*>(f.data.data()), std::streamsize(8 * total));
  if (!is) throw std::runtime_error("read_flat_field: truncated file " + path);
  return f;
}

}  // namespace ebl
