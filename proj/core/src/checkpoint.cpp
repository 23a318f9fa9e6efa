#include "nflow/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace nflow {

namespace {

constexpr char kMagic[8] = {'N', 'F', 'L', 'W', '0', '0', '0', '1'};

template <typename T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

}  // namespace

void write_checkpoint(const std::string& path, const MapField& u, const DomainSpec& domain,
                      double time, const std::string& params_json) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("checkpoint: cannot open " + path);
  os.write(kMagic, 8);
  put<std::uint8_t>(os, domain.kind == DomainKind::Torus ? 0 : 1);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(domain.dim));
  put<std::uint8_t>(os, static_cast<std::uint8_t>(u.L));
  put<double>(os, domain.kind == DomainKind::Torus ? domain.extent : 1.0);
  for (int i = 0; i < domain.dim; ++i)
    put<std::uint32_t>(os, static_cast<std::uint32_t>(domain.resolution[i]));
  put<double>(os, time);
  os.write(reinterpret_cast<const char*>(u.data.data()),
           static_cast<std::streamsize>(u.data.size() * sizeof(double)));
  if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
  std::ofstream js(path + ".json", std::ios::trunc);
  js << params_json << "\n";
}

Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("checkpoint: bad magic in " + path);
  Checkpoint cp;
  std::uint8_t kind = get<std::uint8_t>(is);
  cp.domain.kind = kind == 0 ? DomainKind::Torus : DomainKind::Sphere2;
  cp.domain.dim = get<std::uint8_t>(is);
  int L = get<std::uint8_t>(is);
  cp.domain.extent = get<double>(is);
  std::int64_t N = 1;
  for (int i = 0; i < cp.domain.dim; ++i) {
    cp.domain.resolution[i] = static_cast<int>(get<std::uint32_t>(is));
    N *= cp.domain.resolution[i];
  }
  cp.time = get<double>(is);
  cp.u = MapField(N, L);
  is.read(reinterpret_cast<char*>(cp.u.data.data()),
          static_cast<std::streamsize>(cp.u.data.size() * sizeof(double)));
  if (!is) throw std::runtime_error("checkpoint: truncated data in " + path);
  std::ifstream js(path + ".json");
  if (js) {
    std::string line, all;
    while (std::getline(js, line)) all += line + "\n";
    while (!all.empty() && (all.back() == '\n' || all.back() == '\r')) all.pop_back();
    cp.params_json = all;
  }
  return cp;
}

}  // namespace nflow
