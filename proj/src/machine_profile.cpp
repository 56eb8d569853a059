#include "spmvopt/machine_profile.hpp"

#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace spmvopt {
namespace {

std::size_t parse_sysfs_size(const std::string& text) {
  std::size_t value = 0;
  char unit = 0;
  std::istringstream in(text);
  in >> value >> unit;
  if (unit == 'K' || unit == 'k') return value * 1024;
  if (unit == 'M' || unit == 'm') return value * 1024 * 1024;
  return value;
}

std::string read_first_line(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

CacheGeometry detect_cache_geometry() {
  CacheGeometry g;
#ifdef _SC_LEVEL3_CACHE_SIZE
  long l3 = sysconf(_SC_LEVEL3_CACHE_SIZE);
  long l2 = sysconf(_SC_LEVEL2_CACHE_SIZE);
  if (l3 > 0)
    g.llc_bytes = static_cast<std::size_t>(l3);
  else if (l2 > 0)
    g.llc_bytes = static_cast<std::size_t>(l2);
#endif
#ifdef _SC_LEVEL1_DCACHE_LINESIZE
  long line = sysconf(_SC_LEVEL1_DCACHE_LINESIZE);
  if (line > 0) g.cache_line_bytes = static_cast<std::size_t>(line);
#endif
  if (g.llc_bytes == 0 || g.cache_line_bytes == 0) {
    // Highest cache index in sysfs is the last level.
    const std::filesystem::path base = "/sys/devices/system/cpu/cpu0/cache";
    std::size_t last_level = 0;
    for (int idx = 0; idx < 8; ++idx) {
      auto dir = base / ("index" + std::to_string(idx));
      if (!std::filesystem::exists(dir)) break;
      if (std::size_t sz = parse_sysfs_size(read_first_line(dir / "size")); sz > 0) last_level = sz;
      if (g.cache_line_bytes == 0) g.cache_line_bytes = parse_sysfs_size(read_first_line(dir / "coherency_line_size"));
    }
    if (g.llc_bytes == 0) g.llc_bytes = last_level;
  }
  if (g.llc_bytes == 0) g.llc_bytes = 8u << 20;
  if (g.cache_line_bytes == 0) g.cache_line_bytes = 64;
  return g;
}

std::string machine_fingerprint() {
  std::string model = "unknown-cpu";
  std::ifstream cpuinfo("/proc/cpuinfo");
  for (std::string line; std::getline(cpuinfo, line);) {
    if (line.rfind("model name", 0) == 0) {
      model = trim(line.substr(line.find(':') + 1));
      break;
    }
  }
  char host[256] = {};
  if (gethostname(host, sizeof host - 1) != 0) host[0] = '\0';
  std::ostringstream out;
  out << model << " x" << std::thread::hardware_concurrency() << " @" << (host[0] ? host : "unknown-host");
  return out.str();
}

std::size_t default_thread_count() {
  if (const char* env = std::getenv("SPMV_THREADS")) {
    char* end = nullptr;
    long n = std::strtol(env, &end, 10);
    if (end != env && n > 0) return static_cast<std::size_t>(n);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

ProfileStore ProfileStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open profile file " + path.string());
  ProfileStore store;
  std::size_t lineno = 0;
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": expected key=value");
    store.entries_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return store;
}

void ProfileStore::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write profile file " + path.string());
  out << "# spmvopt machine profile\n";
  for (const auto& [k, v] : entries_) out << k << '=' << v << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void ProfileStore::set(const std::string& key, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  entries_[key] = buf;
}

std::optional<std::string> ProfileStore::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> ProfileStore::get_double(const std::string& key) const {
  auto v = get(key);
  if (!v) return std::nullopt;
  try {
    return std::stod(*v);
  } catch (const std::exception&) {
    throw std::runtime_error("profile key '" + key + "' is not a number: " + *v);
  }
}

void store_machine_profile(ProfileStore& store, const MachineProfile& prof) {
  store.set("machine.fingerprint", prof.fingerprint);
  store.set("machine.bmax_main", prof.bmax_main);
  store.set("machine.bmax_llc", prof.bmax_llc);
  store.set("machine.llc_bytes", std::to_string(prof.llc_bytes));
  store.set("machine.cache_line_bytes", std::to_string(prof.cache_line_bytes));
  store.set("machine.nthreads", std::to_string(prof.nthreads));
}

MachineProfile load_machine_profile(const ProfileStore& store) {
  auto need = [&](const char* key) {
    auto v = store.get_double(key);
    if (!v) throw std::runtime_error(std::string("machine profile lacks '") + key + "'");
    return *v;
  };
  MachineProfile p;
  p.bmax_main = need("machine.bmax_main");
  p.bmax_llc = need("machine.bmax_llc");
  p.llc_bytes = static_cast<std::size_t>(need("machine.llc_bytes"));
  p.cache_line_bytes = static_cast<std::size_t>(need("machine.cache_line_bytes"));
  p.nthreads = static_cast<std::size_t>(need("machine.nthreads"));
  p.fingerprint = store.get("machine.fingerprint").value_or("");
  if (!p.valid()) throw std::runtime_error("machine profile is inconsistent (bmax_llc < bmax_main or zero field)");
  return p;
}

std::filesystem::path default_profile_path() {
  if (const char* env = std::getenv("SPMV_PROFILE")) return env;
  return "spmv-machine-profile.txt";
}

}  // namespace spmvopt
