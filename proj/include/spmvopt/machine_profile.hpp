#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>

namespace spmvopt {

/// Sustainable bandwidths and cache geometry of the machine.
struct MachineProfile {
  double bmax_main = 0.0;  ///< bytes/s, working set well beyond the LLC
  double bmax_llc = 0.0;   ///< bytes/s, working set resident in the LLC
  std::size_t llc_bytes = 0;
  std::size_t cache_line_bytes = 64;
  std::size_t nthreads = 1;
  std::string fingerprint;

  bool valid() const {
    return bmax_main > 0.0 && bmax_llc >= bmax_main && llc_bytes > 0 && cache_line_bytes > 0 && nthreads > 0;
  }
};

struct CacheGeometry {
  std::size_t llc_bytes = 0;
  std::size_t cache_line_bytes = 0;
};

/// Last-level cache size and line size from sysconf or sysfs; falls back to
/// 8 MiB / 64 B when the platform reports nothing.
CacheGeometry detect_cache_geometry();

/// CPU model, logical CPU count and host name, joined into one string.
std::string machine_fingerprint();

/// Worker count: SPMV_THREADS when set, otherwise the hardware concurrency.
std::size_t default_thread_count();

/// Flat key=value text file holding the machine profile and tuned rule
/// parameters. Lines starting with '#' are comments.
class ProfileStore {
 public:
  static ProfileStore load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  void set(const std::string& key, const std::string& value) { entries_[key] = value; }
  void set(const std::string& key, double value);
  std::optional<std::string> get(const std::string& key) const;
  std::optional<double> get_double(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

void store_machine_profile(ProfileStore& store, const MachineProfile& prof);
/// Throws std::runtime_error when a required key is missing.
MachineProfile load_machine_profile(const ProfileStore& store);

/// Default location: $SPMV_PROFILE, else ./spmv-machine-profile.txt.
std::filesystem::path default_profile_path();

}  // namespace spmvopt
