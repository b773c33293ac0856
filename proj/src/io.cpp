#include "hallmhd/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>

namespace hallmhd {

namespace {

void ensure_parent_dir(const std::string& path) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
}

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool get(std::ifstream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  return static_cast<bool>(in);
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) return buf;
  }
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_snapshot(const std::string& path, const GridField& f) {
  if (f.domain.M < 1) throw ConfigError("write_snapshot: empty field");
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("write_snapshot: cannot open '" + path + "' for writing");
  out.write("HMHD", 4);
  put(out, kSnapshotVersion);
  put(out, static_cast<std::uint32_t>(f.domain.M));
  put(out, static_cast<std::uint32_t>(f.ncomp));
  put(out, static_cast<std::uint64_t>(0));
  put(out, f.domain.L);
  out.write(reinterpret_cast<const char*>(f.v.data()),
            static_cast<std::streamsize>(f.v.size() * sizeof(double)));
  if (!out) throw ConfigError("write_snapshot: failed writing '" + path + "'");
}

GridField read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("read_snapshot: cannot open '" + path + "'");
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "HMHD", 4) != 0)
    throw ConfigError("read_snapshot: '" + path + "' is not a field snapshot (bad magic)");
  std::uint32_t version = 0, m = 0, rank = 0;
  std::uint64_t reserved = 0;
  double L = 0.0;
  if (!get(in, version) || !get(in, m) || !get(in, rank) || !get(in, reserved) || !get(in, L))
    throw ConfigError("read_snapshot: '" + path + "' has a truncated header");
  if (version != kSnapshotVersion)
    throw ConfigError("read_snapshot: '" + path + "' has unsupported format version " +
                      std::to_string(version));
  if (rank != 1 && rank != 3)
    throw ConfigError("read_snapshot: '" + path + "' has unsupported rank " +
                      std::to_string(rank));
  if (m < 1 || m > (1u << 16))
    throw ConfigError("read_snapshot: '" + path + "' has invalid grid size");
  if (!(L > 0.0) || !std::isfinite(L))
    throw ConfigError("read_snapshot: '" + path + "' has invalid box size");

  GridField f(TorusDomain{L, static_cast<int>(m)}, static_cast<int>(rank));
  in.read(reinterpret_cast<char*>(f.v.data()),
          static_cast<std::streamsize>(f.v.size() * sizeof(double)));
  if (!in || static_cast<std::size_t>(in.gcount()) != f.v.size() * sizeof(double))
    throw ConfigError("read_snapshot: '" + path + "' is truncated");
  in.peek();
  if (!in.eof()) throw ConfigError("read_snapshot: '" + path + "' has trailing bytes");
  return f;
}

void write_ledger_csv(const std::string& path, const std::vector<LedgerRow>& rows) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("write_ledger_csv: cannot open '" + path + "'");
  out << "t,E_kin,E_mag,D_visc_cum,D_resist_cum,residual\n";
  for (const auto& r : rows)
    out << format_double(r.t) << ',' << format_double(r.e_kin) << ','
        << format_double(r.e_mag) << ',' << format_double(r.d_visc) << ','
        << format_double(r.d_resist) << ',' << format_double(r.residual) << '\n';
  if (!out) throw ConfigError("write_ledger_csv: failed writing '" + path + "'");
}

void write_levelset_csv(const std::string& path, const std::vector<LevelSetRow>& rows) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("write_levelset_csv: cannot open '" + path + "'");
  out << "t,bin_lo,bin_hi,volume\n";
  for (const auto& r : rows)
    out << format_double(r.t) << ',' << format_double(r.bin_lo) << ','
        << format_double(r.bin_hi) << ',' << format_double(r.volume) << '\n';
  if (!out) throw ConfigError("write_levelset_csv: failed writing '" + path + "'");
}

#ifndef HALLMHD_VERSION_STRING
#define HALLMHD_VERSION_STRING "0.1.0-unversioned"
#endif

std::string version_string() { return HALLMHD_VERSION_STRING; }

}  // namespace hallmhd
