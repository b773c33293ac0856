// Run artifacts: binary field snapshots, CSV diagnostics, version string.
//
// Snapshot layout (little-endian), 32-byte header then the samples:
//   offset  0: magic "HMHD"
//   offset  4: u32 format version (currently 1)
//   offset  8: u32 grid size M
//   offset 12: u32 rank (1 scalar, 3 vector)
//   offset 16: u64 reserved, written as zero
//   offset 24: f64 box size L
//   offset 32: rank * M^3 float64 samples, component-planar, row-major with
//              the third coordinate fastest.
//
// CSV columns: ledger  t,E_kin,E_mag,D_visc_cum,D_resist_cum,residual
//              level sets  t,bin_lo,bin_hi,volume
// All numbers are printed with 17 significant digits, so identical runs
// produce identical bytes and parsing recovers the exact doubles.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hallmhd/driver.hpp"
#include "hallmhd/geometry.hpp"

namespace hallmhd {

inline constexpr std::uint32_t kSnapshotVersion = 1;

void write_snapshot(const std::string& path, const GridField& f);
GridField read_snapshot(const std::string& path);

void write_ledger_csv(const std::string& path, const std::vector<LedgerRow>& rows);

struct LevelSetRow {
  double t = 0.0, bin_lo = 0.0, bin_hi = 0.0, volume = 0.0;
};
void write_levelset_csv(const std::string& path, const std::vector<LevelSetRow>& rows);

// Shortest decimal form that parses back to the exact double.
std::string format_double(double x);

// Build-time version (git describe when available).
std::string version_string();

}  // namespace hallmhd
