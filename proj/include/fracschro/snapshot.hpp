#pragma once

#include <string>

#include "fracschro/grid.hpp"

namespace fracschro {

// Little-endian "FRSC" snapshot: u32 version, u32 d, u32 N, u32 M, f64 L, f64 T,
// then M * N^d complex128 values, time-major and row-major in space.
constexpr unsigned kSnapshotVersion = 1;

void write_snapshot(const std::string& path, const FieldPath& path_data);
FieldPath read_snapshot(const std::string& path);

}  // namespace fracschro
