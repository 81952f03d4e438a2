#include "fracschro/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace fracschro {

static_assert(std::endian::native == std::endian::little, "snapshot IO assumes a little-endian host");

namespace {

template <class T>
void put(std::ofstream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("snapshot: truncated header");
    return v;
}

}  // namespace

void write_snapshot(const std::string& path, const FieldPath& p) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("snapshot: cannot open " + path);
    os.write("FRSC", 4);
    put<std::uint32_t>(os, kSnapshotVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(p.grid.d));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(p.grid.N));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(p.nodes()));
    put<double>(os, p.grid.L);
    put<double>(os, p.grid.T);
    for (const auto& f : p.fields)
        os.write(reinterpret_cast<const char*>(f.values.data()),
                 static_cast<std::streamsize>(f.values.size() * sizeof(cplx)));
    if (!os) throw std::runtime_error("snapshot: write failed for " + path);
}

FieldPath read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("snapshot: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "FRSC", 4) != 0) throw std::runtime_error("snapshot: bad magic");
    if (get<std::uint32_t>(is) != kSnapshotVersion) throw std::runtime_error("snapshot: unsupported version");
    GridSpec g;
    g.d = static_cast<int>(get<std::uint32_t>(is));
    g.N = static_cast<int>(get<std::uint32_t>(is));
    g.M = static_cast<int>(get<std::uint32_t>(is));
    g.L = get<double>(is);
    g.T = get<double>(is);
    g.validate();
    FieldPath p(g);
    for (auto& f : p.fields) {
        is.read(reinterpret_cast<char*>(f.values.data()),
                static_cast<std::streamsize>(f.values.size() * sizeof(cplx)));
        if (!is) throw std::runtime_error("snapshot: truncated data");
    }
    return p;
}

}  // namespace fracschro
