#include <cstdint>
#include <cstring>
#include <fstream>

#include "mfsc/errors.hpp"
#include "mfsc/grid_ops.hpp"

namespace mfsc {

namespace {

constexpr char kMagic[8] = {'M', 'F', 'S', 'C', 'G', 'R', 'I', 'D'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void put(std::ofstream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    return v;
}

}  // namespace

void write_snapshot(const std::string& path, const GridFunction& f, double t) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open snapshot for writing: " + path);
    const auto& s = f.spec();
    os.write(kMagic, sizeof kMagic);
    put(os, kVersion);
    put(os, static_cast<std::uint32_t>(s.nx));
    put(os, static_cast<std::uint32_t>(s.nv));
    for (double v : {s.x_min, s.x_max, s.v_min, s.v_max, t}) put(os, v);
    os.write(reinterpret_cast<const char*>(f.values().data()),
             static_cast<std::streamsize>(f.values().size() * sizeof(double)));
    if (!os) throw Error("snapshot write failed: " + path);
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open snapshot: " + path);
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw Error("not a grid snapshot: " + path);
    if (get<std::uint32_t>(is) != kVersion) throw Error("unsupported snapshot version: " + path);
    GridSpec s;
    s.nx = static_cast<int>(get<std::uint32_t>(is));
    s.nv = static_cast<int>(get<std::uint32_t>(is));
    s.x_min = get<double>(is);
    s.x_max = get<double>(is);
    s.v_min = get<double>(is);
    s.v_max = get<double>(is);
    Snapshot out;
    out.t = get<double>(is);
    s.validate();
    std::vector<double> values(s.size());
    is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!is) throw Error("truncated snapshot: " + path);
    out.f = GridFunction(s, std::move(values));
    return out;
}

}  // namespace mfsc
