#include "kmn/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace kmn {

namespace {

constexpr char kMagic[8] = {'K', 'M', 'N', 'M', 'O', 'D', 'E', 'L'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "model container writes native doubles and assumes little-endian");

template <typename T>
void write_raw(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
T read_raw(std::istream& in, const std::string& what) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v))
        throw FormatError("truncated model file while reading " + what);
    return v;
}

}  // namespace

void save_model(const ClusterModel& model, bool normalized_input, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot create model file " + path);
    out.write(kMagic, sizeof kMagic);
    write_raw(out, kVersion);
    write_raw(out, static_cast<std::uint32_t>(model.k()));
    write_raw(out, static_cast<std::uint32_t>(model.dim()));
    write_raw(out, static_cast<std::uint8_t>(normalized_input ? 1 : 0));
    write_raw(out, model.alpha);
    for (double v : model.W.data()) write_raw(out, v);
    for (double v : model.b) write_raw(out, v);
    if (!out) throw FormatError("failed writing model file " + path);
}

LoadedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open model file " + path);
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
        throw FormatError("not a model file: bad magic in " + path);
    const auto version = read_raw<std::uint32_t>(in, "version");
    if (version != kVersion)
        throw FormatError("unsupported model version " + std::to_string(version));
    const auto k = read_raw<std::uint32_t>(in, "k");
    const auto d = read_raw<std::uint32_t>(in, "d");
    const auto normalized = read_raw<std::uint8_t>(in, "normalized flag");
    LoadedModel out;
    out.normalized_input = normalized != 0;
    out.model.alpha = read_raw<double>(in, "alpha");
    out.model.W = Matrix(k, d);
    for (double& v : out.model.W.data()) v = read_raw<double>(in, "W");
    out.model.b.resize(k);
    for (double& v : out.model.b) v = read_raw<double>(in, "b");
    return out;
}

}  // namespace kmn
