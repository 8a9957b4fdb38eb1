#include "gcl/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace gcl {

namespace {

constexpr char kMagic[8] = {'G', 'C', 'L', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "checkpoint container assumes a little-endian host");

template <typename T>
void write_pod(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("checkpoint: truncated file");
    return v;
}

void write_doubles(std::ostream& os, const double* p, std::size_t n) {
    os.write(reinterpret_cast<const char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::istream& is, double* p, std::size_t n) {
    is.read(reinterpret_cast<char*>(p), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw std::runtime_error("checkpoint: truncated file");
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamSet& params, const Adam* adam) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + path + " for writing");
    os.write(kMagic, sizeof(kMagic));
    write_pod<std::uint32_t>(os, kVersion);
    write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(params.size()));
    for (const auto& it : params.items()) {
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(it.name.size()));
        os.write(it.name.data(), static_cast<std::streamsize>(it.name.size()));
        write_pod<std::uint32_t>(os, static_cast<std::uint32_t>(it.tensor.rank()));
        for (std::size_t e : it.tensor.shape()) write_pod<std::uint64_t>(os, e);
        write_doubles(os, it.tensor.data(), it.tensor.size());
    }
    write_pod<std::uint8_t>(os, adam ? 1 : 0);
    if (adam) {
        Adam& a = const_cast<Adam&>(*adam);
        write_pod<std::uint64_t>(os, a.step_count());
        const AdamConfig& c = a.config();
        write_pod<double>(os, c.lr);
        write_pod<double>(os, c.beta1);
        write_pod<double>(os, c.beta2);
        write_pod<double>(os, c.eps);
        write_pod<double>(os, c.weight_decay);
        for (const auto& m : a.moments1()) write_doubles(os, m.data(), m.size());
        for (const auto& v : a.moments2()) write_doubles(os, v.data(), v.size());
    }
    if (!os) throw std::runtime_error("checkpoint: write failed for " + path);
}

void load_checkpoint(const std::string& path, ParamSet& params, Adam* adam) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    const auto version = read_pod<std::uint32_t>(is);
    if (version != kVersion) throw std::runtime_error("checkpoint: unsupported version");
    const auto count = read_pod<std::uint32_t>(is);
    if (count != params.size())
        throw std::runtime_error("checkpoint: parameter count mismatch");
    for (std::size_t pi = 0; pi < count; ++pi) {
        const auto nlen = read_pod<std::uint32_t>(is);
        std::string name(nlen, '\0');
        is.read(name.data(), nlen);
        const auto rank = read_pod<std::uint32_t>(is);
        Shape shape(rank);
        for (auto& e : shape) e = read_pod<std::uint64_t>(is);
        Tensor* t = params.find(name);
        if (!t) throw std::runtime_error("checkpoint: unknown parameter " + name);
        if (t->shape() != shape)
            throw std::runtime_error("checkpoint: shape mismatch for " + name);
        read_doubles(is, t->data(), t->size());
    }
    const auto has_adam = read_pod<std::uint8_t>(is);
    if (adam && !has_adam) throw std::runtime_error("checkpoint: no optimizer state stored");
    if (has_adam) {
        const auto step = read_pod<std::uint64_t>(is);
        for (int i = 0; i < 5; ++i) (void)read_pod<double>(is);  // config echoed, not restored
        if (adam) {
            adam->set_step_count(step);
            for (auto& m : adam->moments1()) read_doubles(is, m.data(), m.size());
            for (auto& v : adam->moments2()) read_doubles(is, v.data(), v.size());
        }
    }
}

std::vector<std::pair<std::string, Shape>> peek_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("checkpoint: bad magic in " + path);
    (void)read_pod<std::uint32_t>(is);
    const auto count = read_pod<std::uint32_t>(is);
    std::vector<std::pair<std::string, Shape>> out;
    out.reserve(count);
    for (std::size_t pi = 0; pi < count; ++pi) {
        const auto nlen = read_pod<std::uint32_t>(is);
        std::string name(nlen, '\0');
        is.read(name.data(), nlen);
        const auto rank = read_pod<std::uint32_t>(is);
        Shape shape(rank);
        std::size_t numel = 1;
        for (auto& e : shape) {
            e = read_pod<std::uint64_t>(is);
            numel *= e;
        }
        is.seekg(static_cast<std::streamoff>(numel * sizeof(double)), std::ios::cur);
        out.emplace_back(std::move(name), std::move(shape));
    }
    return out;
}

}  // namespace gcl
