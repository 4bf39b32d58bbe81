#include "scratchsim/grid/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "scratchsim/error.hpp"

namespace scratchsim::grid {
namespace {

constexpr char kMagic[4] = {'S', 'C', 'R', 'F'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out_.insert(out_.end(), b, b + n);
    }
    template <class T>
    void le(T value) {
        std::uint8_t buf[sizeof(T)];
        std::memcpy(buf, &value, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
        bytes(buf, sizeof(T));
    }
    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    std::vector<std::uint8_t> out_;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
    template <class T>
    T le(const char* what) {
        if (pos_ + sizeof(T) > in_.size()) throw FormatError(std::string("truncated field: ") + what, pos_);
        std::uint8_t buf[sizeof(T)];
        std::memcpy(buf, in_.data() + pos_, sizeof(T));
        if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(T));
        T value;
        std::memcpy(&value, buf, sizeof(T));
        pos_ += sizeof(T);
        return value;
    }
    std::size_t pos() const { return pos_; }
    std::size_t remaining() const { return in_.size() - pos_; }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

void header(Writer& w, const SpatialGrid& g, std::uint8_t kind) {
    if (g.space() != Space::position) throw DomainError("only position-space fields can be written");
    w.bytes(kMagic, 4);
    w.le<std::uint32_t>(kVersion);
    w.le<std::uint8_t>(kind);
    w.le<std::uint8_t>(static_cast<std::uint8_t>(g.dim()));
    for (int a = 0; a < g.dim(); ++a) w.le<std::uint64_t>(g.extent(a));
    for (int a = 0; a < g.dim(); ++a) {
        w.le<double>(g.lo(a));
        w.le<double>(g.hi(a));
    }
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write to " + path.string() + " failed");
}

}  // namespace

std::vector<std::uint8_t> encode_field(const ScalarField& field) {
    Writer w;
    header(w, field.grid(), 0);
    for (double x : field.values()) w.le<double>(x);
    return w.take();
}

std::vector<std::uint8_t> encode_field(const ComplexField& field) {
    Writer w;
    header(w, field.grid(), 1);
    for (const auto& z : field.values()) {
        w.le<double>(z.real());
        w.le<double>(z.imag());
    }
    return w.take();
}

AnyField decode_field(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    for (int i = 0; i < 4; ++i) {
        const auto c = r.le<std::uint8_t>("magic");
        if (c != static_cast<std::uint8_t>(kMagic[i])) throw FormatError("bad magic", r.pos() - 1);
    }
    const auto version = r.le<std::uint32_t>("version");
    if (version != kVersion) throw FormatError("unsupported version " + std::to_string(version), r.pos() - 4);
    const auto kind = r.le<std::uint8_t>("kind");
    if (kind > 1) throw FormatError("unknown field kind " + std::to_string(kind), r.pos() - 1);
    const auto dim = r.le<std::uint8_t>("dimension");
    if (dim != 2 && dim != 3)
        throw UnsupportedDimensionError("unsupported dimension " + std::to_string(dim), r.pos() - 1);
    std::vector<std::size_t> shape(dim);
    std::vector<double> lo(dim), hi(dim);
    std::uint64_t count = 1;
    for (auto& n : shape) {
        const std::size_t at = r.pos();
        const auto v = r.le<std::uint64_t>("shape");
        if (v < 8 || v > (std::uint64_t(1) << 32)) throw FormatError("invalid axis length", at);
        n = static_cast<std::size_t>(v);
        count *= v;
    }
    for (std::size_t a = 0; a < dim; ++a) {
        lo[a] = r.le<double>("lo");
        hi[a] = r.le<double>("hi");
        if (!(hi[a] > lo[a])) throw FormatError("invalid axis bounds", r.pos() - 16);
    }
    const std::uint64_t per = kind == 0 ? 8 : 16;
    if (r.remaining() != count * per) {
        if (r.remaining() < count * per) throw FormatError("truncated field samples", bytes.size());
        throw FormatError("trailing bytes after samples", r.pos() + count * per);
    }
    SpatialGrid grid(shape, lo, hi);
    if (kind == 0) {
        std::vector<double> data(count);
        for (auto& x : data) x = r.le<double>("sample");
        return ScalarField(std::move(grid), std::move(data));
    }
    std::vector<std::complex<double>> data(count);
    for (auto& z : data) {
        const double re = r.le<double>("sample");
        const double im = r.le<double>("sample");
        z = {re, im};
    }
    return ComplexField(std::move(grid), std::move(data));
}

void write_field(const std::filesystem::path& path, const ScalarField& field) {
    write_bytes(path, encode_field(field));
}

void write_field(const std::filesystem::path& path, const ComplexField& field) {
    write_bytes(path, encode_field(field));
}

AnyField read_field(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_field(bytes);
}

}  // namespace scratchsim::grid
