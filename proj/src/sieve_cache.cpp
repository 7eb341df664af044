#include "d3lab/sieve_cache.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <ostream>
#include <system_error>
#include <vector>

#include "d3lab/error.hpp"

namespace d3lab::sieve_cache {

namespace fs = std::filesystem;
using arith::u64;

namespace {

constexpr char kMagic[4] = {'D', '3', 'P', 'L'};
constexpr std::size_t kHeader = 4 + 2 + 1 + 8;

struct Fnv {
    u64 h = 0xcbf29ce484222325ull;
    void add(const unsigned char* p, std::size_t n) {
        for (std::size_t i = 0; i < n; ++i) {
            h ^= p[i];
            h *= 0x100000001b3ull;
        }
    }
};

template <class T>
void put_le(unsigned char* out, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i) out[i] = static_cast<unsigned char>(static_cast<u64>(v) >> (8 * i));
}

template <class T>
T get_le(const unsigned char* in) {
    u64 v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<u64>(in[i]) << (8 * i);
    return static_cast<T>(v);
}

bool fail(std::string* why, std::string msg) {
    if (why) *why = std::move(msg);
    return false;
}

}  // namespace

fs::path cache_path(const fs::path& dir, int k, u64 limit) {
    return dir / ("d" + std::to_string(k) + "_" + std::to_string(limit) + ".d3pl");
}

void write(const fs::path& file, const arith::DivisorTable& table) {
    std::error_code ec;
    if (file.has_parent_path()) fs::create_directories(file.parent_path(), ec);
    if (ec) throw IoError("sieve cache: cannot create " + file.parent_path().string() + ": " + ec.message());
    fs::path tmp = file;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("sieve cache: cannot open " + tmp.string() + " for writing");
        Fnv fnv;
        std::array<unsigned char, kHeader> head{};
        std::memcpy(head.data(), kMagic, 4);
        put_le<std::uint16_t>(head.data() + 4, kVersion);
        head[6] = static_cast<unsigned char>(table.k());
        put_le<u64>(head.data() + 7, table.limit());
        fnv.add(head.data(), head.size());
        out.write(reinterpret_cast<const char*>(head.data()), head.size());
        std::vector<unsigned char> buf;
        const auto vals = table.values();
        constexpr u64 chunk = 1 << 16;
        for (u64 n = 1; n <= table.limit(); n += chunk) {
            const u64 m = std::min(chunk, table.limit() + 1 - n);
            buf.resize(4 * m);
            for (u64 i = 0; i < m; ++i) put_le<std::uint32_t>(buf.data() + 4 * i, vals[n + i]);
            fnv.add(buf.data(), buf.size());
            out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
        }
        unsigned char tail[8];
        put_le<u64>(tail, fnv.h);
        out.write(reinterpret_cast<const char*>(tail), 8);
        if (!out) throw IoError("sieve cache: write failed for " + tmp.string());
    }
    fs::rename(tmp, file, ec);
    if (ec) throw IoError("sieve cache: cannot rename " + tmp.string() + " to " + file.string() + ": " + ec.message());
}

std::optional<arith::DivisorTable> read(const fs::path& file, int k, u64 limit, std::string* why) {
    std::error_code ec;
    if (!fs::exists(file, ec)) {
        fail(why, "missing");
        return std::nullopt;
    }
    const u64 size = fs::file_size(file, ec);
    if (ec) {
        fail(why, "cannot stat: " + ec.message());
        return std::nullopt;
    }
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        fail(why, "cannot open");
        return std::nullopt;
    }
    std::array<unsigned char, kHeader> head{};
    if (size < kHeader + 8 || !in.read(reinterpret_cast<char*>(head.data()), head.size())) {
        fail(why, "truncated header");
        return std::nullopt;
    }
    if (std::memcmp(head.data(), kMagic, 4) != 0) {
        fail(why, "bad magic");
        return std::nullopt;
    }
    const auto version = get_le<std::uint16_t>(head.data() + 4);
    if (version != kVersion) {
        fail(why, "format version " + std::to_string(version) + ", expected " + std::to_string(kVersion));
        return std::nullopt;
    }
    const int fk = head[6];
    const u64 fn = get_le<u64>(head.data() + 7);
    if (fk != k || fn != limit) {
        fail(why, "holds k=" + std::to_string(fk) + " N=" + std::to_string(fn));
        return std::nullopt;
    }
    if (size != kHeader + 4 * fn + 8) {
        fail(why, "size " + std::to_string(size) + " does not match N");
        return std::nullopt;
    }
    Fnv fnv;
    fnv.add(head.data(), head.size());
    std::vector<std::uint32_t> values(fn + 1, 0);
    std::vector<unsigned char> buf;
    constexpr u64 chunk = 1 << 16;
    for (u64 n = 1; n <= fn; n += chunk) {
        const u64 m = std::min(chunk, fn + 1 - n);
        buf.resize(4 * m);
        if (!in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()))) {
            fail(why, "truncated body");
            return std::nullopt;
        }
        fnv.add(buf.data(), buf.size());
        for (u64 i = 0; i < m; ++i) values[n + i] = get_le<std::uint32_t>(buf.data() + 4 * i);
    }
    unsigned char tail[8];
    if (!in.read(reinterpret_cast<char*>(tail), 8)) {
        fail(why, "truncated checksum");
        return std::nullopt;
    }
    if (get_le<u64>(tail) != fnv.h) {
        fail(why, "checksum mismatch");
        return std::nullopt;
    }
    return arith::DivisorTable(k, limit, std::move(values));
}

arith::DivisorTable load_or_build(const fs::path& dir, int k, u64 limit, std::ostream& warn, bool* rebuilt) {
    const auto file = cache_path(dir, k, limit);
    std::string why;
    if (auto t = read(file, k, limit, &why)) {
        if (rebuilt) *rebuilt = false;
        return std::move(*t);
    }
    if (why != "missing") warn << "warning: sieve cache " << file.string() << " unusable (" << why << "), rebuilding\n";
    auto t = arith::sieve_dk(k, limit);
    write(file, t);
    if (rebuilt) *rebuilt = true;
    return t;
}

}  // namespace d3lab::sieve_cache
