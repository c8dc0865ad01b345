#include "henon/rng.hpp"

#include <cmath>
#include <numbers>

namespace henon {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo)
{
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key)
{
    for (int round = 0; round < 10; ++round) {
        if (round > 0) {
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    }
    return ctr;
}

RngStream::RngStream(std::uint64_t seed) : key_(seed) {}

RngStream RngStream::child(std::uint64_t tag) const
{
    // Counter words 2..3 carry a domain marker so child derivation never collides
    // with the draw counters (which leave those words zero).
    const auto out = philox4x32({static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32),
                                 0x5EED5EEDu, 0x1u},
                                {static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)});
    return RngStream((static_cast<std::uint64_t>(out[1]) << 32) | out[0]);
}

RngStream RngStream::child(std::string_view tag) const { return child(fnv1a64(tag)); }

std::uint32_t RngStream::next_u32()
{
    if (used_ == 4) {
        block_ = philox4x32({static_cast<std::uint32_t>(counter_),
                             static_cast<std::uint32_t>(counter_ >> 32), 0u, 0u},
                            {static_cast<std::uint32_t>(key_), static_cast<std::uint32_t>(key_ >> 32)});
        ++counter_;
        used_ = 0;
    }
    return block_[used_++];
}

std::uint64_t RngStream::next_u64()
{
    const std::uint64_t lo = next_u32();
    const std::uint64_t hi = next_u32();
    return (hi << 32) | lo;
}

double RngStream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double RngStream::normal()
{
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
}

std::size_t RngStream::index(std::size_t n)
{
    // Lemire's multiply-shift with rejection.
    const std::uint64_t range = n;
    while (true) {
        const std::uint64_t x = next_u64();
        const unsigned __int128 m = static_cast<unsigned __int128>(x) * range;
        const auto low = static_cast<std::uint64_t>(m);
        if (low >= range || low >= (-range) % range) return static_cast<std::size_t>(m >> 64);
    }
}

cx RngStream::disk(double r)
{
    const double rho = r * std::sqrt(uniform());
    const double t = 2.0 * std::numbers::pi * uniform();
    return std::polar(rho, t);
}

Point2 RngStream::bidisk(double r)
{
    const cx x = disk(r);
    return {x, disk(r)};
}

std::array<double, 4> RngStream::sphere4()
{
    while (true) {
        std::array<double, 4> v{normal(), normal(), normal(), normal()};
        const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3]);
        if (n > 1e-12) {
            for (auto& c : v) c /= n;
            return v;
        }
    }
}

Point2 RngStream::sphere()
{
    const auto v = sphere4();
    return {{v[0], v[1]}, {v[2], v[3]}};
}

std::uint64_t fnv1a64(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace henon
