#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "henon/types.hpp"

namespace henon {

/// Philox4x32-10 block function (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key);

/// Counter-based random stream.
///
/// A stream is a 64-bit key; draw i is word (i mod 4) of philox(counter = i / 4, key).
/// Child streams are derived by encrypting the child tag under the parent key, so
/// the tree experiment -> module -> task is fixed by the root seed alone and does
/// not depend on which worker runs a task or in what order.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed);

    RngStream child(std::uint64_t tag) const;
    RngStream child(std::string_view tag) const;

    std::uint64_t key() const { return key_; }

    std::uint32_t next_u32();
    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Standard normal (Box-Muller; both variates are used).
    double normal();
    /// Uniform index in [0, n).
    std::size_t index(std::size_t n);
    /// Uniform in the closed disk |z| <= r.
    cx disk(double r);
    /// Uniform in the bidisk of radius r.
    Point2 bidisk(double r);
    /// Uniform on the unit sphere of C^2 = R^4.
    Point2 sphere();
    /// Uniform on the unit sphere of R^4, as an array.
    std::array<double, 4> sphere4();

    template <class T>
    void shuffle(std::vector<T>& v)
    {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[index(i)]);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// FNV-1a 64-bit hash.
std::uint64_t fnv1a64(std::string_view s);

}  // namespace henon
