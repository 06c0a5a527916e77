#pragma once

#include <cstdint>
#include <vector>

namespace distillbench {

/// Deterministic random source: xoshiro256++ seeded through splitmix64.
/// The generator and every derived draw (uniform, normal, shuffle) are fixed
/// algorithms built from IEEE-exact arithmetic only, so a seed produces the
/// same sequence on every platform. Normal deviates come from the Marsaglia
/// polar method with an internal polynomial log, keeping libm out of the
/// draw path. Single-owner: not safe to share across threads.
class SeededRng {
public:
    explicit SeededRng(std::uint64_t seed);

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();

    double uniform();                       // [0, 1)
    double uniform(double lo, double hi);   // [lo, hi)
    double normal();                        // mean 0, std 1

    std::uint64_t uniform_int(std::uint64_t n); // [0, n), unbiased

    template <class T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_int(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t seed_ = 0;
    std::uint64_t state_[4] = {0, 0, 0, 0};
    bool have_spare_ = false;
    double spare_ = 0.0;
};

namespace detail {
// Natural log from frexp plus a fixed rational approximation (coefficients
// after Cephes log.c); uses only +,-,*,/ so results are bit-identical across
// platforms. Accurate to ~1 ulp on (0, inf).
double portable_log(double x);
} // namespace detail

} // namespace distillbench
