#include "distillbench/rng.hpp"

#include <cmath>

#include "distillbench/errors.hpp"

namespace distillbench {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

} // namespace

namespace detail {

double portable_log(double x) {
    if (x <= 0.0 || !std::isfinite(x)) {
        throw InvalidArgument("portable_log requires a positive finite argument");
    }
    // Coefficients from Cephes log.c (Stephen L. Moshier).
    static const double P[] = {
        1.01875663804580931796e-4, 4.97494994976747001425e-1, 4.70579119878881725854e0,
        1.44989225341610930846e1,  1.79368678507819816313e1,  7.70838733755885391666e0,
    };
    static const double Q[] = {
        1.12873587189167450590e1, 4.52279145837532221105e1, 8.29875266912776603211e1,
        7.11544750618563894466e1, 2.31251620126765340583e1,
    };
    static const double kSqrtHalf = 0.70710678118654752440;
    static const double kLn2Hi = 0.693359375;
    static const double kLn2Lo = -2.121944400546905827679e-4;

    int e = 0;
    double m = std::frexp(x, &e); // m in [0.5, 1)
    if (m < kSqrtHalf) {
        e -= 1;
        m = 2.0 * m - 1.0;
    } else {
        m = m - 1.0;
    }
    double z = m * m;
    double pnum = P[0];
    for (int i = 1; i < 6; ++i) pnum = pnum * m + P[i];
    double pden = m + Q[0];
    for (int i = 1; i < 5; ++i) pden = pden * m + Q[i];
    double y = m * z * (pnum / pden);
    y += e * kLn2Lo;
    y -= 0.5 * z;
    y += m;
    y += e * kLn2Hi;
    return y;
}

} // namespace detail

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : state_) {
        word = splitmix64(sm);
    }
    // xoshiro state must not be all zero; splitmix of any seed avoids this,
    // but keep a guard for safety.
    if ((state_[0] | state_[1] | state_[2] | state_[3]) == 0) {
        state_[0] = 0x9e3779b97f4a7c15ULL;
    }
}

std::uint64_t SeededRng::next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double SeededRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double SeededRng::normal() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u = 0.0;
    double v = 0.0;
    double s = 0.0;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    double f = std::sqrt(-2.0 * detail::portable_log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
}

std::uint64_t SeededRng::uniform_int(std::uint64_t n) {
    if (n == 0) {
        throw InvalidArgument("uniform_int requires n >= 1");
    }
    const std::uint64_t threshold = (0 - n) % n; // 2^64 mod n
    for (;;) {
        std::uint64_t r = next_u64();
        if (r >= threshold) {
            return r % n;
        }
    }
}

} // namespace distillbench
