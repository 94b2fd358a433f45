#ifndef SALNET_RNG_HPP
#define SALNET_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace salnet {

// Seeded generator with hand-rolled distributions. mt19937_64 output is
// pinned by the standard, but std::uniform_int_distribution and friends are
// not, and the determinism contract (byte-identical datasets, checkpoints and
// maps for a fixed seed) must hold across standard libraries.
class Rng {
public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    // Uniform index in [0, n) by rejection, bias-free.
    size_t index(size_t n) {
        if (n <= 1) return 0;
        uint64_t mask = ~uint64_t{0};
        uint64_t limit = n - 1;
        while (mask >> 1 >= limit) mask >>= 1;
        for (;;) {
            uint64_t v = eng_() & mask;
            if (v < n) return static_cast<size_t>(v);
        }
    }

    // Standard normal via Box-Muller; no cached spare so the engine state
    // alone captures the generator.
    double normal() {
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (size_t i = v.size(); i > 1; --i) {
            size_t j = index(i);
            std::swap(v[i - 1], v[j]);
        }
    }

    std::string state() const {
        std::ostringstream os;
        os << eng_;
        return os.str();
    }
    void set_state(const std::string& s) {
        std::istringstream is(s);
        is >> eng_;
    }

private:
    std::mt19937_64 eng_;
};

} // namespace salnet

#endif
