#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace textdet {

// mt19937_64 plus explicit bit-to-double mapping, so identical seeds give
// identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // [0,1)
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    // [0,n), rejection sampled to avoid modulo bias
    std::size_t uniform_index(std::size_t n) {
        if (n <= 1) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return static_cast<std::size_t>(x % n);
    }

    // inclusive on both ends
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(uniform_index(static_cast<std::size_t>(hi - lo + 1)));
    }

private:
    std::mt19937_64 gen_;
};

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Derives an independent child seed (per scene, per iteration, ...).
inline std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
    return splitmix64(master ^ splitmix64(index));
}

// Fisher-Yates with our own index draws; std::shuffle is not pinned by the standard.
template <typename T>
void deterministic_shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = rng.uniform_index(i);
        std::swap(v[i - 1], v[j]);
    }
}

}  // namespace textdet
