// Counter-based deterministic random number generation.
//
// Every draw is a pure function of (key, counter), so a stream can be
// re-created from its identifiers alone and independent streams may be
// consumed in any order, from any thread, with bit-identical results.
// Stream keys are derived from a master seed plus a list of integer ids
// (e.g. {trial, landmark, coordinate}).
#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>

namespace corrnoise {

namespace detail {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
}  // namespace detail

/// Well-known stream tags; combined with indices to form stream ids.
namespace streams {
constexpr std::uint64_t kWorld = 1;
constexpr std::uint64_t kTrajectory = 2;
constexpr std::uint64_t kMeasurement = 3;  // + landmark index + coordinate
constexpr std::uint64_t kProcessNoise = 4;
constexpr std::uint64_t kTest = 99;
}  // namespace streams

class CounterRng {
  public:
    CounterRng(std::uint64_t master_seed, std::uint64_t stream)
        : key_(detail::mix64(master_seed + detail::kGolden * detail::mix64(stream + 1))) {}

    /// Folds a list of ids into one stream identifier.
    static std::uint64_t stream_id(std::initializer_list<std::uint64_t> ids) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (std::uint64_t id : ids) h = detail::mix64(h + detail::kGolden * (id + 1));
        return h;
    }

    std::uint64_t next_u64() { return detail::mix64(key_ + detail::kGolden * ++counter_); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; consumes two counters per pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so the log is finite.
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

}  // namespace corrnoise
