#pragma once

#include "rkhskit/types.hpp"

#include <cstdint>
#include <string_view>

namespace rkhs {

/// Counter-free splitmix64 stream with Box-Muller normals. All randomness in
/// the toolkit flows through named substreams of one 64-bit seed, so repeated
/// runs are bit-identical on any platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    /// Derive a child stream from (seed, name). Distinct names decorrelate.
    static Rng substream(std::uint64_t seed, std::string_view name);

    std::uint64_t next_u64();

    /// Uniform in (0, 1), 53-bit resolution, never exactly 0.
    double uniform();

    /// Standard normal via Box-Muller (the pair's second value is cached).
    double normal();

    Matrix uniform_matrix(Eigen::Index rows, Eigen::Index cols);
    Matrix normal_matrix(Eigen::Index rows, Eigen::Index cols);

private:
    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace rkhs
