#pragma once

#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace viphash {

/// Thrown when a sense window holds fewer than two samples; the sample
/// variance needs n-1 and the window must be extended instead.
struct InsufficientSamples : std::runtime_error {
    InsufficientSamples() : std::runtime_error("sense window has fewer than 2 samples") {}
};

/// Summary of one sense window: estimated mean displacement and the
/// half-width of its Gaussian-tail confidence interval.
struct SenseStats {
    double u = 0.0;  // estimated mean displacement
    double w = 0.0;  // confidence-interval half-width
};

/// Gaussian-tail half-width at confidence c for sample variance v over n
/// samples: sqrt(-2 v ln(1-c) / n). Natural log: the bound comes from
/// exp(-n t^2 / (2 sigma^2)) = 1 - c.
inline double interval_half_width(double variance, std::uint64_t count, double confidence) {
    return std::sqrt(-2.0 * variance * std::log(1.0 - confidence) / static_cast<double>(count));
}

/// Streaming displacement statistics over a window of successful fetches.
/// State is three 64-bit accumulators plus the confidence level; nothing
/// here scales with the table.
class SenseAccumulator {
public:
    explicit SenseAccumulator(double confidence = 0.95) : confidence_(confidence) {
        assert(confidence > 0.0 && confidence < 1.0);
    }

    /// Record one successful fetch. Misses are never recorded.
    void record(std::uint64_t displacement) {
        assert(displacement >= 1);
        assert(displacement < (std::uint64_t{1} << 26));  // keeps disp_sq_ far from overflow
        ++count_;
        disp_ += displacement;
        disp_sq_ += displacement * displacement;
    }

    std::uint64_t count() const { return count_; }
    std::uint64_t cumulative_displacement() const { return disp_; }
    std::uint64_t cumulative_displacement_sq() const { return disp_sq_; }
    double confidence() const { return confidence_; }
    bool can_finalize() const { return count_ >= 2; }

    /// u = disp/n, v = disp_sq/(n-1) - disp^2/(n(n-1)),
    /// w = sqrt(-2 v ln(1-c) / n), with v clamped at 0 so that equal
    /// samples give exactly w = 0 despite rounding.
    SenseStats finalize() const {
        if (!can_finalize()) throw InsufficientSamples{};
        const double n = static_cast<double>(count_);
        const double disp = static_cast<double>(disp_);
        const double disp_sq = static_cast<double>(disp_sq_);
        const double u = disp / n;
        double v = disp_sq / (n - 1.0) - disp * disp / (n * (n - 1.0));
        if (v < 0.0) v = 0.0;
        return {u, interval_half_width(v, count_, confidence_)};
    }

    void reset() {
        disp_ = 0;
        disp_sq_ = 0;
        count_ = 0;
    }

private:
    std::uint64_t disp_ = 0;
    std::uint64_t disp_sq_ = 0;
    std::uint64_t count_ = 0;
    double confidence_;
};

/// Distributions are deemed to have diverged when the two confidence
/// intervals are disjoint.
inline bool has_distribution_changed(const SenseStats& baseline, const SenseStats& current) {
    return std::abs(baseline.u - current.u) > baseline.w + current.w;
}

}  // namespace viphash
