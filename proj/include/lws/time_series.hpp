#ifndef LWS_TIME_SERIES_HPP
#define LWS_TIME_SERIES_HPP

#include <cstddef>
#include <vector>

namespace lws {

// Uniformly sampled photodetector record. Sample i sits at
// start_time_s + i / sample_rate_hz.
struct TimeSeries {
    double sample_rate_hz = 1.0;
    double start_time_s = 0.0;
    std::vector<double> values_v;

    std::size_t size() const noexcept { return values_v.size(); }
    bool empty() const noexcept { return values_v.empty(); }

    double time_at(std::size_t i) const noexcept {
        return start_time_s + static_cast<double>(i) / sample_rate_hz;
    }
    double duration_s() const noexcept {
        return values_v.empty() ? 0.0 : static_cast<double>(values_v.size() - 1) / sample_rate_hz;
    }

    std::vector<double> times() const;

    // Throws ValidationError unless rate > 0, length >= 1 and all values finite.
    void validate() const;
};

}  // namespace lws

#endif  // LWS_TIME_SERIES_HPP
