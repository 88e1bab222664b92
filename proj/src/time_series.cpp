#include "lws/time_series.hpp"

#include <cmath>

#include "lws/errors.hpp"

namespace lws {

std::vector<double> TimeSeries::times() const {
    std::vector<double> t(values_v.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = time_at(i);
    return t;
}

void TimeSeries::validate() const {
    if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
        throw ValidationError("sample_rate_hz", "must be positive and finite");
    }
    if (!std::isfinite(start_time_s)) throw ValidationError("start_time_s", "must be finite");
    if (values_v.empty()) throw ValidationError("values_v", "series must contain at least one sample");
    for (double v : values_v) {
        if (!std::isfinite(v)) throw ValidationError("values_v", "all samples must be finite");
    }
}

}  // namespace lws
