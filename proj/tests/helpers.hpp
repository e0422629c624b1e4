#pragma once

#include <string>
#include <vector>

#include "npts/time.hpp"

namespace npts::testing {

inline Frequency hourly() { return Frequency::parse("H"); }
inline Frequency daily() { return Frequency::parse("D"); }

inline TimeSeries make_series(std::string id, const std::string& start, const Frequency& freq,
                              std::vector<double> values) {
    TimeSeries series;
    series.id = std::move(id);
    series.start = parse_timestamp(start);
    series.freq = freq;
    series.values = std::move(values);
    return series;
}

} // namespace npts::testing
