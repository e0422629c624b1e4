#pragma once

#include <chrono>
#include <span>
#include <string>
#include <vector>

namespace npts {

/// Calendar unit of the spacing between consecutive observations.
enum class FreqUnit { Minute, Hourly, Daily, Weekly, Monthly };

/**
 * Observation frequency: a unit plus a positive multiple, e.g. {Minute, 30}
 * for half-hourly data. The pair uniquely determines the step between
 * consecutive observations.
 */
struct Frequency {
    FreqUnit unit = FreqUnit::Daily;
    int multiple = 1;

    /// Accepts "30min", "15T", "H", "D", "W", "M" and long forms like
    /// "hourly" (case-insensitive, optional integer multiple prefix).
    /// Note "m"/"M" means monthly; minutes are spelled "min" or "T".
    static Frequency parse(const std::string& text);
    std::string str() const;

    bool operator==(const Frequency&) const = default;
};

/// Timezone-naive calendar timestamp with minute precision. Daylight-saving
/// shifts are out of scope; all arithmetic is on the naive calendar.
using Timestamp = std::chrono::sys_time<std::chrono::minutes>;

/// Parses "YYYY-MM-DD", "YYYY-MM-DDTHH:MM" or "YYYY-MM-DD HH:MM"
/// (a trailing ":00" seconds field is tolerated).
Timestamp parse_timestamp(const std::string& text);
std::string format_timestamp(Timestamp ts);

/// start advanced by `steps` frequency steps. Monthly steps keep the
/// day-of-month, clamping to the month end when the day does not exist.
/// Throws if the result leaves years 1..9999.
Timestamp advance(Timestamp start, const Frequency& freq, long long steps);

/// One univariate series. Covariate rows, when present, may extend past the
/// values so that future covariate values are available to forecasters.
struct TimeSeries {
    std::string id;
    Timestamp start{};
    Frequency freq;
    std::vector<double> values;
    std::vector<std::vector<double>> covariates;

    std::size_t length() const { return values.size(); }
};

Timestamp timestamp_at(const TimeSeries& series, std::size_t index);

/// Number of calendar features attached to this frequency's timestamps.
std::size_t time_feature_dim(const Frequency& freq);

/**
 * Normalized cyclic calendar positions, each component position/cycle - 0.5
 * in [-0.5, 0.5]. Per frequency:
 *   minute data : minute-of-hour, hour-of-day, day-of-week, day-of-month,
 *                 day-of-year
 *   hourly      : hour-of-day, day-of-week, day-of-month, day-of-year
 *   daily       : day-of-week, day-of-month, day-of-year
 *   weekly      : ISO week-of-year
 *   monthly     : month-of-year
 */
std::vector<double> time_features(const Frequency& freq, Timestamp ts);

/// L1 distance between two feature vectors of equal dimension.
double feature_distance(std::span<const double> a, std::span<const double> b);

} // namespace npts
