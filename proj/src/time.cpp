#include "npts/time.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <stdexcept>

namespace npts {

namespace {

using std::chrono::days;
using std::chrono::minutes;
using std::chrono::sys_days;
using std::chrono::year_month_day;

constexpr long long kMinutesPerHour = 60;
constexpr long long kMinutesPerDay = 24 * 60;

void check_year_range(const year_month_day& ymd) {
    const int y = static_cast<int>(ymd.year());
    if (y < 1 || y > 9999) {
        throw std::runtime_error("timestamp outside supported calendar range (years 1..9999)");
    }
}

sys_days start_of_year(const year_month_day& ymd) {
    return sys_days{ymd.year() / std::chrono::January / 1};
}

int day_of_year(sys_days day) {
    const year_month_day ymd{day};
    return static_cast<int>((day - start_of_year(ymd)).count()) + 1;
}

// ISO 8601 week number: the week containing this date's Thursday.
int iso_week(sys_days day) {
    const std::chrono::weekday wd{day};
    const sys_days thursday = day - days{static_cast<int>(wd.iso_encoding()) - 4};
    return (day_of_year(thursday) - 1) / 7 + 1;
}

} // namespace

Frequency Frequency::parse(const std::string& text) {
    std::string s;
    s.reserve(text.size());
    for (char c : text) {
        if (!std::isspace(static_cast<unsigned char>(c))) {
            s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    if (s.empty()) {
        throw std::invalid_argument("empty frequency string");
    }
    std::size_t pos = 0;
    long multiple = 0;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
        multiple = multiple * 10 + (s[pos] - '0');
        if (multiple > 1000000) {
            throw std::invalid_argument("frequency multiple too large: " + text);
        }
        ++pos;
    }
    if (pos == 0) {
        multiple = 1;
    } else if (multiple < 1) {
        throw std::invalid_argument("frequency multiple must be >= 1: " + text);
    }
    const std::string unit = s.substr(pos);
    Frequency f;
    f.multiple = static_cast<int>(multiple);
    if (unit == "min" || unit == "t" || unit == "minute" || unit == "minutes") {
        f.unit = FreqUnit::Minute;
    } else if (unit == "h" || unit == "hourly" || unit == "hour" || unit == "hours") {
        f.unit = FreqUnit::Hourly;
    } else if (unit == "d" || unit == "daily" || unit == "day" || unit == "days") {
        f.unit = FreqUnit::Daily;
    } else if (unit == "w" || unit == "weekly" || unit == "week" || unit == "weeks") {
        f.unit = FreqUnit::Weekly;
    } else if (unit == "m" || unit == "monthly" || unit == "month" || unit == "months") {
        f.unit = FreqUnit::Monthly;
    } else {
        throw std::invalid_argument("unrecognized frequency: " + text);
    }
    return f;
}

std::string Frequency::str() const {
    std::string prefix = multiple == 1 ? std::string{} : std::to_string(multiple);
    switch (unit) {
        case FreqUnit::Minute: return prefix + "min";
        case FreqUnit::Hourly: return prefix + "H";
        case FreqUnit::Daily: return prefix + "D";
        case FreqUnit::Weekly: return prefix + "W";
        case FreqUnit::Monthly: return prefix + "M";
    }
    throw std::logic_error("unreachable frequency unit");
}

Timestamp parse_timestamp(const std::string& text) {
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, sec = 0;
    char sep = 'T';
    int consumed = 0;
    const char* s = text.c_str();
    bool ok = false;
    if (std::sscanf(s, "%d-%d-%d%c%d:%d:%d%n", &y, &mo, &d, &sep, &h, &mi, &sec, &consumed) == 7 &&
        static_cast<std::size_t>(consumed) == text.size()) {
        ok = true;
    } else if (std::sscanf(s, "%d-%d-%d%c%d:%d%n", &y, &mo, &d, &sep, &h, &mi, &consumed) == 6 &&
               static_cast<std::size_t>(consumed) == text.size()) {
        ok = true;
        sec = 0;
    } else if (std::sscanf(s, "%d-%d-%d%n", &y, &mo, &d, &consumed) == 3 &&
               static_cast<std::size_t>(consumed) == text.size()) {
        ok = true;
        sep = 'T';
        h = mi = sec = 0;
    }
    if (!ok || (sep != 'T' && sep != ' ')) {
        throw std::invalid_argument("unparseable timestamp: " + text);
    }
    if (sec != 0) {
        throw std::invalid_argument("timestamps have minute precision, got nonzero seconds: " + text);
    }
    const year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                             std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h < 0 || h > 23 || mi < 0 || mi > 59) {
        throw std::invalid_argument("invalid calendar timestamp: " + text);
    }
    check_year_range(ymd);
    return sys_days{ymd} + std::chrono::hours{h} + minutes{mi};
}

std::string format_timestamp(Timestamp ts) {
    const sys_days day = std::chrono::floor<days>(ts);
    const year_month_day ymd{day};
    const long long tod = (ts - day).count();
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02uT%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(tod / kMinutesPerHour), static_cast<int>(tod % kMinutesPerHour));
    return buf;
}

Timestamp advance(Timestamp start, const Frequency& freq, long long steps) {
    const long long scaled = steps * freq.multiple;
    switch (freq.unit) {
        case FreqUnit::Minute:
        case FreqUnit::Hourly:
        case FreqUnit::Daily:
        case FreqUnit::Weekly: {
            long long per_step = 1;
            if (freq.unit == FreqUnit::Hourly) per_step = kMinutesPerHour;
            if (freq.unit == FreqUnit::Daily) per_step = kMinutesPerDay;
            if (freq.unit == FreqUnit::Weekly) per_step = 7 * kMinutesPerDay;
            if (scaled != 0 && std::abs(scaled) > (1LL << 42) / per_step) {
                throw std::runtime_error("timestamp outside supported calendar range (years 1..9999)");
            }
            const Timestamp result = start + minutes{scaled * per_step};
            check_year_range(year_month_day{std::chrono::floor<days>(result)});
            return result;
        }
        case FreqUnit::Monthly: {
            const sys_days day = std::chrono::floor<days>(start);
            const minutes tod = start - day;
            const year_month_day ymd{day};
            const long long total = static_cast<int>(ymd.year()) * 12LL +
                                    static_cast<long long>(static_cast<unsigned>(ymd.month())) - 1 +
                                    scaled;
            const long long y = total >= 0 ? total / 12 : (total - 11) / 12;
            const unsigned m = static_cast<unsigned>(total - y * 12) + 1;
            if (y < 1 || y > 9999) {
                throw std::runtime_error("timestamp outside supported calendar range (years 1..9999)");
            }
            year_month_day moved{std::chrono::year{static_cast<int>(y)}, std::chrono::month{m},
                                 ymd.day()};
            if (!moved.ok()) {
                moved = std::chrono::year{static_cast<int>(y)} / std::chrono::month{m} /
                        std::chrono::last;
            }
            return sys_days{moved} + tod;
        }
    }
    throw std::logic_error("unreachable frequency unit");
}

Timestamp timestamp_at(const TimeSeries& series, std::size_t index) {
    return advance(series.start, series.freq, static_cast<long long>(index));
}

std::size_t time_feature_dim(const Frequency& freq) {
    switch (freq.unit) {
        case FreqUnit::Minute: return 5;
        case FreqUnit::Hourly: return 4;
        case FreqUnit::Daily: return 3;
        case FreqUnit::Weekly: return 1;
        case FreqUnit::Monthly: return 1;
    }
    throw std::logic_error("unreachable frequency unit");
}

std::vector<double> time_features(const Frequency& freq, Timestamp ts) {
    const sys_days day = std::chrono::floor<days>(ts);
    const year_month_day ymd{day};
    const long long tod = (ts - day).count();

    const auto minute_of_hour = [&] { return static_cast<double>(tod % 60) / 60.0 - 0.5; };
    const auto hour_of_day = [&] { return static_cast<double>(tod / 60) / 24.0 - 0.5; };
    const auto day_of_week = [&] {
        return (static_cast<double>(std::chrono::weekday{day}.iso_encoding()) - 1.0) / 7.0 - 0.5;
    };
    const auto day_of_month = [&] {
        return (static_cast<double>(static_cast<unsigned>(ymd.day())) - 1.0) / 31.0 - 0.5;
    };
    const auto doy = [&] { return (static_cast<double>(day_of_year(day)) - 1.0) / 365.0 - 0.5; };

    switch (freq.unit) {
        case FreqUnit::Minute:
            return {minute_of_hour(), hour_of_day(), day_of_week(), day_of_month(), doy()};
        case FreqUnit::Hourly:
            return {hour_of_day(), day_of_week(), day_of_month(), doy()};
        case FreqUnit::Daily:
            return {day_of_week(), day_of_month(), doy()};
        case FreqUnit::Weekly:
            return {(static_cast<double>(iso_week(day)) - 1.0) / 52.0 - 0.5};
        case FreqUnit::Monthly:
            return {(static_cast<double>(static_cast<unsigned>(ymd.month())) - 1.0) / 12.0 - 0.5};
    }
    throw std::logic_error("unreachable frequency unit");
}

double feature_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw std::invalid_argument("feature vectors have different dimensions: " +
                                    std::to_string(a.size()) + " vs " + std::to_string(b.size()));
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sum += std::abs(a[i] - b[i]);
    }
    return sum;
}

} // namespace npts
