#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "helpers.hpp"
#include "npts/time.hpp"

using namespace npts;
using npts::testing::daily;
using npts::testing::hourly;
using npts::testing::make_series;

TEST_CASE("frequency parsing accepts short and long spellings") {
    CHECK(Frequency::parse("H") == Frequency{FreqUnit::Hourly, 1});
    CHECK(Frequency::parse("hourly") == Frequency{FreqUnit::Hourly, 1});
    CHECK(Frequency::parse("2H") == Frequency{FreqUnit::Hourly, 2});
    CHECK(Frequency::parse("D") == Frequency{FreqUnit::Daily, 1});
    CHECK(Frequency::parse("W") == Frequency{FreqUnit::Weekly, 1});
    CHECK(Frequency::parse("M") == Frequency{FreqUnit::Monthly, 1});
    CHECK(Frequency::parse("30min") == Frequency{FreqUnit::Minute, 30});
    CHECK(Frequency::parse("15T") == Frequency{FreqUnit::Minute, 15});
    CHECK_THROWS_AS(Frequency::parse(""), std::invalid_argument);
    CHECK_THROWS_AS(Frequency::parse("0H"), std::invalid_argument);
    CHECK_THROWS_AS(Frequency::parse("fortnight"), std::invalid_argument);
}

TEST_CASE("frequency round-trips through str") {
    for (const char* text : {"H", "D", "W", "M", "30min", "3D"}) {
        const Frequency freq = Frequency::parse(text);
        CHECK(Frequency::parse(freq.str()) == freq);
    }
}

TEST_CASE("timestamp parsing and formatting") {
    CHECK(format_timestamp(parse_timestamp("2015-01-01T00:00")) == "2015-01-01T00:00");
    CHECK(format_timestamp(parse_timestamp("2015-01-01")) == "2015-01-01T00:00");
    CHECK(format_timestamp(parse_timestamp("2015-06-30 23:59")) == "2015-06-30T23:59");
    CHECK(format_timestamp(parse_timestamp("2015-01-01T08:30:00")) == "2015-01-01T08:30");
    CHECK_THROWS_AS(parse_timestamp("2015-13-01T00:00"), std::invalid_argument);
    CHECK_THROWS_AS(parse_timestamp("2015-02-29T00:00"), std::invalid_argument);
    CHECK_THROWS_AS(parse_timestamp("2015-01-01T24:00"), std::invalid_argument);
    CHECK_THROWS_AS(parse_timestamp("2015-01-01T00:00:30"), std::invalid_argument);
    CHECK_THROWS_AS(parse_timestamp("not a date"), std::invalid_argument);
    CHECK_THROWS_AS(parse_timestamp("2015-01-01X00:00"), std::invalid_argument);
}

TEST_CASE("advance follows the calendar") {
    const Timestamp start = parse_timestamp("2015-01-01T00:00");
    CHECK(advance(start, hourly(), 0) == start);
    CHECK(format_timestamp(advance(start, hourly(), 25)) == "2015-01-02T01:00");
    CHECK(format_timestamp(advance(parse_timestamp("2015-01-31T00:00"), daily(), 1)) ==
          "2015-02-01T00:00");
    CHECK(format_timestamp(advance(start, Frequency::parse("30min"), 3)) == "2015-01-01T01:30");
    CHECK(format_timestamp(advance(start, Frequency::parse("W"), 2)) == "2015-01-15T00:00");
    CHECK(format_timestamp(advance(start, Frequency::parse("M"), 13)) == "2016-02-01T00:00");
    // Monthly steps clamp to the end of shorter months and do not drift back.
    CHECK(format_timestamp(advance(parse_timestamp("2015-01-31T00:00"), Frequency::parse("M"), 1)) ==
          "2015-02-28T00:00");
    CHECK(format_timestamp(advance(parse_timestamp("2015-01-31T00:00"), Frequency::parse("M"), 2)) ==
          "2015-03-31T00:00");
    CHECK(format_timestamp(advance(start, daily(), -1)) == "2014-12-31T00:00");
    CHECK_THROWS_AS(advance(start, Frequency::parse("M"), 1000000), std::exception);
}

TEST_CASE("timestamp_at indexes from the series start") {
    const TimeSeries series = make_series("s", "2015-01-01T00:00", hourly(), {1, 2, 3});
    CHECK(format_timestamp(timestamp_at(series, 0)) == "2015-01-01T00:00");
    CHECK(format_timestamp(timestamp_at(series, 25)) == "2015-01-02T01:00");
}

TEST_CASE("feature dimensions per frequency") {
    CHECK(time_feature_dim(Frequency::parse("30min")) == 5);
    CHECK(time_feature_dim(hourly()) == 4);
    CHECK(time_feature_dim(daily()) == 3);
    CHECK(time_feature_dim(Frequency::parse("W")) == 1);
    CHECK(time_feature_dim(Frequency::parse("M")) == 1);
}

TEST_CASE("hourly features reproduce hand-computed components") {
    // 2015-01-05 is a Monday: hour-of-day, day-of-week, day-of-month, day-of-year.
    const auto midnight = time_features(hourly(), parse_timestamp("2015-01-05T00:00"));
    REQUIRE(midnight.size() == 4);
    CHECK(midnight[0] == doctest::Approx(-0.5));          // hour 0
    CHECK(midnight[1] == doctest::Approx(0.0 / 7 - 0.5)); // Monday = position 0
    CHECK(midnight[2] == doctest::Approx(4.0 / 31 - 0.5));
    CHECK(midnight[3] == doctest::Approx(4.0 / 365 - 0.5));

    const auto noon = time_features(hourly(), parse_timestamp("2015-01-05T12:00"));
    CHECK(noon[0] == doctest::Approx(0.0)); // 12/24 - 0.5

    // 2015-01-08 is a Thursday, ISO weekday 4, position 3.
    const auto thursday = time_features(daily(), parse_timestamp("2015-01-08T00:00"));
    REQUIRE(thursday.size() == 3);
    CHECK(thursday[0] == doctest::Approx(3.0 / 7 - 0.5));
}

TEST_CASE("minute features carry minute-of-hour first") {
    const auto features = time_features(Frequency::parse("30min"), parse_timestamp("2015-01-05T00:30"));
    REQUIRE(features.size() == 5);
    CHECK(features[0] == doctest::Approx(30.0 / 60 - 0.5));
    CHECK(features[1] == doctest::Approx(-0.5));
}

TEST_CASE("weekly and monthly features are single cyclic positions") {
    // 2015-01-01 falls in ISO week 1.
    const auto week = time_features(Frequency::parse("W"), parse_timestamp("2015-01-01T00:00"));
    REQUIRE(week.size() == 1);
    CHECK(week[0] == doctest::Approx(0.0 / 52 - 0.5));
    // 2014-12-29 (Monday) already belongs to ISO week 1 of 2015.
    const auto wrapped = time_features(Frequency::parse("W"), parse_timestamp("2014-12-29T00:00"));
    CHECK(wrapped[0] == doctest::Approx(0.0 / 52 - 0.5));
    // 2016-01-01 (Friday) belongs to ISO week 53 of 2015.
    const auto late = time_features(Frequency::parse("W"), parse_timestamp("2016-01-01T00:00"));
    CHECK(late[0] == doctest::Approx(52.0 / 52 - 0.5));

    const auto march = time_features(Frequency::parse("M"), parse_timestamp("2015-03-15T00:00"));
    REQUIRE(march.size() == 1);
    CHECK(march[0] == doctest::Approx(2.0 / 12 - 0.5));
}

TEST_CASE("all feature components stay within [-0.5, 0.5]") {
    Timestamp ts = parse_timestamp("2014-11-20T07:45");
    for (int step = 0; step < 500; ++step) {
        for (const char* freq_text : {"30min", "H", "D", "W", "M"}) {
            const Frequency freq = Frequency::parse(freq_text);
            for (const double component : time_features(freq, ts)) {
                CHECK(component >= -0.5);
                CHECK(component <= 0.5);
            }
        }
        ts = advance(ts, Frequency::parse("7H"), 1);
    }
}

TEST_CASE("features are periodic across years at the same calendar position") {
    // Same month/day/hour one non-leap year apart: only day-of-week differs.
    const auto a = time_features(hourly(), parse_timestamp("2013-03-10T09:00"));
    const auto b = time_features(hourly(), parse_timestamp("2014-03-10T09:00"));
    CHECK(a[0] == doctest::Approx(b[0]));
    CHECK(a[2] == doctest::Approx(b[2]));
    CHECK(a[3] == doctest::Approx(b[3]));
}

TEST_CASE("feature distance satisfies the L1 examples and metric axioms") {
    CHECK(feature_distance(std::vector<double>{-0.5, 0.0}, std::vector<double>{-0.5, 0.0}) ==
          doctest::Approx(0.0));
    CHECK(feature_distance(std::vector<double>{-0.5, 0.0}, std::vector<double>{0.0, 0.25}) ==
          doctest::Approx(0.75));

    const auto a = time_features(hourly(), parse_timestamp("2015-01-05T03:00"));
    const auto b = time_features(hourly(), parse_timestamp("2015-01-06T03:00"));
    CHECK(feature_distance(a, b) ==
          doctest::Approx(1.0 / 7 + 1.0 / 31 + 1.0 / 365).epsilon(1e-12));

    // Symmetry and triangle inequality over a sample of timestamps.
    const auto c = time_features(hourly(), parse_timestamp("2015-02-17T21:00"));
    CHECK(feature_distance(a, b) == doctest::Approx(feature_distance(b, a)));
    CHECK(feature_distance(a, c) <= feature_distance(a, b) + feature_distance(b, c) + 1e-12);

    CHECK_THROWS_AS(feature_distance(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}),
                    std::invalid_argument);
}
