#include "seqfeat/index.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

namespace seqfeat {

namespace {

__extension__ using i128 = __int128;

struct TimeUnit {
    std::string_view suffix;
    std::int64_t ns;
};

// Largest first; "ms"/"us"/"ns" must be tried before "s" when parsing.
constexpr std::array<TimeUnit, 7> kUnits{{
    {"D", 86'400'000'000'000},
    {"h", 3'600'000'000'000},
    {"m", 60'000'000'000},
    {"s", 1'000'000'000},
    {"ms", 1'000'000},
    {"us", 1'000},
    {"ns", 1},
}};

[[noreturn]] void bad_delta(std::string_view text) {
    throw Error(ErrorCode::ParseError, "cannot parse index delta '" + std::string(text) + "'");
}

// Exact integer nanoseconds from "<int>[.<frac>]" times a unit.
std::int64_t parse_scaled(std::string_view number, std::int64_t unit, std::string_view whole) {
    bool negative = false;
    if (!number.empty() && (number.front() == '-' || number.front() == '+')) {
        negative = number.front() == '-';
        number.remove_prefix(1);
    }
    const auto dot = number.find('.');
    const std::string_view int_part = number.substr(0, dot);
    const std::string_view frac_part = dot == std::string_view::npos ? std::string_view{} : number.substr(dot + 1);
    if (int_part.empty() && frac_part.empty()) {
        bad_delta(whole);
    }
    i128 total = 0;
    for (char c : int_part) {
        if (c < '0' || c > '9') {
            bad_delta(whole);
        }
        total = total * 10 + (c - '0');
        if (total > std::numeric_limits<std::int64_t>::max()) {
            bad_delta(whole);
        }
    }
    total *= unit;
    i128 frac_num = 0;
    i128 frac_den = 1;
    for (char c : frac_part) {
        if (c < '0' || c > '9' || frac_den > 1'000'000'000'000'000'000LL) {
            bad_delta(whole);
        }
        frac_num = frac_num * 10 + (c - '0');
        frac_den *= 10;
    }
    const i128 scaled = frac_num * unit;
    if (scaled % frac_den != 0) {
        bad_delta(whole); // sub-nanosecond remainder
    }
    total += scaled / frac_den;
    if (total > std::numeric_limits<std::int64_t>::max()) {
        bad_delta(whole);
    }
    return negative ? -static_cast<std::int64_t>(total) : static_cast<std::int64_t>(total);
}

// Howard Hinnant's civil calendar conversions.
std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    y += m <= 2;
}

bool read_digits(std::string_view text, std::size_t& pos, std::size_t count, int& out) {
    if (pos + count > text.size()) {
        return false;
    }
    int v = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const char c = text[pos + i];
        if (c < '0' || c > '9') {
            return false;
        }
        v = v * 10 + (c - '0');
    }
    pos += count;
    out = v;
    return true;
}

bool expect(std::string_view text, std::size_t& pos, char c) {
    if (pos < text.size() && text[pos] == c) {
        ++pos;
        return true;
    }
    return false;
}

} // namespace

std::string_view to_string(IndexKind kind) noexcept {
    return kind == IndexKind::TimeNs ? "time" : "numeric";
}

void require_same_kind(IndexKind a, IndexKind b, std::string_view context) {
    if (a != b) {
        throw Error(ErrorCode::KindMismatch, std::string(context) + ": " + std::string(to_string(a)) +
                                                 " vs " + std::string(to_string(b)) + " index");
    }
}

IndexValue offset(IndexValue base, IndexDelta step, std::int64_t k, IndexDelta extra) {
    require_same_kind(base.kind(), step.kind(), "offset");
    require_same_kind(base.kind(), extra.kind(), "offset");
    if (base.is_time()) {
        return IndexValue::time_ns(base.ns() + k * step.ns() + extra.ns());
    }
    return IndexValue::numeric(std::fma(static_cast<double>(k), step.numeric_value(), base.numeric_value()) +
                               extra.numeric_value());
}

IndexValue offset(IndexValue base, IndexDelta step, std::int64_t k) {
    return offset(base, step, k, zero_delta(base.kind()));
}

IndexValue offset(IndexValue base, IndexDelta delta) {
    require_same_kind(base.kind(), delta.kind(), "offset");
    return base.is_time() ? IndexValue::time_ns(base.ns() + delta.ns())
                          : IndexValue::numeric(base.numeric_value() + delta.numeric_value());
}

IndexDelta difference(IndexValue later, IndexValue earlier) {
    require_same_kind(later.kind(), earlier.kind(), "difference");
    return later.is_time() ? IndexDelta::time_ns(later.ns() - earlier.ns())
                           : IndexDelta::numeric(later.numeric_value() - earlier.numeric_value());
}

double to_seconds(IndexDelta delta) {
    return delta.is_time() ? static_cast<double>(delta.ns()) * 1e-9 : delta.numeric_value();
}

std::string format_double(double value) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

std::string format_float(float value) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    return std::string(buf.data(), res.ptr);
}

std::string format_delta(IndexDelta delta) {
    if (!delta.is_time()) {
        return format_double(delta.numeric_value());
    }
    const std::int64_t ns = delta.ns();
    if (ns == 0) {
        return "0ns";
    }
    for (const auto& unit : kUnits) {
        if (ns % unit.ns == 0) {
            return std::to_string(ns / unit.ns) + std::string(unit.suffix);
        }
    }
    return std::to_string(ns) + "ns";
}

IndexDelta parse_delta(std::string_view text) {
    if (text.empty()) {
        bad_delta(text);
    }
    for (std::string_view suffix : {"ms", "us", "ns", "D", "h", "m", "s"}) {
        if (text.size() > suffix.size() && text.substr(text.size() - suffix.size()) == suffix) {
            const char before = text[text.size() - suffix.size() - 1];
            if (before < '0' || before > '9') {
                if (before != '.') {
                    continue;
                }
            }
            std::int64_t unit = 1;
            for (const auto& u : kUnits) {
                if (u.suffix == suffix) {
                    unit = u.ns;
                }
            }
            return IndexDelta::time_ns(parse_scaled(text.substr(0, text.size() - suffix.size()), unit, text));
        }
    }
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (*first == '+') {
        ++first;
    }
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last || !std::isfinite(value)) {
        bad_delta(text);
    }
    return IndexDelta::numeric(value);
}

std::string format_rfc3339(std::int64_t ns) {
    constexpr std::int64_t kNsPerSec = 1'000'000'000;
    std::int64_t secs = ns / kNsPerSec;
    std::int64_t frac = ns % kNsPerSec;
    if (frac < 0) {
        frac += kNsPerSec;
        --secs;
    }
    std::int64_t days = secs / 86400;
    std::int64_t sod = secs % 86400;
    if (sod < 0) {
        sod += 86400;
        --days;
    }
    std::int64_t y = 0;
    unsigned m = 0;
    unsigned d = 0;
    civil_from_days(days, y, m, d);
    char buf[64];
    int len = std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld", static_cast<long long>(y), m, d,
                            static_cast<long long>(sod / 3600), static_cast<long long>((sod / 60) % 60),
                            static_cast<long long>(sod % 60));
    std::string out(buf, static_cast<std::size_t>(len));
    if (frac != 0) {
        char fbuf[16];
        std::snprintf(fbuf, sizeof fbuf, "%09lld", static_cast<long long>(frac));
        std::string f(fbuf);
        while (!f.empty() && f.back() == '0') {
            f.pop_back();
        }
        out += '.';
        out += f;
    }
    out += 'Z';
    return out;
}

bool parse_rfc3339(std::string_view text, std::int64_t& out) {
    std::size_t pos = 0;
    int year = 0;
    int month = 0;
    int day = 0;
    int hour = 0;
    int minute = 0;
    int second = 0;
    if (!read_digits(text, pos, 4, year) || !expect(text, pos, '-') || !read_digits(text, pos, 2, month) ||
        !expect(text, pos, '-') || !read_digits(text, pos, 2, day)) {
        return false;
    }
    if (pos >= text.size() || (text[pos] != 'T' && text[pos] != 't' && text[pos] != ' ')) {
        return false;
    }
    ++pos;
    if (!read_digits(text, pos, 2, hour) || !expect(text, pos, ':') || !read_digits(text, pos, 2, minute) ||
        !expect(text, pos, ':') || !read_digits(text, pos, 2, second)) {
        return false;
    }
    if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 || minute > 59 || second > 60) {
        return false;
    }
    std::int64_t frac_ns = 0;
    if (pos < text.size() && text[pos] == '.') {
        ++pos;
        int digits = 0;
        while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') {
            if (digits < 9) {
                frac_ns = frac_ns * 10 + (text[pos] - '0');
            } else {
                return false; // sub-nanosecond precision is not representable
            }
            ++digits;
            ++pos;
        }
        if (digits == 0) {
            return false;
        }
        for (int i = digits; i < 9; ++i) {
            frac_ns *= 10;
        }
    }
    std::int64_t offset_s = 0;
    if (pos < text.size()) {
        const char c = text[pos];
        if (c == 'Z' || c == 'z') {
            ++pos;
        } else if (c == '+' || c == '-') {
            ++pos;
            int oh = 0;
            int om = 0;
            if (!read_digits(text, pos, 2, oh) || !expect(text, pos, ':') || !read_digits(text, pos, 2, om)) {
                return false;
            }
            offset_s = (oh * 3600 + om * 60) * (c == '+' ? 1 : -1);
        } else {
            return false;
        }
    }
    if (pos != text.size()) {
        return false;
    }
    const std::int64_t days = days_from_civil(year, static_cast<unsigned>(month), static_cast<unsigned>(day));
    const std::int64_t secs = days * 86400 + hour * 3600 + minute * 60 + second - offset_s;
    out = secs * 1'000'000'000 + frac_ns;
    return true;
}

std::string format_index_value(IndexValue value) {
    return value.is_time() ? format_rfc3339(value.ns()) : format_double(value.numeric_value());
}

} // namespace seqfeat
