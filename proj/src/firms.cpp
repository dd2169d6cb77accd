#include "csd/firms.hpp"

#include "csd/error.hpp"
#include "csd/geodata.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>

namespace csd {

void BBox::validate() const {
    if (!(lon_min < lon_max) || !(lat_min < lat_max))
        throw ValidationError("bbox: require lon_min < lon_max and lat_min < lat_max");
}

bool Confidence::passes(double min_confidence) const {
    switch (kind) {
        case Kind::absent: return true;
        case Kind::numeric: return numeric >= min_confidence;
        case Kind::nominal: {
            const double v = level == Level::low ? 10.0 : level == Level::nominal ? 50.0 : 90.0;
            return v >= min_confidence;
        }
    }
    return true;
}

namespace {

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string strip(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

bool parse_double(const std::string& s, double& out) {
    const std::string t = strip(s);
    if (t.empty()) return false;
    const char* first = t.data();
    const char* last = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

struct Columns {
    int lat = -1, lon = -1, date = -1, time = -1, confidence = -1, instrument = -1, satellite = -1;
};

Columns bind_columns(const std::vector<std::string>& header) {
    Columns c;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name = lower(strip(header[i]));
        const int idx = static_cast<int>(i);
        if (name == "latitude") c.lat = idx;
        else if (name == "longitude") c.lon = idx;
        else if (name == "acq_date") c.date = idx;
        else if (name == "acq_time") c.time = idx;
        else if (name == "confidence") c.confidence = idx;
        else if (name == "instrument") c.instrument = idx;
        else if (name == "satellite") c.satellite = idx;
    }
    if (c.lat < 0 || c.lon < 0 || c.date < 0)
        throw ValidationError("firms csv: header must contain latitude, longitude, acq_date");
    return c;
}

// "HHMM", "HMM", "HH:MM" -> minutes of day.
bool parse_acq_time(const std::string& raw, int& minutes) {
    std::string t = strip(raw);
    t.erase(std::remove(t.begin(), t.end(), ':'), t.end());
    if (t.empty() || t.size() > 4) return false;
    for (char ch : t)
        if (!std::isdigit(static_cast<unsigned char>(ch))) return false;
    const int v = std::stoi(t);
    const int hh = v / 100, mm = v % 100;
    if (hh > 23 || mm > 59) return false;
    minutes = hh * 60 + mm;
    return true;
}

bool parse_confidence(const std::string& raw, Confidence& out) {
    const std::string t = lower(strip(raw));
    if (t.empty()) {
        out = Confidence::absent();
        return true;
    }
    if (t == "l" || t == "low") {
        out = Confidence::from_level(Confidence::Level::low);
        return true;
    }
    if (t == "n" || t == "nominal") {
        out = Confidence::from_level(Confidence::Level::nominal);
        return true;
    }
    if (t == "h" || t == "high") {
        out = Confidence::from_level(Confidence::Level::high);
        return true;
    }
    double v = 0.0;
    if (!parse_double(t, v) || v < 0.0 || v > 100.0) return false;
    out = Confidence::from_numeric(v);
    return true;
}

} // namespace

ParseResult parse_firms_csv_text(const std::string& text, const ParseOptions& options,
                                 const std::string& origin_label) {
    if (options.bbox) options.bbox->validate();
    if (options.min_confidence && (*options.min_confidence < 0.0 || *options.min_confidence > 100.0))
        throw ValidationError("firms csv: min_confidence must be in [0, 100]");
    const std::optional<std::string> want_instrument =
        options.instrument ? std::optional<std::string>(lower(*options.instrument)) : std::nullopt;

    ParseResult result;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool have_header = false;
    Columns cols;

    auto malformed = [&](const std::string& why) {
        if (options.mode == ParseMode::strict) {
            throw ValidationError(origin_label + ": line " + std::to_string(line_no) + ": " + why);
        }
        ++result.skipped_malformed;
    };

    while (pos <= text.size()) {
        if (pos == text.size()) break;
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (strip(line).empty()) continue;

        const std::vector<std::string> fields = split_csv(line);
        if (!have_header) {
            cols = bind_columns(fields);
            have_header = true;
            continue;
        }
        ++result.total_rows;

        const int max_required = std::max({cols.lat, cols.lon, cols.date});
        if (static_cast<int>(fields.size()) <= max_required) {
            malformed("too few fields");
            continue;
        }
        auto field = [&](int idx) -> std::string {
            return idx >= 0 && idx < static_cast<int>(fields.size()) ? fields[static_cast<std::size_t>(idx)]
                                                                     : std::string();
        };

        FireDetection d;
        if (!parse_double(field(cols.lat), d.lat) || d.lat < -90.0 || d.lat > 90.0) {
            malformed("bad latitude '" + strip(field(cols.lat)) + "'");
            continue;
        }
        if (!parse_double(field(cols.lon), d.lon) || d.lon < -180.0 || d.lon > 180.0) {
            malformed("bad longitude '" + strip(field(cols.lon)) + "'");
            continue;
        }
        const auto date = Date::parse(strip(field(cols.date)));
        if (!date) {
            malformed("bad acq_date '" + strip(field(cols.date)) + "'");
            continue;
        }
        d.acq_date = *date;

        bool bad_optional = false;
        if (cols.time >= 0 && !strip(field(cols.time)).empty()) {
            int minutes = 0;
            if (parse_acq_time(field(cols.time), minutes)) d.acq_time_minutes = minutes;
            else {
                malformed("bad acq_time '" + strip(field(cols.time)) + "'");
                bad_optional = true;
            }
        }
        if (!bad_optional && cols.confidence >= 0) {
            if (!parse_confidence(field(cols.confidence), d.confidence)) {
                malformed("bad confidence '" + strip(field(cols.confidence)) + "'");
                bad_optional = true;
            }
        }
        if (bad_optional) continue;

        d.instrument = strip(field(cols.instrument));
        if (d.instrument.empty()) d.instrument = strip(field(cols.satellite));

        // Filters. Rejection here is counted separately from malformed rows.
        if (options.bbox && !options.bbox->contains(d.lon, d.lat)) {
            ++result.skipped_filtered;
            continue;
        }
        if (options.min_confidence && !d.confidence.passes(*options.min_confidence)) {
            ++result.skipped_filtered;
            continue;
        }
        if (want_instrument && lower(d.instrument) != *want_instrument) {
            ++result.skipped_filtered;
            continue;
        }
        result.detections.push_back(std::move(d));
    }
    if (!have_header) throw ValidationError(origin_label + ": empty file (no header row)");
    return result;
}

ParseResult parse_firms_csv(const std::string& path, const ParseOptions& options) {
    return parse_firms_csv_text(read_text_file(path), options, path);
}

std::vector<FireDetection> filter_by_dates(const std::vector<FireDetection>& detections, Date start,
                                           Date end) {
    if (end < start) throw ValidationError("filter_by_dates: start must be <= end");
    std::vector<FireDetection> out;
    for (const auto& d : detections) {
        if (!(d.acq_date < start) && !(end < d.acq_date)) out.push_back(d);
    }
    return out;
}

} // namespace csd
