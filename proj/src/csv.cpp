#include "sma/csv.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace sma::csv {

std::string num(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string quote(const std::string& f)
{
    if (f.find_first_of(",\"\r\n") == std::string::npos) return f;
    std::string out = "\"";
    for (char c : f) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

void write_row(std::ostream& os, const std::vector<std::string>& fields)
{
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << quote(fields[i]);
    }
    os << '\n';
}

void write_row(std::ostream& os, const std::vector<double>& values)
{
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) os << ',';
        os << num(values[i]);
    }
    os << '\n';
}

namespace {

bool read_record(std::istream& is, std::vector<std::string>& out)
{
    out.clear();
    std::string field;
    bool in_quotes = false, any = false;
    char c;
    while (is.get(c)) {
        any = true;
        if (in_quotes) {
            if (c == '"') {
                if (is.peek() == '"') {
                    is.get(c);
                    field += '"';
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c == '\n') {
            out.push_back(field);
            return true;
        } else if (c != '\r') {
            field += c;
        }
    }
    if (in_quotes) throw std::runtime_error("csv: unterminated quoted field");
    if (any) out.push_back(field);
    return any;
}

} // namespace

Table read(std::istream& is)
{
    Table t;
    std::vector<std::string> rec;
    if (!read_record(is, t.header)) return t;
    while (read_record(is, rec)) {
        if (rec.size() != t.header.size())
            throw std::runtime_error("csv: row width does not match header");
        t.rows.push_back(rec);
    }
    return t;
}

} // namespace sma::csv
