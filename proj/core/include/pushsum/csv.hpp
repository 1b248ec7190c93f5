#pragma once

#include <cstdio>
#include <cstdlib>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace pushsum {

/// Shortest round-trip decimal form of a double ("%.17g" trimmed). The
/// same value always prints the same bytes, which keeps output files
/// byte-reproducible for a fixed configuration and seed.
inline std::string format_double(double value) {
    char buf[40];
    // Try increasing precision until the text parses back exactly.
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, value);
        if (std::strtod(buf, nullptr) == value) break;
    }
    return buf;
}

/// Comma-separated rows with a '#' comment header block.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    void comment(const std::string& line) { out_ << "# " << line << '\n'; }

    void header(const std::vector<std::string>& columns) {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (i > 0) out_ << ',';
            out_ << columns[i];
        }
        out_ << '\n';
    }

    CsvWriter& field(double v) {
        sep();
        out_ << format_double(v);
        return *this;
    }
    CsvWriter& field(long v) {
        sep();
        out_ << v;
        return *this;
    }
    CsvWriter& field(int v) { return field(static_cast<long>(v)); }
    CsvWriter& field(const std::string& v) {
        sep();
        out_ << v;
        return *this;
    }
    CsvWriter& field(const std::optional<double>& v) {
        if (v) return field(*v);
        sep();
        return *this;
    }

    void end_row() {
        out_ << '\n';
        first_ = true;
    }

private:
    void sep() {
        if (!first_) out_ << ',';
        first_ = false;
    }

    std::ostream& out_;
    bool first_ = true;
};

} // namespace pushsum
