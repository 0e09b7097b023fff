#pragma once

#include <fstream>
#include <string>
#include <vector>

namespace msl {

/// Minimal RFC-4180 writer: one header line, comma separated, fields quoted
/// only when they contain a comma, quote or line break.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header);

    CsvWriter& field(const std::string& s);
    CsvWriter& field(double v);
    CsvWriter& field(long long v);
    CsvWriter& field(int v) { return field(static_cast<long long>(v)); }
    CsvWriter& field(std::size_t v) { return field(static_cast<long long>(v)); }
    CsvWriter& empty();
    void end_row();

    const std::string& path() const { return path_; }

private:
    void sep();

    std::string path_;
    std::ofstream out_;
    bool row_started_ = false;
};

std::string csv_escape(const std::string& s);
/// Shortest round-trippable decimal form.
std::string format_double(double v);

}  // namespace msl
