#pragma once

#include <string>
#include <vector>

namespace fairsynth {

/// Raw comma-separated rows, all cells as strings. Header included as rows[0]
/// by the reader; the writer quotes per RFC 4180 when needed.
struct CsvData {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvData read_csv(const std::string& path);
void write_csv(const std::string& path, const CsvData& data);

}  // namespace fairsynth
