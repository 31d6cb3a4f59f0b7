#include "fairsynth/csv.hpp"

#include <fstream>
#include <sstream>

#include "fairsynth/error.hpp"

namespace fairsynth {

namespace {

// Splits one logical CSV record; `more` is set when a quoted field continues
// onto the next physical line.
void parse_line(const std::string& line, std::vector<std::string>& out, std::string& pending,
                bool& in_quotes) {
    std::size_t i = 0;
    while (i < line.size()) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    pending += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                pending += c;
            }
        } else {
            if (c == '"' && pending.empty()) {
                in_quotes = true;
            } else if (c == ',') {
                out.push_back(pending);
                pending.clear();
            } else if (c == '\r') {
                // trailing CR from CRLF files
            } else {
                pending += c;
            }
        }
        ++i;
    }
}

bool needs_quoting(const std::string& field) {
    return field.find_first_of(",\"\n") != std::string::npos;
}

std::string quoted(const std::string& field) {
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

CsvData read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open CSV file: " + path);

    CsvData data;
    std::string line;
    std::vector<std::string> record;
    std::string pending;
    bool in_quotes = false;
    bool have_header = false;

    while (std::getline(in, line)) {
        parse_line(line, record, pending, in_quotes);
        if (in_quotes) {
            pending += '\n';  // embedded newline inside a quoted field
            continue;
        }
        record.push_back(pending);
        pending.clear();

        if (!have_header) {
            data.header = std::move(record);
            have_header = true;
        } else {
            if (record.size() != data.header.size())
                throw io_error(path + ": row has " + std::to_string(record.size()) +
                               " fields, header has " + std::to_string(data.header.size()));
            data.rows.push_back(std::move(record));
        }
        record.clear();
    }
    if (in_quotes) throw io_error(path + ": unterminated quoted field");
    if (!have_header) throw io_error(path + ": empty file, expected header row");
    return data;
}

void write_csv(const std::string& path, const CsvData& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write CSV file: " + path);

    auto emit_row = [&out](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << (needs_quoting(row[i]) ? quoted(row[i]) : row[i]);
        }
        out << '\n';
    };
    emit_row(data.header);
    for (const auto& row : data.rows) emit_row(row);
    if (!out) throw io_error("error writing CSV file: " + path);
}

}  // namespace fairsynth
