#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace fhire::csv {

// Plain comma-separated text without quoting; the formats this project reads never quote fields.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;  // 1-based source line of each row
};

std::vector<std::string> split_line(std::string_view line);

// Throws DataError(MissingFile) if the file is absent, DataError(BadHeader) if the
// header differs from `expected_header` (when given), DataError(BadField) on a ragged row.
Table read(const std::filesystem::path& path, const std::vector<std::string>& expected_header = {});

// Fixed-precision formatting so repeated runs produce byte-identical files.
std::string format_double(double value, int precision = 6);

class Writer {
public:
    explicit Writer(const std::filesystem::path& path);

    void row(const std::vector<std::string>& fields);

private:
    std::ofstream out_;
};

}  // namespace fhire::csv
