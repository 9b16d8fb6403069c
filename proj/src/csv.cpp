#include "fhire/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "fhire/error.hpp"

namespace fhire {

const char* to_string(DataErrorKind kind) {
    switch (kind) {
        case DataErrorKind::MissingFile: return "MissingFile";
        case DataErrorKind::BadHeader: return "BadHeader";
        case DataErrorKind::BadField: return "BadField";
        case DataErrorKind::DuplicateId: return "DuplicateId";
        case DataErrorKind::InvalidRegion: return "InvalidRegion";
        case DataErrorKind::UnknownInstitution: return "UnknownInstitution";
        case DataErrorKind::BadYear: return "BadYear";
        case DataErrorKind::BadGender: return "BadGender";
        case DataErrorKind::ZeroMarginal: return "ZeroMarginal";
        case DataErrorKind::EmptyInput: return "EmptyInput";
        case DataErrorKind::CandidateMismatch: return "CandidateMismatch";
        case DataErrorKind::InfeasibleSpec: return "InfeasibleSpec";
    }
    return "DataError";
}

}  // namespace fhire

namespace fhire::csv {

std::vector<std::string> split_line(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.emplace_back(line.substr(start));
            break;
        }
        fields.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

Table read(const std::filesystem::path& path, const std::vector<std::string>& expected_header) {
    std::ifstream in(path);
    if (!in) throw DataError(DataErrorKind::MissingFile, path.string());

    Table table;
    std::string line;
    std::size_t line_no = 0;
    bool have_header = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!have_header) {
            // tolerate a UTF-8 byte order mark
            if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
            table.header = split_line(line);
            have_header = true;
            if (!expected_header.empty() && table.header != expected_header) {
                std::string want;
                for (const auto& h : expected_header) want += (want.empty() ? "" : ",") + h;
                throw DataError(DataErrorKind::BadHeader, path.string() + ": expected '" + want + "'");
            }
            continue;
        }
        if (line.empty() || line == "\r") continue;
        auto fields = split_line(line);
        if (fields.size() != table.header.size()) {
            throw DataError(DataErrorKind::BadField, path.string() + ":" + std::to_string(line_no) +
                                                         ": expected " + std::to_string(table.header.size()) +
                                                         " fields");
        }
        table.rows.push_back(std::move(fields));
        table.line_numbers.push_back(line_no);
    }
    if (!have_header) throw DataError(DataErrorKind::BadHeader, path.string() + ": empty file");
    return table;
}

std::string format_double(double value, int precision) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, value);
    std::string s(buf);
    if (s == "-0" || s.find_first_not_of("-0.") == std::string::npos) {
        // normalize negative zero
        if (s.front() == '-') s.erase(0, 1);
    }
    return s;
}

Writer::Writer(const std::filesystem::path& path) : out_(path) {
    if (!out_) throw DataError(DataErrorKind::MissingFile, "cannot write " + path.string());
}

void Writer::row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out_ << ',';
        out_ << fields[i];
    }
    out_ << '\n';
}

}  // namespace fhire::csv
