#pragma once

#include "lookback/path_sim.hpp"

#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace lookback {

// Shortest decimal that round-trips, '.' as separator.
std::string format_double(double v);
std::string csv_field(std::string_view raw);

// RFC 4180 writer (CRLF line ends). The first line is a '#' comment carrying
// the config hash, then the mandatory header.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header, const std::string& config_hash);

    CsvWriter& field(std::string_view text);
    CsvWriter& field(double v);
    CsvWriter& field(std::size_t v);
    void end_row();

private:
    void write_row(const std::vector<std::string>& cells);

    std::ofstream out_;
    std::string path_;
    std::size_t columns_ = 0;
    std::vector<std::string> pending_;
};

void ensure_directory(const std::string& dir);
void write_text_file(const std::string& path, const std::string& text);
std::string join_path(const std::string& dir, const std::string& name);

void write_path_csv(const std::string& path, const SimPath& sim, const std::string& config_hash);
void write_events_csv(const std::string& path, const SimPath& sim, const std::string& config_hash);

}  // namespace lookback
