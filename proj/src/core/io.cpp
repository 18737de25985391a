#include "lookback/io.hpp"

#include "lookback/errors.hpp"

#include <charconv>
#include <cmath>
#include <filesystem>
#include <system_error>

namespace lookback {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string csv_field(std::string_view raw) {
    if (raw.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(raw);
    std::string out = "\"";
    for (char c : raw) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header, const std::string& config_hash)
    : out_(path, std::ios::binary), path_(path), columns_(header.size()) {
    if (!out_) throw IoError("cannot open " + path + " for writing");
    out_ << "# config_hash=" << config_hash << "\r\n";
    write_row(header);
}

CsvWriter& CsvWriter::field(std::string_view text) {
    pending_.emplace_back(text);
    return *this;
}

CsvWriter& CsvWriter::field(double v) {
    pending_.push_back(format_double(v));
    return *this;
}

CsvWriter& CsvWriter::field(std::size_t v) {
    pending_.push_back(std::to_string(v));
    return *this;
}

void CsvWriter::end_row() {
    if (pending_.size() != columns_) throw Error("row width mismatch in " + path_);
    write_row(pending_);
    pending_.clear();
}

void CsvWriter::write_row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out_ << ',';
        out_ << csv_field(cells[i]);
    }
    out_ << "\r\n";
    if (!out_) throw IoError("write failed for " + path_);
}

void ensure_directory(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw IoError("cannot write " + path);
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void write_path_csv(const std::string& path, const SimPath& sim, const std::string& config_hash) {
    CsvWriter csv(path, {"t", "w_s", "w", "lambda", "x", "m", "sup", "log_s"}, config_hash);
    double ws = 0.0, w = 0.0;
    for (std::size_t k = sim.start; k <= sim.n_steps(); ++k) {
        if (k > sim.start) {
            ws += sim.w_s_incr[k - 1];
            w += sim.w_incr[k - 1];
        }
        csv.field(sim.grid.time(k)).field(ws).field(w).field(sim.lambda[k]).field(sim.x[k]).field(sim.m[k]);
        csv.field(sim.sup[k]).field(sim.log_s[k]);
        csv.end_row();
    }
}

void write_events_csv(const std::string& path, const SimPath& sim, const std::string& config_hash) {
    CsvWriter csv(path, {"time", "z", "accepted", "jump_applied"}, config_hash);
    for (const auto& ev : sim.events) {
        csv.field(ev.time).field(ev.mark).field(std::string_view(ev.accepted ? "1" : "0")).field(ev.jump_applied);
        csv.end_row();
    }
}

}  // namespace lookback
