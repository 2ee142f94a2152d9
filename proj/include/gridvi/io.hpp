#pragma once
// Plain-text writers for study artifacts. Every floating-point value goes out
// with 12 significant digits so that reruns compare byte for byte.

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "errors.hpp"

namespace gridvi::io {

inline std::string num(double v) {
    if (v == 0.0) return "0"; // folds -0 into 0
    return fmt::format("{:.12g}", v);
}

/// Rounds a value to 12 significant digits for JSON output.
inline double round12(double v) { return std::stod(num(v)); }

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, std::initializer_list<std::string_view> header)
        : out_(path, std::ios::binary) {
        if (!out_) throw InputError("cannot open " + path.string() + " for writing");
        bool first = true;
        for (auto h : header) {
            if (!first) buf_ += ',';
            buf_ += h;
            first = false;
        }
        buf_ += '\n';
    }

    CsvWriter(const CsvWriter&) = delete;
    CsvWriter& operator=(const CsvWriter&) = delete;

    ~CsvWriter() { flush(); }

    template <typename... Cells>
    void row(const Cells&... cells) {
        bool first = true;
        ((append(cells, first)), ...);
        buf_ += '\n';
        if (buf_.size() > (1u << 20)) flush();
    }

    void flush() {
        out_ << buf_;
        buf_.clear();
        out_.flush();
    }

private:
    void sep(bool& first) {
        if (!first) buf_ += ',';
        first = false;
    }
    void append(double v, bool& first) {
        sep(first);
        buf_ += num(v);
    }
    void append(int v, bool& first) {
        sep(first);
        buf_ += std::to_string(v);
    }
    void append(std::string_view v, bool& first) {
        sep(first);
        buf_ += v;
    }

    std::ofstream out_;
    std::string buf_;
};

/// Recursively rounds every floating-point number in a JSON tree.
inline void round_json(nlohmann::json& j) {
    if (j.is_number_float()) {
        j = round12(j.get<double>());
    } else if (j.is_structured()) {
        for (auto& v : j) round_json(v);
    }
}

inline void write_json(const std::filesystem::path& path, nlohmann::json j) {
    round_json(j);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out << j.dump(2) << '\n';
}

inline nlohmann::json read_json(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot read " + path.string());
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(path.string() + ": " + e.what());
    }
}

inline void write_text(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot open " + path.string() + " for writing");
    out << text;
}

template <typename V>
nlohmann::json to_json_array(const V& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

} // namespace gridvi::io
