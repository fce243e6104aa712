#pragma once

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace sle {

// shortest round-trip decimal representation, locale-independent
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    // try shorter forms that still round-trip
    for (int prec = 1; prec < 17; ++prec) {
        char t[40];
        std::snprintf(t, sizeof(t), "%.*g", prec, v);
        double back = std::strtod(t, nullptr);
        if (back == v) return std::string(t);
    }
    return std::string(buf);
}

// Writes CSV files with `# key=value` metadata comment lines before the
// header row.  All simulation outputs go through this so that provenance
// (tool version, command line, seed) is embedded uniformly.
class CsvWriter {
public:
    explicit CsvWriter(const std::string& path) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open for write: " + path);
    }
    void meta(const std::string& key, const std::string& value) {
        out_ << "# " << key << "=" << value << "\n";
    }
    void meta(const std::string& key, double value) { meta(key, fmt_double(value)); }
    void meta(const std::string& key, long long value) { meta(key, std::to_string(value)); }
    void header(const std::string& h) { out_ << h << "\n"; }
    void row(const std::vector<std::string>& cells) {
        for (size_t i = 0; i < cells.size(); ++i) {
            if (i) out_ << ',';
            out_ << cells[i];
        }
        out_ << "\n";
    }
    void raw_line(const std::string& line) { out_ << line << "\n"; }
    void close() { out_.close(); }

private:
    std::ofstream out_;
};

struct CsvFile {
    std::map<std::string, std::string> meta;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    double meta_num(const std::string& key) const {
        auto it = meta.find(key);
        if (it == meta.end()) throw std::runtime_error("missing metadata key: " + key);
        return std::strtod(it->second.c_str(), nullptr);
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

inline CsvFile read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for read: " + path);
    CsvFile f;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string body = line.substr(1);
            size_t start = body.find_first_not_of(' ');
            if (start == std::string::npos) continue;
            body = body.substr(start);
            // one or more key=value tokens separated by spaces
            std::istringstream ss(body);
            std::string tok;
            while (ss >> tok) {
                size_t eq = tok.find('=');
                if (eq != std::string::npos)
                    f.meta[tok.substr(0, eq)] = tok.substr(eq + 1);
            }
            continue;
        }
        if (!have_header) {
            f.header = split_csv_line(line);
            have_header = true;
        } else {
            f.rows.push_back(split_csv_line(line));
        }
    }
    return f;
}

} // namespace sle
