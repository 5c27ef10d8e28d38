#pragma once

// Machine-readable outputs. CSV: UTF-8, LF, comma separator, numbers with 9
// significant digits, fixed header per command. JSON records mirror the CSV.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cellflow/errors.hpp"
#include "cellflow/geometry.hpp"
#include "cellflow/rheology.hpp"

namespace cellflow {

inline std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw Error("CsvWriter: cannot open " + path);
        for (size_t i = 0; i < header.size(); ++i)
            out_ << (i ? "," : "") << header[i];
        out_ << "\n";
    }

    class Row {
    public:
        explicit Row(std::ofstream& out) : out_(out) {}
        Row& operator<<(double v) { return put(format_g9(v)); }
        Row& operator<<(int v) { return put(std::to_string(v)); }
        Row& operator<<(const std::string& s) { return put(s); }
        ~Row() { out_ << "\n"; }

    private:
        Row& put(const std::string& s) {
            if (n_++) out_ << ",";
            out_ << s;
            return *this;
        }
        std::ofstream& out_;
        int n_ = 0;
    };

    Row row() { return Row(out_); }

private:
    std::ofstream out_;
};

inline nlohmann::json to_json(const InclusionShape& s) {
    nlohmann::json j;
    if (s.kind == InclusionKind::Disk) {
        j["kind"] = "disk";
        j["radius"] = s.radius;
    } else {
        j["kind"] = "ellipse";
        j["semi_major"] = s.semi_major;
        j["semi_minor"] = s.semi_minor;
    }
    j["angle"] = s.angle;
    return j;
}

inline nlohmann::json to_json(const CellSpec& c) {
    nlohmann::json j;
    j["shape"] = c.shape ? to_json(*c.shape) : nlohmann::json{{"kind", "none"}};
    j["n_seg"] = c.n_seg;
    j["h"] = c.h;
    j["n_layers"] = c.n_layers;
    return j;
}

inline nlohmann::json to_json(const Carreau& f) {
    return {{"eta0", f.eta0}, {"eta_inf", f.eta_inf}, {"lambda", f.lambda}, {"r", f.r}};
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("write_json: cannot open " + path);
    out << j.dump(2) << "\n";
}

} // namespace cellflow
