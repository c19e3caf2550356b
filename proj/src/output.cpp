#include "csm/output.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "csm/errors.hpp"

namespace csm {

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string Table::csv() const {
    std::string out = std::string("# ") + kCsvVersion + " " + kind + "\n";
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
    out += "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
        out += "\n";
    }
    return out;
}

nlohmann::json Table::json() const {
    auto arr = nlohmann::json::array();
    for (const auto& row : rows) {
        nlohmann::json o = nlohmann::json::object();
        for (std::size_t i = 0; i < header.size() && i < row.size(); ++i) {
            const char* s = row[i].c_str();
            char* end = nullptr;
            const double v = std::strtod(s, &end);
            if (end != s && *end == '\0') o[header[i]] = v;
            else o[header[i]] = row[i];
        }
        arr.push_back(std::move(o));
    }
    return arr;
}

namespace {

void dump_into(const nlohmann::json& j, int indent, int depth, std::string& out) {
    const std::string pad = indent > 0 ? "\n" + std::string(std::size_t(indent) * (depth + 1), ' ') : "";
    const std::string close = indent > 0 ? "\n" + std::string(std::size_t(indent) * depth, ' ') : "";
    if (j.is_number_float()) {
        const double v = j.get<double>();
        out += std::isfinite(v) ? fmt17(v) : "null";
    } else if (j.is_object()) {
        if (j.empty()) {
            out += "{}";
            return;
        }
        out += "{";
        bool first = true;
        for (const auto& [key, value] : j.items()) {
            out += (first ? "" : ",") + pad + nlohmann::json(key).dump() + (indent > 0 ? ": " : ":");
            dump_into(value, indent, depth + 1, out);
            first = false;
        }
        out += close + "}";
    } else if (j.is_array()) {
        if (j.empty()) {
            out += "[]";
            return;
        }
        out += "[";
        bool first = true;
        for (const auto& value : j) {
            out += (first ? "" : ",") + pad;
            dump_into(value, indent, depth + 1, out);
            first = false;
        }
        out += close + "]";
    } else {
        out += j.dump();
    }
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
    std::string out;
    dump_into(j, indent, 0, out);
    return out + "\n";
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + path + "'");
    f << text;
    if (!f) throw ConfigError("write failed for '" + path + "'");
}

}  // namespace csm
