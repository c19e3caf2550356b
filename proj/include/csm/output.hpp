#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace csm {

inline constexpr const char* kCsvVersion = "csm-csv v1";

// %.17g
std::string fmt17(double v);

// Table with a versioned comment line "# csm-csv v1 <kind>" before the header.
struct Table {
    std::string kind;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string csv() const;
    // array of objects keyed by the header; numeric-looking cells become numbers
    nlohmann::json json() const;
};

// JSON text with every float printed by fmt17 and keys in insertion-independent (sorted) order.
std::string dump_json(const nlohmann::json& j, int indent = 2);

void write_file(const std::string& path, const std::string& text);

}  // namespace csm
