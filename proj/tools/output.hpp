#pragma once

#include "json.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace wavop::cli {

using nlohmann::json;

struct Provenance {
    std::string subcommand;
    std::string config_sha256;
    std::uint64_t seed = 0;
    int threads = 1;
};

// One convergence gate: passes when value <= limit.
struct Gate {
    std::string name;
    double value = 0;
    double limit = 0;
    bool pass() const { return value <= limit; }
};

struct Gates {
    std::vector<Gate> list;
    void add(std::string name, double value, double limit) { list.push_back({std::move(name), value, limit}); }
    // a boolean condition recorded as 0 (held) or 1 (failed) against limit 0
    void require(std::string name, bool held) { add(std::move(name), held ? 0.0 : 1.0, 0.0); }
    bool converged() const;
};

using Cell = std::variant<double, long long, std::string, bool>;

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::size_t declared_rows = 0; // rows the experiment promised; checked on write
    std::vector<std::pair<std::string, std::string>> notes; // extra "# key value" lines

    void add(std::vector<Cell> row) { rows.push_back(std::move(row)); }
};

std::string sha256_hex(const std::string& data);

// Fixed formatting for doubles so equal runs give equal bytes.
std::string format_double(double x);

// Rendered documents. A failed gate sets status "convergence_failure" in the header.
std::string render_csv(const ResultTable& t, const Provenance& p, const Gates& g);
std::string render_json(const json& result, const Provenance& p, const Gates& g);
// Document for a run stopped by a ConvergenceError.
std::string render_failure(bool as_csv, const std::string& message, const Provenance& p);

// Writes through a temporary file in the same directory and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

// json number that survives non-finite values ("inf", "-inf", "nan").
json jnum(double x);

} // namespace wavop::cli
