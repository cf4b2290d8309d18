#include "output.hpp"

#include "wavop/version.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wavop::cli {

bool Gates::converged() const
{
    for (const auto& g : list)
        if (!g.pass()) return false;
    return true;
}

std::string sha256_hex(const std::string& data)
{
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr))
        throw std::runtime_error("sha256 failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0) return "0"; // no "-0"
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

json jnum(double x)
{
    if (std::isfinite(x)) return x;
    return format_double(x);
}

namespace {

std::string cell_text(const Cell& c)
{
    if (auto d = std::get_if<double>(&c)) return format_double(*d);
    if (auto i = std::get_if<long long>(&c)) return std::to_string(*i);
    if (auto b = std::get_if<bool>(&c)) return *b ? "true" : "false";
    const std::string& s = std::get<std::string>(c);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

void csv_header(std::ostringstream& os, const Provenance& p)
{
    os << "# wavop " << p.subcommand << "\n";
    os << "# config_sha256 " << p.config_sha256 << "\n";
    os << "# seed " << p.seed << "\n";
    os << "# threads " << p.threads << "\n";
    for (const auto& [name, ver] : kModuleVersions) os << "# module " << name << " " << ver << "\n";
}

json provenance_json(const Provenance& p)
{
    json mods = json::object();
    for (const auto& [name, ver] : kModuleVersions) mods[std::string(name)] = std::string(ver);
    return {{"subcommand", p.subcommand},
            {"config_sha256", p.config_sha256},
            {"seed", p.seed},
            {"threads", p.threads},
            {"modules", mods}};
}

} // namespace

std::string render_csv(const ResultTable& t, const Provenance& p, const Gates& g)
{
    if (t.rows.size() != t.declared_rows)
        throw std::logic_error("result table has " + std::to_string(t.rows.size()) + " rows, declared " +
                               std::to_string(t.declared_rows));
    std::ostringstream os;
    csv_header(os, p);
    for (const auto& gate : g.list)
        os << "# gate " << gate.name << " " << format_double(gate.value) << " <= " << format_double(gate.limit) << " "
           << (gate.pass() ? "pass" : "FAIL") << "\n";
    os << "# converged " << (g.converged() ? "true" : "false") << "\n";
    for (const auto& [k, v] : t.notes) os << "# " << k << " " << v << "\n";
    os << "# status " << (g.converged() ? "ok" : "convergence_failure") << "\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
    os << "\n";
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size()) throw std::logic_error("result row width differs from the header");
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << cell_text(row[c]);
        os << "\n";
    }
    return os.str();
}

std::string render_json(const json& result, const Provenance& p, const Gates& g)
{
    json gates = json::array();
    for (const auto& gate : g.list)
        gates.push_back({{"name", gate.name}, {"value", jnum(gate.value)}, {"limit", jnum(gate.limit)}, {"pass", gate.pass()}});
    json doc = {{"provenance", provenance_json(p)},
                {"convergence", {{"converged", g.converged()}, {"gates", gates}}},
                {"status", g.converged() ? "ok" : "convergence_failure"},
                {"result", result}};
    return doc.dump(2) + "\n";
}

std::string render_failure(bool as_csv, const std::string& message, const Provenance& p)
{
    if (as_csv) {
        std::ostringstream os;
        csv_header(os, p);
        os << "# converged false\n";
        os << "# error " << message << "\n";
        os << "# status convergence_failure\n";
        return os.str();
    }
    json doc = {{"provenance", provenance_json(p)},
                {"convergence", {{"converged", false}, {"error", message}}},
                {"status", "convergence_failure"},
                {"result", nullptr}};
    return doc.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, const std::string& content)
{
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp);
        out << content;
        if (!out) throw std::runtime_error("write to " + tmp + " failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot move output into " + path + ": " + ec.message());
    }
}

} // namespace wavop::cli
