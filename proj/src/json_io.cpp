#include "pisr/json_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "pisr/token.hpp"

namespace pisr {

namespace {

void dump_rec(const nlohmann::json& j, std::string& out, int indent, int level) {
    const std::string pad(indent > 0 ? std::size_t(indent) * level : 0, ' ');
    const std::string pad_in(indent > 0 ? std::size_t(indent) * (level + 1) : 0, ' ');
    const char* nl = indent >= 0 ? "\n" : "";

    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) {
                out += "{}";
                return;
            }
            out += "{";
            out += nl;
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) {
                    out += ",";
                    out += nl;
                }
                first = false;
                out += pad_in;
                out += nlohmann::json(it.key()).dump();
                out += indent >= 0 ? ": " : ":";
                dump_rec(it.value(), out, indent, level + 1);
            }
            out += nl;
            out += pad;
            out += "}";
            return;
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) {
                out += "[]";
                return;
            }
            out += "[";
            out += nl;
            bool first = true;
            for (const auto& el : j) {
                if (!first) {
                    out += ",";
                    out += nl;
                }
                first = false;
                out += pad_in;
                dump_rec(el, out, indent, level + 1);
            }
            out += nl;
            out += pad;
            out += "]";
            return;
        }
        case nlohmann::json::value_t::number_float: {
            const double v = j.get<double>();
            out += std::isfinite(v) ? format_real17(v) : "null";
            return;
        }
        default:
            out += j.dump();
    }
}

}  // namespace

std::string dump_json(const nlohmann::json& j, int indent) {
    std::string out;
    dump_rec(j, out, indent, 0);
    return out;
}

nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    return nlohmann::json::parse(in);
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    write_text_file(path, dump_json(j) + "\n");
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace pisr
