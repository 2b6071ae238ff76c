#include "ordbo/text_doc.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "ordbo/errors.hpp"

namespace ordbo {
namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (pos < s.size()) {
        const auto start = s.find_first_not_of(" \t", pos);
        if (start == std::string_view::npos) break;
        auto end = s.find_first_of(" \t", start);
        if (end == std::string_view::npos) end = s.size();
        out.push_back(s.substr(start, end - start));
        pos = end;
    }
    return out;
}

}  // namespace

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
    s = trim(s);
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
        throw DomainError("not a number: '" + std::string(s) + "'");
    }
    return v;
}

TextDocument TextDocument::parse(std::string_view text) {
    TextDocument doc;
    std::string current;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const auto line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw DomainError("line " + std::to_string(line_no) + ": unterminated section header");
            current = std::string(trim(line.substr(1, line.size() - 2)));
            if (!doc.sections_.count(current)) doc.order_.push_back(current);
            doc.sections_[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) throw DomainError("line " + std::to_string(line_no) + ": expected key = value");
        doc.set(current, std::string(trim(line.substr(0, eq))), std::string(trim(line.substr(eq + 1))));
    }
    return doc;
}

std::string TextDocument::str() const {
    std::ostringstream out;
    for (const auto& name : order_) {
        if (!name.empty()) out << '[' << name << "]\n";
        for (const auto& [k, v] : sections_.at(name)) out << k << " = " << v << '\n';
        out << '\n';
    }
    return out.str();
}

void TextDocument::set(const std::string& section, const std::string& key, const std::string& value) {
    if (!sections_.count(section)) order_.push_back(section);
    sections_[section][key] = value;
}

void TextDocument::set(const std::string& section, const std::string& key, double value) {
    set(section, key, format_double(value));
}

void TextDocument::set(const std::string& section, const std::string& key, const std::vector<double>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += ' ';
        s += format_double(values[i]);
    }
    set(section, key, s);
}

void TextDocument::set(const std::string& section, const std::string& key, const std::vector<int>& values) {
    std::string s;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) s += ' ';
        s += std::to_string(values[i]);
    }
    set(section, key, s);
}

bool TextDocument::has(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(section);
    return it != sections_.end() && it->second.count(key);
}

const std::string& TextDocument::get(const std::string& section, const std::string& key) const {
    if (!has(section, key)) throw DomainError("missing key '" + key + "' in section [" + section + "]");
    return sections_.at(section).at(key);
}

double TextDocument::get_double(const std::string& section, const std::string& key) const {
    return parse_double(get(section, key));
}

std::vector<double> TextDocument::get_doubles(const std::string& section, const std::string& key) const {
    std::vector<double> out;
    for (auto tok : split_ws(get(section, key))) out.push_back(parse_double(tok));
    return out;
}

std::vector<int> TextDocument::get_ints(const std::string& section, const std::string& key) const {
    std::vector<int> out;
    for (auto tok : split_ws(get(section, key))) {
        int v = 0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
            throw DomainError("not an integer: '" + std::string(tok) + "'");
        }
        out.push_back(v);
    }
    return out;
}

const TextDocument::Section& TextDocument::section(const std::string& name) const {
    const auto it = sections_.find(name);
    if (it == sections_.end()) throw DomainError("missing section [" + name + "]");
    return it->second;
}

}  // namespace ordbo
