#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ordbo {

/// Minimal sectioned `key = value` document used for checkpoints and config files.
/// Lines starting with '#' are comments; `[name]` opens a section; keys before any
/// section header belong to the unnamed section "".
class TextDocument {
public:
    using Section = std::map<std::string, std::string>;

    static TextDocument parse(std::string_view text);
    [[nodiscard]] std::string str() const;

    void set(const std::string& section, const std::string& key, const std::string& value);
    void set(const std::string& section, const std::string& key, double value);
    void set(const std::string& section, const std::string& key, const std::vector<double>& values);
    void set(const std::string& section, const std::string& key, const std::vector<int>& values);

    [[nodiscard]] bool has(const std::string& section, const std::string& key) const;
    [[nodiscard]] const std::string& get(const std::string& section, const std::string& key) const;
    [[nodiscard]] double get_double(const std::string& section, const std::string& key) const;
    [[nodiscard]] std::vector<double> get_doubles(const std::string& section, const std::string& key) const;
    [[nodiscard]] std::vector<int> get_ints(const std::string& section, const std::string& key) const;

    [[nodiscard]] const std::vector<std::string>& section_order() const { return order_; }
    [[nodiscard]] const Section& section(const std::string& name) const;

private:
    std::map<std::string, Section> sections_;
    std::vector<std::string> order_;
};

/// Shortest round-trippable decimal form of a double ("inf", "-inf", "nan" for non-finite values).
std::string format_double(double v);
double parse_double(std::string_view s);

}  // namespace ordbo
