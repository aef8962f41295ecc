#pragma once
/**
 * @file kvfile.hpp
 * @brief Plain-text key/value files with optional repeated [sections].
 *
 * Grammar (one item per line):
 *   # comment            -- ignored, also allowed after a value
 *   [section]            -- starts a new section; names may repeat
 *   key = value          -- value is everything after '=' up to '#', trimmed
 *
 * Keys before the first section header belong to an unnamed section.
 */

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace biobot {

/// Malformed or semantically invalid input file / config value.
class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct KvEntry {
    std::string key;
    std::string value;
    int line{0};
};

struct KvSection {
    std::string name;
    int line{0};
    std::vector<KvEntry> entries;

    const KvEntry* find(std::string_view key) const;
    bool has(std::string_view key) const { return find(key) != nullptr; }
    const std::string& get(std::string_view key) const;
    double get_double(std::string_view key) const;
    double get_double(std::string_view key, double fallback) const;
    std::vector<double> get_doubles(std::string_view key) const;
    /// Throws FormatError naming the first key not in @p allowed.
    void require_known(const std::vector<std::string_view>& allowed) const;
};

struct KvDocument {
    std::vector<KvSection> sections;

    std::vector<const KvSection*> all(std::string_view name) const;
    const KvSection* first(std::string_view name) const;
};

KvDocument parse_kv(std::string_view text, std::string_view source = "<input>");
KvDocument load_kv(const std::string& path);
/// Whole file as a string; throws FormatError if unreadable.
std::string read_text_file(const std::string& path);

double parse_double(std::string_view text, std::string_view key);
long long parse_int(std::string_view text, std::string_view key);
std::vector<double> parse_doubles(std::string_view text, std::string_view key);
std::string trim(std::string_view s);

/// Shortest round-trippable text for a double.
std::string format_double(double v);

} // namespace biobot
