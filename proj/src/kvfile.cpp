#include "biobot/kvfile.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace biobot {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

double parse_double(std::string_view text, std::string_view key)
{
    const std::string t = trim(text);
    double v = 0.0;
    const auto* end = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (t.empty() || ec != std::errc{} || ptr != end || !std::isfinite(v))
        throw FormatError("key '" + std::string(key) + "': expected a number, got '" + t + "'");
    return v;
}

long long parse_int(std::string_view text, std::string_view key)
{
    const std::string t = trim(text);
    long long v = 0;
    const auto* end = t.data() + t.size();
    auto [ptr, ec] = std::from_chars(t.data(), end, v);
    if (t.empty() || ec != std::errc{} || ptr != end)
        throw FormatError("key '" + std::string(key) + "': expected an integer, got '" + t + "'");
    return v;
}

std::vector<double> parse_doubles(std::string_view text, std::string_view key)
{
    std::vector<double> out;
    std::string s(text);
    for (char& c : s)
        if (c == ',')
            c = ' ';
    std::istringstream in(s);
    std::string tok;
    while (in >> tok)
        out.push_back(parse_double(tok, key));
    return out;
}

std::string format_double(double v)
{
    char buf[64];
    for (int prec = 6; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v)
            break;
    }
    return buf;
}

const KvEntry* KvSection::find(std::string_view key) const
{
    for (const auto& e : entries)
        if (e.key == key)
            return &e;
    return nullptr;
}

const std::string& KvSection::get(std::string_view key) const
{
    if (const auto* e = find(key))
        return e->value;
    throw FormatError("section [" + name + "] (line " + std::to_string(line) + "): missing key '" +
                      std::string(key) + "'");
}

double KvSection::get_double(std::string_view key) const { return parse_double(get(key), key); }

double KvSection::get_double(std::string_view key, double fallback) const
{
    const auto* e = find(key);
    return e ? parse_double(e->value, key) : fallback;
}

std::vector<double> KvSection::get_doubles(std::string_view key) const { return parse_doubles(get(key), key); }

void KvSection::require_known(const std::vector<std::string_view>& allowed) const
{
    for (const auto& e : entries) {
        bool ok = false;
        for (auto a : allowed)
            ok = ok || a == e.key;
        if (!ok)
            throw FormatError("unknown key '" + e.key + "' at line " + std::to_string(e.line) +
                              (name.empty() ? std::string{} : " in section [" + name + "]"));
    }
}

std::vector<const KvSection*> KvDocument::all(std::string_view name) const
{
    std::vector<const KvSection*> out;
    for (const auto& s : sections)
        if (s.name == name)
            out.push_back(&s);
    return out;
}

const KvSection* KvDocument::first(std::string_view name) const
{
    for (const auto& s : sections)
        if (s.name == name)
            return &s;
    return nullptr;
}

KvDocument parse_kv(std::string_view text, std::string_view source)
{
    KvDocument doc;
    doc.sections.push_back(KvSection{"", 0, {}});
    std::istringstream in{std::string(text)};
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = raw;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.resize(hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw FormatError(std::string(source) + ":" + std::to_string(lineno) + ": unterminated section header");
            doc.sections.push_back(KvSection{trim(line.substr(1, line.size() - 2)), lineno, {}});
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw FormatError(std::string(source) + ":" + std::to_string(lineno) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        if (key.empty())
            throw FormatError(std::string(source) + ":" + std::to_string(lineno) + ": empty key");
        doc.sections.back().entries.push_back(KvEntry{std::move(key), trim(line.substr(eq + 1)), lineno});
    }
    return doc;
}

std::string read_text_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw FormatError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

KvDocument load_kv(const std::string& path) { return parse_kv(read_text_file(path), path); }

} // namespace biobot
