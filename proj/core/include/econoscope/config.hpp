#pragma once

#include "econoscope/ingest.hpp"
#include "econoscope/simgen.hpp"

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace econoscope {

/// INI-style settings: `[section]` headers, `key = value` lines, `#` or `;`
/// comments. Keys are addressed as "section.key" (bare "key" before any
/// header).
class ConfigFile {
public:
    ConfigFile() = default;

    /// Throws ValidationError naming the line on malformed input.
    static ConfigFile parse(std::istream& in, const std::string& source = "<config>");
    static ConfigFile load(const std::filesystem::path& path);

    bool contains(const std::string& key) const { return values_.count(key) > 0; }
    std::optional<std::string> get(const std::string& key) const;
    std::optional<long long> get_int(const std::string& key) const;
    std::optional<double> get_double(const std::string& key) const;
    std::optional<bool> get_bool(const std::string& key) const;
    /// Comma-separated values, trimmed.
    std::optional<std::vector<std::string>> get_list(const std::string& key) const;

    void set(const std::string& key, std::string value) { values_[key] = std::move(value); }
    const std::map<std::string, std::string>& values() const noexcept { return values_; }
    /// Keys never read through a getter.
    std::vector<std::string> unused_keys() const;

private:
    std::map<std::string, std::string> values_;
    std::map<std::string, std::size_t> lines_;
    std::string source_;
    mutable std::set<std::string> used_;
};

/// Reads [economy] and [sim] keys into `config`.
void apply_config(const ConfigFile& file, SimConfig& config);
/// Reads [economy], [sim] and [corpus] keys into `config`.
void apply_config(const ConfigFile& file, CorpusConfig& config);
/// Reads [split] keys into `boundaries`.
void apply_config(const ConfigFile& file, SplitBoundaries& boundaries);

}  // namespace econoscope
