#pragma once

#include <string>
#include <vector>

namespace econoscope {

/// Aligned plain-text table. First column left-aligned, the rest right-aligned.
class TextTable {
public:
    explicit TextTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_row(std::vector<std::string> row) { rows_.push_back(std::move(row)); }
    /// A horizontal rule before the next row.
    void add_rule() { rules_.push_back(rows_.size()); }
    std::string render() const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
    std::vector<std::size_t> rules_;
};

/// Fixed-point formatting ("0.708").
std::string fixed(double value, int decimals);
/// Percentage with no decimals ("63%").
std::string percent(double fraction);

}  // namespace econoscope
