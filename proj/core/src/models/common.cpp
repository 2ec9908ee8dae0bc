#include "econoscope/models/common.hpp"

namespace econoscope {

Standardizer Standardizer::identity(std::size_t n) {
    return {std::vector<double>(n, 0.0), std::vector<double>(n, 1.0)};
}

Standardizer Standardizer::fit(const Dataset& data, std::span<const std::size_t> columns) {
    Standardizer s = identity(columns.size());
    if (data.empty()) return s;
    const double n = static_cast<double>(data.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        double sum = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) sum += data.row(i)[columns[j]];
        const double mean = sum / n;
        double ss = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double d = data.row(i)[columns[j]] - mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / n);
        s.mean[j] = mean;
        s.scale[j] = sd > 1e-12 ? sd : 1.0;
    }
    return s;
}

}  // namespace econoscope
