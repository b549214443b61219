#include "spiralseg/competition.hpp"

#include <cmath>
#include <stdexcept>

namespace spiralseg {

CompetitionMatrix::CompetitionMatrix(int k, std::vector<double> entries) : k_(k), a_(std::move(entries)) {
    if (k < 2) throw std::invalid_argument("competition matrix needs k >= 2");
    if (a_.size() != static_cast<std::size_t>(k) * k)
        throw std::invalid_argument("competition matrix needs k*k = " + std::to_string(k * k) +
                                    " entries, got " + std::to_string(a_.size()));
    for (int i = 0; i < k; ++i) {
        for (int j = 0; j < k; ++j) {
            if (i == j) continue;
            const double v = (*this)(i, j);
            if (!(v > 0.0) || !std::isfinite(v))
                throw std::invalid_argument("competition rate a_" + std::to_string(i + 1) +
                                            std::to_string(j + 1) + " must be positive and finite");
        }
    }
}

CompetitionMatrix CompetitionMatrix::symmetric(int k, double value) {
    return CompetitionMatrix(k, std::vector<double>(static_cast<std::size_t>(k) * k, value));
}

CompetitionMatrix CompetitionMatrix::cyclic(int k, double c) {
    std::vector<double> a(static_cast<std::size_t>(k) * k, 1.0);
    for (int i = 0; i < k; ++i) a[static_cast<std::size_t>(i) * k + (i + 1) % k] = c;
    return CompetitionMatrix(k, std::move(a));
}

CompetitionMatrix CompetitionMatrix::from_preset(int k, const std::string& preset) {
    const auto colon = preset.find(':');
    const std::string name = preset.substr(0, colon);
    double param = 1.0;
    if (colon != std::string::npos) {
        try {
            std::size_t used = 0;
            param = std::stod(preset.substr(colon + 1), &used);
            if (used != preset.size() - colon - 1) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw std::invalid_argument("bad matrix preset parameter in '" + preset + "'");
        }
    }
    if (name == "symmetric") return symmetric(k, param);
    if (name == "cyclic") {
        if (colon == std::string::npos) throw std::invalid_argument("preset 'cyclic' needs a rate, e.g. cyclic:4");
        return cyclic(k, param);
    }
    throw std::invalid_argument("unknown matrix preset '" + preset + "'");
}

CompetitionMatrix CompetitionMatrix::transposed() const {
    std::vector<double> t(a_.size());
    for (int i = 0; i < k_; ++i)
        for (int j = 0; j < k_; ++j) t[static_cast<std::size_t>(j) * k_ + i] = (*this)(i, j);
    return CompetitionMatrix(k_, std::move(t));
}

}  // namespace spiralseg
