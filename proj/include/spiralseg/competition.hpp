#pragma once

#include <string>
#include <vector>

namespace spiralseg {

/// Interspecific competition rates a_ij (i != j), all strictly positive.
/// Species are indexed 0..k-1 in counterclockwise order; the diagonal is ignored.
class CompetitionMatrix {
public:
    /// Row-major k*k entries; throws std::invalid_argument if k < 2 or an off-diagonal entry is <= 0.
    CompetitionMatrix(int k, std::vector<double> entries);

    static CompetitionMatrix symmetric(int k, double value = 1.0);
    /// a_ij = c when j - i = 1 (mod k), 1 otherwise.
    static CompetitionMatrix cyclic(int k, double c);
    /// "symmetric", "symmetric:v" or "cyclic:c".
    static CompetitionMatrix from_preset(int k, const std::string& preset);

    int k() const { return k_; }
    double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * k_ + j]; }
    const std::vector<double>& entries() const { return a_; }
    CompetitionMatrix transposed() const;

private:
    int k_;
    std::vector<double> a_;
};

}  // namespace spiralseg
