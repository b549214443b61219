#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "spiralseg/competition.hpp"
#include "spiralseg/grid.hpp"
#include "spiralseg/segregation.hpp"
#include "spiralseg/solver.hpp"
#include "spiralseg/spectral.hpp"

namespace spiralseg {

/// Malformed input; what() names the file and line.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::filesystem::path& file, int line, const std::string& what)
        : std::runtime_error(file.string() + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}
    const std::filesystem::path& file() const { return file_; }
    int line() const { return line_; }

private:
    std::filesystem::path file_;
    int line_;
};

/// Shortest round-trip text for a double (17 significant digits).
std::string format_double(double v);

// Field CSV: "n_theta,n_y,y_max,role" header, one line with those values, then
// one line per grid row.
void write_field_csv(const Field& f, const std::filesystem::path& path);
Field read_field_csv(const std::filesystem::path& path);

/// 8-bit binary PGM of values scaled from [min, max] to [0, 255], row y = 0 on top.
void write_pgm(const Field& f, const std::filesystem::path& path);
/// Dominant species per node, species s drawn in its own gray band.
void write_species_pgm(const SystemState& state, const std::filesystem::path& path);
void write_multiplicity_pgm(const MultiplicityMap& m, int k, const std::filesystem::path& path);

/// Directory with manifest.txt and species_<i>.csv.
void write_checkpoint(const SystemState& state, const CompetitionMatrix& a, const std::filesystem::path& dir);

struct Checkpoint {
    SystemState state;
    CompetitionMatrix matrix;
};
Checkpoint read_checkpoint(const std::filesystem::path& dir);

void write_curves_csv(const std::vector<NodalCurve>& curves, const std::filesystem::path& path);
void write_fourier_csv(const FourierTable& t, const std::filesystem::path& path);
void write_constants_csv(const SpectralConstants& c, const std::filesystem::path& path);

}  // namespace spiralseg
