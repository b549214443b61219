#include "spiralseg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace spiralseg {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double parse_double(const std::string& text, const fs::path& file, int line) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
        throw FormatError(file, line, "not a number: '" + t + "'");
    return v;
}

int parse_int(const std::string& text, const fs::path& file, int line) {
    const std::string t = trim(text);
    int v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
        throw FormatError(file, line, "not an integer: '" + t + "'");
    return v;
}

void write_gray(const std::vector<unsigned char>& px, int w, int h, const fs::path& path) {
    auto out = open_out(path);
    out << "P5\n" << w << " " << h << "\n255\n";
    out.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_field_csv(const Field& f, const fs::path& path) {
    const StripGrid& g = f.grid();
    auto out = open_out(path);
    out << "n_theta,n_y,y_max,role\n";
    out << g.n_theta() << "," << g.n_y() << "," << format_double(g.y_max()) << "," << to_string(f.role()) << "\n";
    std::string line;
    for (int j = 0; j < g.n_y(); ++j) {
        line.clear();
        const auto row = f.row(j);
        for (int i = 0; i < g.n_theta(); ++i) {
            if (i) line += ',';
            line += format_double(row[i]);
        }
        line += '\n';
        out << line;
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

Field read_field_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError(path, 0, "cannot open file");
    std::string line;
    int ln = 0;
    if (!std::getline(in, line)) throw FormatError(path, 1, "empty file");
    ++ln;
    if (trim(line).rfind("n_theta,n_y,y_max", 0) != 0) throw FormatError(path, ln, "missing n_theta,n_y,y_max header");
    if (!std::getline(in, line)) throw FormatError(path, 2, "missing grid line");
    ++ln;
    const auto head = split(trim(line), ',');
    if (head.size() < 3 || head.size() > 4) throw FormatError(path, ln, "grid line needs n_theta,n_y,y_max[,role]");
    const int nt = parse_int(head[0], path, ln);
    const int ny = parse_int(head[1], path, ln);
    const double ymax = parse_double(head[2], path, ln);
    FieldRole role = FieldRole::Generic;
    if (head.size() == 4) {
        try {
            role = field_role_from_string(trim(head[3]));
        } catch (const std::exception& e) {
            throw FormatError(path, ln, e.what());
        }
    }
    std::optional<StripGrid> g;
    try {
        g.emplace(nt, ny, ymax);
    } catch (const std::exception& e) {
        throw FormatError(path, ln, e.what());
    }
    std::vector<double> v;
    v.reserve(g->size());
    for (int j = 0; j < ny; ++j) {
        if (!std::getline(in, line)) throw FormatError(path, ln + 1, "expected " + std::to_string(ny) + " value rows");
        ++ln;
        const auto cells = split(trim(line), ',');
        if (static_cast<int>(cells.size()) != nt)
            throw FormatError(path, ln, "expected " + std::to_string(nt) + " values, got " + std::to_string(cells.size()));
        for (const auto& c : cells) {
            const double x = parse_double(c, path, ln);
            if (!std::isfinite(x)) throw FormatError(path, ln, "non-finite value");
            v.push_back(x);
        }
    }
    while (std::getline(in, line)) {
        ++ln;
        if (!trim(line).empty()) throw FormatError(path, ln, "trailing data after the last row");
    }
    if (role == FieldRole::Density)
        for (double x : v)
            if (x < 0.0) throw FormatError(path, 0, "density field has negative values");
    return Field(*g, role, std::move(v));
}

void write_pgm(const Field& f, const fs::path& path) {
    const StripGrid& g = f.grid();
    const double lo = f.min(), hi = f.max();
    const double s = hi > lo ? 255.0 / (hi - lo) : 0.0;
    std::vector<unsigned char> px(g.size());
    const auto v = f.values();
    for (std::size_t n = 0; n < px.size(); ++n) px[n] = static_cast<unsigned char>(std::lround((v[n] - lo) * s));
    write_gray(px, g.n_theta(), g.n_y(), path);
}

void write_species_pgm(const SystemState& state, const fs::path& path) {
    const StripGrid& g = state.grid();
    const int k = state.k();
    std::vector<double> peak(k, 0.0);
    for (int s = 0; s < k; ++s) peak[s] = std::max(state.fields[s].max(), 1e-300);
    const double band = 255.0 / k;
    std::vector<unsigned char> px(g.size(), 0);
    for (std::size_t n = 0; n < g.size(); ++n) {
        int best = -1;
        double bv = 0.0;
        for (int s = 0; s < k; ++s) {
            const double v = state.fields[s].values()[n] / peak[s];
            if (v > bv) {
                bv = v;
                best = s;
            }
        }
        if (best >= 0) px[n] = static_cast<unsigned char>(std::lround(band * best + (band - 1.0) * std::sqrt(bv)));
    }
    write_gray(px, g.n_theta(), g.n_y(), path);
}

void write_multiplicity_pgm(const MultiplicityMap& m, int k, const fs::path& path) {
    std::vector<unsigned char> px(m.m.size());
    for (std::size_t n = 0; n < px.size(); ++n) px[n] = static_cast<unsigned char>(std::lround(255.0 * m.m[n] / k));
    write_gray(px, m.grid.n_theta(), m.grid.n_y(), path);
}

void write_checkpoint(const SystemState& state, const CompetitionMatrix& a, const fs::path& dir) {
    fs::create_directories(dir);
    auto out = open_out(dir / "manifest.txt");
    out << "k=" << state.k() << "\n";
    out << "beta=" << format_double(state.beta) << "\n";
    out << "iterations=" << state.iterations << "\n";
    out << "converged=" << (state.converged ? 1 : 0) << "\n";
    out << "residual=";
    for (int i = 0; i < state.k(); ++i) out << (i ? "," : "") << format_double(state.residual.at(i));
    out << "\nmatrix=";
    for (std::size_t n = 0; n < a.entries().size(); ++n) out << (n ? "," : "") << format_double(a.entries()[n]);
    out << "\n";
    for (int i = 0; i < state.k(); ++i) {
        const std::string name = "species_" + std::to_string(i) + ".csv";
        out << "species_" << i << "=" << name << "\n";
        write_field_csv(state.fields[i], dir / name);
    }
}

Checkpoint read_checkpoint(const fs::path& dir) {
    const fs::path mf = dir / "manifest.txt";
    std::ifstream in(mf);
    if (!in) throw FormatError(mf, 0, "cannot open checkpoint manifest");
    std::map<std::string, std::pair<std::string, int>> kv;
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw FormatError(mf, ln, "expected key=value");
        kv[trim(t.substr(0, eq))] = {trim(t.substr(eq + 1)), ln};
    }
    auto get = [&](const std::string& key) -> const std::pair<std::string, int>& {
        const auto it = kv.find(key);
        if (it == kv.end()) throw FormatError(mf, ln, "missing key '" + key + "'");
        return it->second;
    };
    const auto& kk = get("k");
    const int k = parse_int(kk.first, mf, kk.second);
    if (k < 2) throw FormatError(mf, kk.second, "k must be >= 2");
    const auto& mx = get("matrix");
    std::vector<double> entries;
    for (const auto& c : split(mx.first, ',')) entries.push_back(parse_double(c, mf, mx.second));
    if (entries.size() != static_cast<std::size_t>(k) * k)
        throw FormatError(mf, mx.second, "matrix needs k*k entries");
    std::optional<CompetitionMatrix> a;
    try {
        a.emplace(k, entries);
    } catch (const std::exception& e) {
        throw FormatError(mf, mx.second, e.what());
    }
    SystemState s;
    const auto& b = get("beta");
    s.beta = parse_double(b.first, mf, b.second);
    if (kv.count("iterations")) s.iterations = parse_int(kv["iterations"].first, mf, kv["iterations"].second);
    if (kv.count("converged")) s.converged = parse_int(kv["converged"].first, mf, kv["converged"].second) != 0;
    if (kv.count("residual")) {
        const auto& r = kv["residual"];
        for (const auto& c : split(r.first, ',')) s.residual.push_back(parse_double(c, mf, r.second));
        if (static_cast<int>(s.residual.size()) != k) throw FormatError(mf, r.second, "residual needs k entries");
    } else {
        s.residual.assign(k, 0.0);
    }
    for (int i = 0; i < k; ++i) {
        const auto& f = get("species_" + std::to_string(i));
        Field field = read_field_csv(dir / f.first);
        if (!s.fields.empty() && !(field.grid() == s.grid()))
            throw FormatError(dir / f.first, 2, "grid differs from species_0");
        field.set_role(FieldRole::Density);
        for (double v : field.values())
            if (v < 0.0) throw FormatError(dir / f.first, 0, "negative density");
        s.fields.push_back(std::move(field));
    }
    return {std::move(s), std::move(*a)};
}

void write_curves_csv(const std::vector<NodalCurve>& curves, const fs::path& path) {
    auto out = open_out(path);
    out << "i,j,fragment,theta_unwrapped,y,r,px,py\n";
    for (const auto& c : curves) {
        auto emit = [&](const std::vector<CurvePoint>& pts, int frag) {
            for (const auto& p : pts) {
                const CartesianPoint q = to_cartesian(p.theta, p.y);
                out << c.i << "," << c.j << "," << frag << "," << format_double(p.theta) << "," << format_double(p.y)
                    << "," << format_double(std::exp(-p.y)) << "," << format_double(q.x) << "," << format_double(q.y)
                    << "\n";
            }
        };
        if (c.partial) {
            for (std::size_t f = 0; f < c.fragments.size(); ++f) emit(c.fragments[f], static_cast<int>(f));
        } else {
            emit(c.points, 0);
        }
    }
}

void write_fourier_csv(const FourierTable& t, const fs::path& path) {
    auto out = open_out(path);
    out << "y,k,re_W,im_W\n";
    for (std::size_t r = 0; r < t.y.size(); ++r)
        for (int k = 0; k <= t.kmax; ++k)
            out << format_double(t.y[r]) << "," << k << "," << format_double(t.W[r][k].real()) << ","
                << format_double(t.W[r][k].imag()) << "\n";
}

void write_constants_csv(const SpectralConstants& c, const fs::path& path) {
    auto out = open_out(path);
    out << "quantity,value\n";
    out << "h," << c.h << "\n";
    out << "lambda," << format_double(c.lambda) << "\n";
    out << "alpha," << format_double(c.alpha) << "\n";
    out << "nu," << format_double(c.nu) << "\n";
    for (std::size_t i = 0; i < c.weights.size(); ++i) out << "w_" << i << "," << format_double(c.weights[i]) << "\n";
    out << "doubled," << (c.doubled ? 1 : 0) << "\n";
    out << "h_eff," << c.h_eff << "\n";
    out << "lambda_eff," << format_double(c.lambda_eff) << "\n";
    out << "alpha_eff," << format_double(c.alpha_eff) << "\n";
    out << "nu_eff," << format_double(c.nu_eff) << "\n";
}

}  // namespace spiralseg
