#include "spiralseg/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace spiralseg {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

double to_double(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || p != t.data() + t.size())
        throw ConfigError(key + ": not a number: '" + t + "'");
    return v;
}

int to_int(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    int v = 0;
    const auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc() || p != t.data() + t.size())
        throw ConfigError(key + ": not an integer: '" + t + "'");
    return v;
}

bool to_bool(const std::string& key, const std::string& text) {
    const std::string t = trim(text);
    if (t == "1" || t == "true" || t == "yes") return true;
    if (t == "0" || t == "false" || t == "no") return false;
    throw ConfigError(key + ": expected true/false, got '" + t + "'");
}

std::vector<double> to_list(const std::string& key, const std::string& text) {
    std::vector<double> out;
    std::istringstream in(text);
    std::string cell;
    while (std::getline(in, cell, ',')) out.push_back(to_double(key, cell));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

FitWindow to_window(const std::string& key, const std::string& text) {
    const auto v = to_list(key, text);
    if (v.size() != 2) throw ConfigError(key + ": expected y_lo,y_hi");
    return {v[0], v[1]};
}

// shortest text that reads back to the same double
std::string num(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string list_text(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + num(v[i]);
    return out;
}

}  // namespace

CompetitionMatrix ExperimentConfig::build_matrix() const {
    try {
        const std::string m = trim(matrix);
        if (m.rfind("symmetric", 0) == 0 || m.rfind("cyclic", 0) == 0) return CompetitionMatrix::from_preset(h, m);
        std::vector<double> entries = to_list("matrix", m);
        if (entries.size() != static_cast<std::size_t>(h) * h)
            throw ConfigError("matrix: expected " + std::to_string(h * h) + " entries for k=" + std::to_string(h));
        return CompetitionMatrix(h, std::move(entries));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("matrix: ") + e.what());
    }
}

TraceSpec ExperimentConfig::build_traces() const {
    try {
        if (trace_table.empty()) return make_sector_traces(h);
        std::ifstream in(trace_table);
        if (!in) throw ConfigError("trace_table: cannot open " + trace_table);
        std::vector<std::pair<double, double>> table;
        std::string line;
        int ln = 0;
        while (std::getline(in, line)) {
            ++ln;
            const std::string t = trim(line);
            if (t.empty() || t[0] == '#') continue;
            const auto comma = t.find(',');
            if (comma == std::string::npos) throw ConfigError(trace_table + ":" + std::to_string(ln) + ": expected theta,value");
            const std::string where = trace_table + ":" + std::to_string(ln);
            try {
                table.emplace_back(to_double(where, t.substr(0, comma)), to_double(where, t.substr(comma + 1)));
            } catch (const ConfigError&) {
                // tolerate a header line
                if (table.empty() && ln == 1) continue;
                throw;
            }
        }
        return make_table_traces(h, std::move(table));
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("traces: ") + e.what());
    }
}

StripGrid ExperimentConfig::build_grid() const {
    try {
        return StripGrid(n_theta, n_y, y_max);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }
}

void ExperimentConfig::validate() const {
    if (h < 3) throw ConfigError("h must be >= 3");
    build_grid();
    build_matrix();
    build_traces();
    if (beta_schedule.empty()) throw ConfigError("beta_schedule is empty");
    for (std::size_t i = 0; i < beta_schedule.size(); ++i) {
        if (!(beta_schedule[i] >= 0.0)) throw ConfigError("beta_schedule entries must be >= 0");
        if (i && !(beta_schedule[i] > beta_schedule[i - 1]))
            throw ConfigError("beta_schedule must be strictly increasing");
    }
    if (!(relax.tolerance > 0.0) || !(relax.inner_tolerance > 0.0)) throw ConfigError("tolerances must be > 0");
    if (relax.max_outer < 1) throw ConfigError("max_outer must be >= 1");
    if (!(relax.relaxation > 0.0 && relax.relaxation < 2.0)) throw ConfigError("relaxation must lie in (0, 2)");
    if (!(presence.delta > 0.0)) throw ConfigError("delta must be > 0");
    if (presence.rho < 2) throw ConfigError("rho must be >= 2");
    for (const auto* w : {&fit_window, &check_window}) {
        if (!(w->y_hi > w->y_lo) || w->y_lo < 0.0 || w->y_hi > y_max)
            throw ConfigError("fit windows must satisfy 0 <= y_lo < y_hi <= y_max");
    }
    if (!(min_window_span > 0.0 && min_window_span <= y_max))
        throw ConfigError("min_window_span must lie in (0, y_max]");
    if (!(angle_row > 0.0 && angle_row < y_max)) throw ConfigError("angle_row must lie inside (0, y_max)");
}

std::vector<std::string> preset_names() { return {"fig1a", "fig1b", "fig1c"}; }

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig c;
    c.name = name;
    c.h = 3;
    if (name == "fig1a") {
        c.matrix = "symmetric";
    } else if (name == "fig1b") {
        c.matrix = "cyclic:4";
    } else if (name == "fig1c") {
        c.matrix = "cyclic:10";
    } else {
        throw ConfigError("unknown preset '" + name + "' (known: fig1a, fig1b, fig1c)");
    }
    return c;
}

void apply_config_value(ExperimentConfig& c, const std::string& key, const std::string& raw) {
    const std::string v = trim(raw);
    if (key == "preset") {
        const std::string out = c.output;
        c = preset_config(v);
        c.output = out;
    } else if (key == "name") {
        c.name = v;
    } else if (key == "h" || key == "k") {
        c.h = to_int(key, v);
    } else if (key == "matrix") {
        c.matrix = v;
    } else if (key == "trace_table") {
        c.trace_table = v;
    } else if (key == "n_theta") {
        c.n_theta = to_int(key, v);
    } else if (key == "n_y") {
        c.n_y = to_int(key, v);
    } else if (key == "grid") {
        std::tie(c.n_theta, c.n_y) = parse_grid_size(v);
    } else if (key == "y_max") {
        c.y_max = to_double(key, v);
    } else if (key == "beta_schedule") {
        c.beta_schedule = to_list(key, v);
    } else if (key == "tolerance") {
        c.relax.tolerance = to_double(key, v);
    } else if (key == "inner_tolerance") {
        c.relax.inner_tolerance = to_double(key, v);
    } else if (key == "max_outer") {
        c.relax.max_outer = to_int(key, v);
    } else if (key == "relaxation") {
        c.relax.relaxation = to_double(key, v);
    } else if (key == "max_inner_cycles") {
        c.relax.max_inner_cycles = to_int(key, v);
    } else if (key == "delta") {
        c.presence.delta = to_double(key, v);
    } else if (key == "delta_row_relative") {
        c.presence.row_relative = to_bool(key, v);
    } else if (key == "rho") {
        c.presence.rho = to_int(key, v);
    } else if (key == "fit_window") {
        c.fit_window = to_window(key, v);
    } else if (key == "check_window") {
        c.check_window = to_window(key, v);
    } else if (key == "clip_windows") {
        c.clip_windows = to_bool(key, v);
    } else if (key == "min_window_span") {
        c.min_window_span = to_double(key, v);
    } else if (key == "angle_row") {
        c.angle_row = to_double(key, v);
    } else if (key == "alpha_tolerance") {
        c.tolerances.alpha_rel = to_double(key, v);
    } else if (key == "alpha_abs_tolerance") {
        c.tolerances.alpha_abs = to_double(key, v);
    } else if (key == "nu_tolerance") {
        c.tolerances.nu_rel = to_double(key, v);
    } else if (key == "angle_tolerance_deg") {
        c.tolerances.angle_deg = to_double(key, v);
    } else if (key == "overlap_max") {
        c.tolerances.overlap_max = to_double(key, v);
    } else if (key == "sign_defect_max") {
        c.tolerances.sign_defect_max = to_double(key, v);
    } else if (key == "output") {
        c.output = v;
    } else {
        throw ConfigError("unknown key '" + key + "'");
    }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    ExperimentConfig c;
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(ln) + ": expected key = value");
        try {
            apply_config_value(c, trim(t.substr(0, eq)), t.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(path.string() + ":" + std::to_string(ln) + ": " + e.what());
        }
    }
    return c;
}

std::pair<int, int> parse_grid_size(const std::string& text) {
    const std::string t = trim(text);
    const auto x = t.find_first_of("xX");
    if (x == std::string::npos) throw ConfigError("grid size must look like NxM, got '" + t + "'");
    return {to_int("grid", t.substr(0, x)), to_int("grid", t.substr(x + 1))};
}

std::string describe(const ExperimentConfig& c) {
    std::ostringstream out;
    out << "name = " << c.name << "\n"
        << "h = " << c.h << "\n"
        << "matrix = " << c.matrix << "\n";
    if (!c.trace_table.empty()) out << "trace_table = " << c.trace_table << "\n";
    const auto window = [](const FitWindow& w) { return num(w.y_lo) + "," + num(w.y_hi); };
    const CheckTolerances& t = c.tolerances;
    out << "n_theta = " << c.n_theta << "\n"
        << "n_y = " << c.n_y << "\n"
        << "y_max = " << num(c.y_max) << "\n"
        << "beta_schedule = " << list_text(c.beta_schedule) << "\n"
        << "tolerance = " << num(c.relax.tolerance) << "\n"
        << "inner_tolerance = " << num(c.relax.inner_tolerance) << "\n"
        << "max_outer = " << c.relax.max_outer << "\n"
        << "relaxation = " << num(c.relax.relaxation) << "\n"
        << "max_inner_cycles = " << c.relax.max_inner_cycles << "\n"
        << "delta = " << num(c.presence.delta) << "\n"
        << "delta_row_relative = " << (c.presence.row_relative ? "true" : "false") << "\n"
        << "rho = " << c.presence.rho << "\n"
        << "fit_window = " << window(c.fit_window) << "\n"
        << "check_window = " << window(c.check_window) << "\n"
        << "clip_windows = " << (c.clip_windows ? "true" : "false") << "\n"
        << "min_window_span = " << num(c.min_window_span) << "\n"
        << "angle_row = " << num(c.angle_row) << "\n"
        << "alpha_tolerance = " << num(t.alpha_rel) << "\n"
        << "alpha_abs_tolerance = " << num(t.alpha_abs) << "\n"
        << "nu_tolerance = " << num(t.nu_rel) << "\n"
        << "angle_tolerance_deg = " << num(t.angle_deg) << "\n"
        << "overlap_max = " << num(t.overlap_max) << "\n"
        << "sign_defect_max = " << num(t.sign_defect_max) << "\n"
        << "output = " << c.output << "\n";
    return out.str();
}

}  // namespace spiralseg
