#include "lrnn/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace lrnn {

std::string to_string(SeriesSource s) {
    switch (s) {
        case SeriesSource::MG17: return "mg17";
        case SeriesSource::MG30: return "mg30";
        case SeriesSource::FIRLaser: return "fir";
        case SeriesSource::Henon: return "henon";
        default: return "synthetic";
    }
}

TimeSeries gen_mackey_glass(const MgConfig& cfg) {
    if (cfg.length == 0) throw std::invalid_argument("gen_mackey_glass: zero length");
    if (cfg.step <= 0.0 || cfg.sample_dt <= 0.0 || cfg.tau < cfg.step)
        throw std::invalid_argument("gen_mackey_glass: bad step/tau configuration");

    const double steps_per_sample_real = cfg.sample_dt / cfg.step;
    const double delay_steps_real = cfg.tau / cfg.step;
    const auto steps_per_sample = static_cast<std::size_t>(std::llround(steps_per_sample_real));
    const auto delay_steps = static_cast<std::size_t>(std::llround(delay_steps_real));
    if (std::abs(steps_per_sample_real - static_cast<double>(steps_per_sample)) > 1e-9)
        throw std::invalid_argument("gen_mackey_glass: sample_dt not a multiple of step");
    if (std::abs(delay_steps_real - static_cast<double>(delay_steps)) > 1e-9)
        throw std::invalid_argument("gen_mackey_glass: tau not a multiple of step");

    const std::size_t total_samples = cfg.transient_discard + cfg.length;
    const std::size_t total_steps = total_samples * steps_per_sample;

    // Fine grid x[i] = x(i * step); times at or before zero read the
    // constant history.
    std::vector<double> grid;
    grid.reserve(total_steps + 1);
    grid.push_back(cfg.history);

    const double h = cfg.step;
    auto delayed = [&](double t) -> double {
        const double td = t - cfg.tau;
        if (td <= 0.0) return cfg.history;
        const double pos = td / h;
        const auto i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        if (i + 1 >= grid.size()) return grid.back();
        return grid[i] + frac * (grid[i + 1] - grid[i]);
    };
    auto drive = [&](double xd) { return cfg.a * xd / (1.0 + std::pow(xd, cfg.c)); };

    for (std::size_t n = 0; n < total_steps; ++n) {
        const double t = static_cast<double>(n) * h;
        const double x = grid.back();
        const double g1 = drive(delayed(t));
        const double gm = drive(delayed(t + 0.5 * h));
        const double g4 = drive(delayed(t + h));
        const double k1 = g1 - cfg.b * x;
        const double k2 = gm - cfg.b * (x + 0.5 * h * k1);
        const double k3 = gm - cfg.b * (x + 0.5 * h * k2);
        const double k4 = g4 - cfg.b * (x + h * k3);
        const double next = x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!std::isfinite(next))
            throw std::runtime_error("gen_mackey_glass: non-finite state at step " +
                                     std::to_string(n));
        grid.push_back(next);
    }

    TimeSeries out;
    out.dt = cfg.sample_dt;
    out.source = cfg.tau == 30.0 ? SeriesSource::MG30
                                 : (cfg.tau == 17.0 ? SeriesSource::MG17 : SeriesSource::Synthetic);
    out.values.reserve(cfg.length);
    for (std::size_t k = 0; k < cfg.length; ++k)
        out.values.push_back(grid[(cfg.transient_discard + k) * steps_per_sample]);
    return out;
}

TimeSeries gen_henon(double a, double b, std::size_t n, std::size_t transient, double x0,
                     double y0) {
    if (n == 0) throw std::invalid_argument("gen_henon: zero length");
    TimeSeries out;
    out.source = SeriesSource::Henon;
    out.values.reserve(n);
    double x = x0, y = y0;
    for (std::size_t i = 0; i < transient + n; ++i) {
        const double xn = 1.0 - a * x * x + y;
        const double yn = b * x;
        x = xn;
        y = yn;
        if (!std::isfinite(x) || std::abs(x) > 1e6)
            throw std::runtime_error("gen_henon: divergence at iterate " + std::to_string(i) +
                                     " (off-attractor seed)");
        if (i >= transient) out.values.push_back(x);
    }
    return out;
}

namespace {

std::vector<double> parse_value_lines(std::istream& in, const std::string& origin,
                                      bool header_allowed) {
    std::vector<double> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;

        std::string field = line;
        const auto comma = line.find(',');
        if (comma != std::string::npos) field = line.substr(comma + 1);
        if (header_allowed && (field == "value" || line == "index,value")) {
            header_allowed = false;
            continue;
        }
        header_allowed = false;
        try {
            std::size_t used = 0;
            const double v = std::stod(field, &used);
            while (used < field.size() && (field[used] == ' ' || field[used] == '\t')) ++used;
            if (used != field.size()) throw std::invalid_argument("trailing characters");
            values.push_back(v);
        } catch (const std::exception&) {
            throw std::runtime_error(origin + ": non-numeric value at line " +
                                     std::to_string(lineno));
        }
    }
    return values;
}

}  // namespace

TimeSeries load_fir_laser(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_fir_laser: cannot open " + path);
    TimeSeries out;
    out.source = SeriesSource::FIRLaser;
    out.values = parse_value_lines(in, path, /*header_allowed=*/false);
    if (out.values.empty()) throw std::runtime_error("load_fir_laser: no samples in " + path);
    return out;
}

TimeSeries scale_to_unit(const TimeSeries& series) {
    if (series.values.empty()) throw std::invalid_argument("scale_to_unit: empty series");
    const auto [mn_it, mx_it] = std::minmax_element(series.values.begin(), series.values.end());
    const double mn = *mn_it, mx = *mx_it;
    if (!(mx > mn)) throw std::runtime_error("scale_to_unit: constant series");
    TimeSeries out = series;
    const double span = mx - mn;
    for (double& v : out.values) v = 2.0 * (v - mn) / span - 1.0;
    out.scaled = true;
    return out;
}

void write_series_csv(const TimeSeries& series, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_series_csv: cannot open " + path);
    out << "index,value\n";
    char buf[40];
    for (std::size_t i = 0; i < series.values.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", series.values[i]);
        out << i << ',' << buf << '\n';
    }
    if (!out) throw std::runtime_error("write_series_csv: write failed for " + path);
}

TimeSeries read_series_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("read_series_values: cannot open " + path);
    TimeSeries out;
    out.values = parse_value_lines(in, path, /*header_allowed=*/true);
    if (out.values.empty())
        throw std::runtime_error("read_series_values: no samples in " + path);
    return out;
}

}  // namespace lrnn
