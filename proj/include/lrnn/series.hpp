#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace lrnn {

enum class SeriesSource { MG17, MG30, FIRLaser, Henon, Synthetic };

std::string to_string(SeriesSource s);

struct TimeSeries {
    std::vector<double> values;
    double dt = 1.0;  // sampling interval, informational
    SeriesSource source = SeriesSource::Synthetic;
    bool scaled = false;
};

/// Mackey-Glass generator configuration:
///   dx/dt = a x(t - tau) / (1 + x(t - tau)^c) - b x(t).
/// The integrator runs RK4 on a fixed fine grid of width `step`; delayed
/// values at stage times come from linear interpolation of the stored fine
/// grid. tau/step and sample_dt/step must be integral.
struct MgConfig {
    double a = 0.2;
    double b = 0.1;
    double c = 10.0;
    double tau = 17.0;
    double sample_dt = 6.0;
    double step = 0.1;
    double history = 1.2;  // constant value of x on [-tau, 0]
    std::size_t transient_discard = 1000;  // samples dropped before recording
    std::size_t length = 0;                // samples returned
};

/// Samples x at t = (transient_discard + k) * sample_dt for k = 0..length-1;
/// the first recorded sample with transient_discard = 0 is x(0) = history.
TimeSeries gen_mackey_glass(const MgConfig& cfg);

/// Henon map x' = 1 - a x^2 + y, y' = b x started from (x0, y0); returns the
/// x sequence after dropping `transient` iterates. Errors out if |x| exceeds
/// 1e6 (off-attractor seed).
TimeSeries gen_henon(double a, double b, std::size_t n, std::size_t transient, double x0,
                     double y0);

/// One numeric sample per line; blank lines ignored, CRLF tolerated.
TimeSeries load_fir_laser(const std::string& path);

/// Affine map onto [-1, 1]. Errors on constant series.
TimeSeries scale_to_unit(const TimeSeries& series);

/// CSV "index,value" with 17 significant digits (round-trips bit-exactly).
void write_series_csv(const TimeSeries& series, const std::string& path);

/// Reads either the CSV written by write_series_csv or a bare
/// one-value-per-line file.
TimeSeries read_series_values(const std::string& path);

}  // namespace lrnn
