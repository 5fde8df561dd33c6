#include "lrnn/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace lrnn {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kMarginL = 70.0;
constexpr double kMarginR = 20.0;
constexpr double kMarginT = 36.0;
constexpr double kMarginB = 48.0;

struct Series2D {
    std::vector<double> x, y;
    std::string color = "#000000";
    std::string dash;  // empty = solid
    std::string label;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// One panel with linear or log10 y axis.
class Panel {
public:
    Panel(std::string title, std::string xlabel, std::string ylabel, bool log_y)
        : title_(std::move(title)),
          xlabel_(std::move(xlabel)),
          ylabel_(std::move(ylabel)),
          log_y_(log_y) {}

    void add(Series2D s) {
        for (std::size_t i = 0; i < s.y.size(); ++i) {
            if (log_y_) s.y[i] = std::log10(std::max(s.y[i], 1e-18));
            xmin_ = std::min(xmin_, s.x[i]);
            xmax_ = std::max(xmax_, s.x[i]);
            ymin_ = std::min(ymin_, s.y[i]);
            ymax_ = std::max(ymax_, s.y[i]);
        }
        series_.push_back(std::move(s));
    }

    void set_y_range(double lo, double hi) {
        ymin_ = log_y_ ? std::log10(std::max(lo, 1e-18)) : lo;
        ymax_ = log_y_ ? std::log10(std::max(hi, 1e-18)) : hi;
    }

    double data_ymin() const { return log_y_ ? std::pow(10.0, ymin_) : ymin_; }
    double data_ymax() const { return log_y_ ? std::pow(10.0, ymax_) : ymax_; }

    // Renders into `out` translated by (x0, y0).
    void render(std::ostream& out, double x0, double y0) const {
        double xmin = xmin_, xmax = xmax_, ymin = ymin_, ymax = ymax_;
        if (!(xmax > xmin)) xmax = xmin + 1.0;
        if (!(ymax > ymin)) ymax = ymin + 1.0;
        const double pw = kWidth - kMarginL - kMarginR;
        const double ph = kHeight - kMarginT - kMarginB;
        auto px = [&](double x) { return x0 + kMarginL + (x - xmin) / (xmax - xmin) * pw; };
        auto py = [&](double y) { return y0 + kHeight - kMarginB - (y - ymin) / (ymax - ymin) * ph; };

        out << "<rect x=\"" << fmt(x0 + kMarginL) << "\" y=\"" << fmt(y0 + kMarginT)
            << "\" width=\"" << fmt(pw) << "\" height=\"" << fmt(ph)
            << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        out << "<text x=\"" << fmt(x0 + kWidth / 2) << "\" y=\"" << fmt(y0 + 20)
            << "\" text-anchor=\"middle\" font-size=\"14\" font-family=\"sans-serif\">" << title_
            << "</text>\n";
        out << "<text x=\"" << fmt(x0 + kWidth / 2) << "\" y=\"" << fmt(y0 + kHeight - 12)
            << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">"
            << xlabel_ << "</text>\n";
        out << "<text x=\"" << fmt(x0 + 16) << "\" y=\"" << fmt(y0 + kHeight / 2)
            << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\" "
               "transform=\"rotate(-90 "
            << fmt(x0 + 16) << ' ' << fmt(y0 + kHeight / 2) << ")\">" << ylabel_ << "</text>\n";

        for (int k = 0; k <= 4; ++k) {
            const double fx = xmin + (xmax - xmin) * k / 4.0;
            const double fy = ymin + (ymax - ymin) * k / 4.0;
            out << "<line x1=\"" << fmt(px(fx)) << "\" y1=\"" << fmt(y0 + kHeight - kMarginB)
                << "\" x2=\"" << fmt(px(fx)) << "\" y2=\"" << fmt(y0 + kHeight - kMarginB + 5)
                << "\" stroke=\"#333333\"/>\n";
            out << "<text x=\"" << fmt(px(fx)) << "\" y=\"" << fmt(y0 + kHeight - kMarginB + 18)
                << "\" text-anchor=\"middle\" font-size=\"10\" font-family=\"sans-serif\">"
                << fmt(fx) << "</text>\n";
            out << "<line x1=\"" << fmt(x0 + kMarginL - 5) << "\" y1=\"" << fmt(py(fy))
                << "\" x2=\"" << fmt(x0 + kMarginL) << "\" y2=\"" << fmt(py(fy))
                << "\" stroke=\"#333333\"/>\n";
            out << "<text x=\"" << fmt(x0 + kMarginL - 8) << "\" y=\"" << fmt(py(fy) + 3)
                << "\" text-anchor=\"end\" font-size=\"10\" font-family=\"sans-serif\">"
                << (log_y_ ? "1e" + fmt(fy) : fmt(fy)) << "</text>\n";
        }

        for (const auto& s : series_) {
            out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.3\"";
            if (!s.dash.empty()) out << " stroke-dasharray=\"" << s.dash << "\"";
            out << " points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (i) out << ' ';
                out << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i]));
            }
            out << "\"/>\n";
        }

        double ly = y0 + kMarginT + 14;
        for (const auto& s : series_) {
            if (s.label.empty()) continue;
            const double lx = x0 + kWidth - kMarginR - 120;
            out << "<line x1=\"" << fmt(lx) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
                << fmt(lx + 24) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << s.color
                << "\" stroke-width=\"1.3\"";
            if (!s.dash.empty()) out << " stroke-dasharray=\"" << s.dash << "\"";
            out << "/>\n<text x=\"" << fmt(lx + 30) << "\" y=\"" << fmt(ly)
                << "\" font-size=\"10\" font-family=\"sans-serif\">" << s.label << "</text>\n";
            ly += 14;
        }
    }

private:
    std::string title_, xlabel_, ylabel_;
    bool log_y_;
    std::vector<Series2D> series_;
    double xmin_ = 1e300, xmax_ = -1e300, ymin_ = 1e300, ymax_ = -1e300;
};

void write_svg(const std::string& path, const std::vector<Panel>& panels) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("emit_plots: cannot open " + path);
    const double total_w = kWidth * static_cast<double>(panels.size());
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(total_w)
        << "\" height=\"" << fmt(kHeight) << "\" viewBox=\"0 0 " << fmt(total_w) << ' '
        << fmt(kHeight) << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    for (std::size_t i = 0; i < panels.size(); ++i)
        panels[i].render(out, kWidth * static_cast<double>(i), 0.0);
    out << "</svg>\n";
    if (!out) throw std::runtime_error("emit_plots: write failed for " + path);
}

std::string shade(std::size_t idx, std::size_t total) {
    const int level = total > 1 ? static_cast<int>(200.0 * idx / (total - 1)) : 0;
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", level, level, level);
    return buf;
}

// Mean end-of-iteration cost per T for one (problem, regime).
Panel cost_panel(const ExperimentReport& report, Problem p, Regime r) {
    Panel panel(to_string(p) + " " + to_string(r), "iteration", "log10 cost", true);
    std::vector<std::size_t> lengths = report.config.lengths;
    std::sort(lengths.begin(), lengths.end());
    for (std::size_t li = 0; li < lengths.size(); ++li) {
        const std::size_t t = lengths[li];
        std::map<int, std::pair<double, int>> sums;  // iteration -> (sum, count)
        for (const auto& rec : report.records) {
            if (rec.problem != p || rec.regime != r || rec.t != t || rec.failed) continue;
            double last = rec.trace.empty() ? 0.0 : rec.trace.back().cost;
            int max_iter = rec.trace.empty() ? 0 : rec.trace.back().iteration;
            for (int it = 1; it <= report.config.max_iters; ++it) {
                double c = last;  // runs that stopped early hold their final cost
                if (it <= max_iter) {
                    for (const auto& e : rec.trace)
                        if (e.iteration == it && e.half == HalfStep::FStep) c = e.cost;
                }
                sums[it].first += c;
                sums[it].second += 1;
            }
        }
        if (sums.empty()) continue;
        Series2D s;
        s.color = shade(li, lengths.size());
        s.label = "T=" + std::to_string(t);
        for (const auto& [it, sc] : sums) {
            s.x.push_back(it);
            s.y.push_back(sc.first / sc.second);
        }
        panel.add(std::move(s));
    }
    return panel;
}

}  // namespace

std::vector<std::string> emit_plots(const ExperimentReport& report, const std::string& outdir) {
    if (report.records.empty()) throw std::invalid_argument("emit_plots: empty report");
    std::filesystem::create_directories(outdir);
    std::vector<std::string> written;
    auto emit = [&](const std::string& name, const std::vector<Panel>& panels) {
        const std::string path = outdir + "/" + name;
        write_svg(path, panels);
        written.push_back(path);
    };

    const auto aggregates = compute_aggregates(report);

    for (Problem p : report.config.problems) {
        // Fig. 1 analogues: per-regime auto-scaled, plus a shared-scale pair.
        std::vector<Panel> shared;
        for (Regime r : report.config.regimes) {
            Panel panel = cost_panel(report, p, r);
            emit("fig1_" + to_string(p) + "_" + to_string(r) + ".svg", {panel});
            shared.push_back(std::move(panel));
        }
        if (shared.size() > 1) {
            double lo = 1e300, hi = -1e300;
            for (const auto& panel : shared) {
                lo = std::min(lo, panel.data_ymin());
                hi = std::max(hi, panel.data_ymax());
            }
            for (auto& panel : shared) panel.set_y_range(lo, hi);
            emit("fig1_" + to_string(p) + "_shared.svg", shared);
        }

        // Fig. 2 analogues: prediction overlays.
        for (const auto& ov : report.overlays) {
            if (ov.problem != p) continue;
            Panel panel(to_string(p) + " " + to_string(ov.regime) + " prediction (T=" +
                            std::to_string(ov.t) + ")",
                        "t", "value", false);
            Series2D target;
            target.color = "#000000";
            target.label = "original";
            Series2D pred;
            pred.color = "#999999";
            pred.label = "approximation";
            for (std::size_t i = 0; i < ov.target.size(); ++i) {
                target.x.push_back(static_cast<double>(i + 1));
                target.y.push_back(ov.target[i]);
            }
            for (std::size_t i = 0; i < ov.predicted.size(); ++i) {
                pred.x.push_back(static_cast<double>(i + 1));
                pred.y.push_back(ov.predicted[i]);
            }
            panel.add(std::move(target));
            panel.add(std::move(pred));
            emit("fig2_" + to_string(p) + "_" + to_string(ov.regime) + ".svg", {panel});
        }

        // Fig. 3 analogue: error vs T, black quadratic / gray sparse.
        Panel panel(to_string(p) + " prediction error vs T", "T", "log10 error", true);
        for (Regime r : report.config.regimes) {
            const bool sparse = r == Regime::Sparse;
            const std::string color = sparse ? "#999999" : "#000000";
            std::vector<std::size_t> lengths = report.config.lengths;
            std::sort(lengths.begin(), lengths.end());
            Series2D mean, stddev, best, worst;
            for (std::size_t t : lengths) {
                const auto it =
                    aggregates.find(to_string(p) + "|" + std::to_string(t) + "|" + to_string(r));
                if (it == aggregates.end()) continue;
                const Aggregate& a =
                    sparse ? it->second.eps_error : it->second.quad_error;
                const double x = static_cast<double>(t);
                mean.x.push_back(x);
                mean.y.push_back(a.mean);
                stddev.x.push_back(x);
                stddev.y.push_back(a.stddev);
                best.x.push_back(x);
                best.y.push_back(a.best);
                worst.x.push_back(x);
                worst.y.push_back(a.worst);
            }
            if (mean.x.empty()) continue;
            mean.color = stddev.color = best.color = worst.color = color;
            mean.label = to_string(r) + " mean";
            stddev.dash = "6,3";
            stddev.label = to_string(r) + " std";
            best.dash = "2,3";
            worst.dash = "2,3";
            panel.add(std::move(mean));
            panel.add(std::move(stddev));
            panel.add(std::move(best));
            panel.add(std::move(worst));
        }
        emit("fig3_" + to_string(p) + ".svg", {panel});
    }
    return written;
}

}  // namespace lrnn
