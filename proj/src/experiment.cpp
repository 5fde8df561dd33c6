#include "lrnn/experiment.hpp"

#include "lrnn/stats.hpp"

#include "json.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace lrnn {

namespace {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Shortest decimal digits that round-trip the exact double.
std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw std::runtime_error("parse_double: bad value '" + s + "'");
    return v;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        out += c;
    }
    out += '"';
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

std::string trace_to_string(const std::vector<TraceEntry>& trace) {
    std::string out;
    for (const auto& e : trace) {
        if (!out.empty()) out += ';';
        out += std::to_string(e.iteration);
        out += e.half == HalfStep::UStep ? 'u' : 'f';
        out += ':';
        out += format_double(e.cost);
    }
    return out;
}

std::vector<TraceEntry> trace_from_string(const std::string& s) {
    std::vector<TraceEntry> trace;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t end = s.find(';', pos);
        if (end == std::string::npos) end = s.size();
        const std::string item = s.substr(pos, end - pos);
        const std::size_t colon = item.find(':');
        if (colon == std::string::npos || colon < 2)
            throw std::runtime_error("trace_from_string: bad item '" + item + "'");
        TraceEntry e;
        e.iteration = std::stoi(item.substr(0, colon - 1));
        e.half = item[colon - 1] == 'u' ? HalfStep::UStep : HalfStep::FStep;
        e.cost = parse_double(item.substr(colon + 1));
        trace.push_back(e);
        pos = end + 1;
    }
    return trace;
}

std::string strip(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> items;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = strip(item);
        if (!item.empty()) items.push_back(item);
    }
    return items;
}

}  // namespace

std::string to_string(Problem p) {
    switch (p) {
        case Problem::MG17: return "mg17";
        case Problem::MG30: return "mg30";
        case Problem::FIRLaser: return "fir";
        case Problem::Henon: return "henon";
    }
    return "?";
}

std::string to_string(Regime r) { return r == Regime::Sparse ? "sparse" : "quadratic"; }

Problem problem_from_string(const std::string& s) {
    if (s == "mg17") return Problem::MG17;
    if (s == "mg30") return Problem::MG30;
    if (s == "fir") return Problem::FIRLaser;
    if (s == "henon") return Problem::Henon;
    throw std::runtime_error("unknown problem '" + s + "' (mg17, mg30, fir, henon)");
}

Regime regime_from_string(const std::string& s) {
    if (s == "sparse") return Regime::Sparse;
    if (s == "quadratic") return Regime::Quadratic;
    throw std::runtime_error("unknown regime '" + s + "' (sparse, quadratic)");
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::stringstream ss(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = strip(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key = value");
        const std::string key = strip(line.substr(0, eq));
        const std::string value = strip(line.substr(eq + 1));
        try {
            if (key == "problems") {
                cfg.problems.clear();
                for (const auto& item : split_list(value))
                    cfg.problems.push_back(problem_from_string(item));
            } else if (key == "lengths") {
                cfg.lengths.clear();
                for (const auto& item : split_list(value))
                    cfg.lengths.push_back(static_cast<std::size_t>(std::stoul(item)));
            } else if (key == "restarts") {
                cfg.restarts = std::stoi(value);
            } else if (key == "regimes") {
                cfg.regimes.clear();
                for (const auto& item : split_list(value))
                    cfg.regimes.push_back(regime_from_string(item));
            } else if (key == "d_u") {
                cfg.d_u = static_cast<std::size_t>(std::stoul(value));
            } else if (key == "eps") {
                cfg.eps = std::stod(value);
            } else if (key == "max_iters") {
                cfg.max_iters = std::stoi(value);
            } else if (key == "tol") {
                cfg.tol = std::stod(value);
            } else if (key == "master_seed") {
                cfg.master_seed = std::stoull(value);
            } else if (key == "fir_path") {
                cfg.fir_path = value;
            } else if (key == "threads") {
                cfg.threads = std::stoi(value);
            } else {
                throw std::runtime_error("unknown key '" + key + "'");
            }
        } catch (const std::runtime_error&) {
            throw;
        } catch (const std::exception& e) {
            throw std::runtime_error("config line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    for (std::size_t t : cfg.lengths)
        if (t < 2) throw std::runtime_error("config: lengths must be >= 2");
    if (cfg.restarts < 1) throw std::runtime_error("config: restarts must be >= 1");
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_config: cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

Aggregate aggregate(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("aggregate: no values");
    Aggregate a;
    a.best = values.front();
    a.worst = values.front();
    double sum = 0.0;
    for (double v : values) {
        sum += v;
        a.best = std::min(a.best, v);
        a.worst = std::max(a.worst, v);
    }
    a.mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - a.mean) * (v - a.mean);
    a.stddev = std::sqrt(ss / static_cast<double>(values.size()));
    return a;
}

std::uint64_t cell_seed(std::uint64_t master_seed, Problem p, std::size_t t, Regime r,
                        int restart) {
    // Injective packing: restart in 20 bits, T in 20 bits, problem 2 bits,
    // regime 1 bit.
    const std::uint64_t pack = (static_cast<std::uint64_t>(restart) & 0xFFFFF) |
                               ((static_cast<std::uint64_t>(t) & 0xFFFFF) << 20) |
                               (static_cast<std::uint64_t>(p) << 40) |
                               (static_cast<std::uint64_t>(r) << 42);
    return mix64(mix64(master_seed) ^ pack);
}

TimeSeries problem_series(Problem p, std::size_t samples, const std::string& fir_path) {
    switch (p) {
        case Problem::MG17:
        case Problem::MG30: {
            MgConfig cfg;
            cfg.tau = p == Problem::MG17 ? 17.0 : 30.0;
            cfg.length = samples;
            return scale_to_unit(gen_mackey_glass(cfg));
        }
        case Problem::Henon:
            return scale_to_unit(gen_henon(1.4, 0.3, samples, 1000, 0.0, 0.0));
        case Problem::FIRLaser: {
            if (fir_path.empty())
                throw std::runtime_error("FIR-Laser selected but no fir_path configured");
            TimeSeries s = scale_to_unit(load_fir_laser(fir_path));
            if (s.values.size() < samples)
                throw std::runtime_error("FIR-Laser dataset shorter than requested window");
            s.values.resize(samples);
            return s;
        }
    }
    throw std::logic_error("problem_series: unreachable");
}

namespace {

CellRecord run_cell(const ExperimentConfig& cfg, const std::vector<double>& series,
                    Problem prob, std::size_t t, Regime regime, int restart) {
    CellRecord rec;
    rec.problem = prob;
    rec.t = t;
    rec.regime = regime;
    rec.restart = restart;
    try {
        std::vector<double> window(series.begin(), series.begin() + static_cast<long>(t + 1));
        const TrainingProblem problem =
            make_training_problem(window, t, regime, cfg.eps, std::nullopt, cfg.d_u);
        const LrnnModel init =
            random_model(cfg.d_u, 1, cell_seed(cfg.master_seed, prob, t, regime, restart));
        const TrainingState state = train(problem, init, {cfg.max_iters, cfg.tol});

        const Matrix pred = predict_insample(state, problem);
        std::vector<double> p(pred.data());
        std::vector<double> target(problem.zx.data());

        rec.final_cost = state.cost_trace.back().cost;
        rec.eps_error = eps_error_timeavg(p, target, cfg.eps, problem.lambdas.appr);
        double sq = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) sq += (p[i] - target[i]) * (p[i] - target[i]);
        rec.quad_error = problem.lambdas.appr * sq;
        rec.nmrse = nmrse(p, target);
        rec.sparsity_f = sparsity_fraction(state.model.f, 1e-6);
        rec.sparsity_u = sparsity_fraction(state.u, 1e-6);
        rec.converged_at = state.converged_at;
        rec.trace = state.cost_trace;

        rec.iters_to_1pct = -1;
        for (const auto& e : state.cost_trace) {
            if (e.half != HalfStep::FStep) continue;
            if (e.cost <= rec.final_cost * 1.01 + 1e-12) {
                rec.iters_to_1pct = e.iteration;
                break;
            }
        }
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
    }
    return rec;
}

}  // namespace

ExperimentReport run_experiments(const ExperimentConfig& cfg) {
    ExperimentReport report;
    report.config = cfg;

    std::size_t max_t = 0;
    for (std::size_t t : cfg.lengths) max_t = std::max(max_t, t);

    std::map<Problem, std::vector<double>> series;
    for (Problem p : cfg.problems)
        series[p] = problem_series(p, max_t + 1, cfg.fir_path).values;

    struct Cell {
        Problem problem;
        std::size_t t;
        Regime regime;
        int restart;
    };
    std::vector<Cell> cells;
    for (Problem p : cfg.problems)
        for (std::size_t t : cfg.lengths)
            for (Regime r : cfg.regimes)
                for (int k = 0; k < cfg.restarts; ++k) cells.push_back({p, t, r, k});

    report.records.resize(cells.size());
    unsigned threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                       : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(cells.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            const Cell& c = cells[i];
            report.records[i] =
                run_cell(cfg, series.at(c.problem), c.problem, c.t, c.regime, c.restart);
        }
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    // One overlay per (problem, regime): best final cost at the largest T.
    for (Problem p : cfg.problems) {
        for (Regime r : cfg.regimes) {
            const CellRecord* best = nullptr;
            for (const auto& rec : report.records) {
                if (rec.problem != p || rec.regime != r || rec.t != max_t || rec.failed) continue;
                if (!best || rec.final_cost < best->final_cost) best = &rec;
            }
            if (!best) continue;
            Overlay ov;
            ov.problem = p;
            ov.regime = r;
            ov.t = max_t;
            ov.restart = best->restart;
            const auto& vals = series.at(p);
            ov.target.assign(vals.begin() + 1, vals.begin() + static_cast<long>(max_t + 1));
            // Re-run the winning cell to regenerate its prediction.
            std::vector<double> window(vals.begin(), vals.begin() + static_cast<long>(max_t + 1));
            const TrainingProblem problem =
                make_training_problem(window, max_t, r, cfg.eps, std::nullopt, cfg.d_u);
            const LrnnModel init = random_model(
                cfg.d_u, 1, cell_seed(cfg.master_seed, p, max_t, r, best->restart));
            const TrainingState state = train(problem, init, {cfg.max_iters, cfg.tol});
            const Matrix pred = predict_insample(state, problem);
            ov.predicted = pred.data();
            report.overlays.push_back(std::move(ov));
        }
    }
    return report;
}

std::map<std::string, CellAggregates> compute_aggregates(const ExperimentReport& report) {
    std::map<std::string, std::vector<const CellRecord*>> groups;
    for (const auto& rec : report.records) {
        if (rec.failed) continue;
        groups[to_string(rec.problem) + "|" + std::to_string(rec.t) + "|" +
               to_string(rec.regime)]
            .push_back(&rec);
    }
    std::map<std::string, CellAggregates> out;
    for (const auto& [key, recs] : groups) {
        std::vector<double> fc, ee, qe, nm;
        for (const auto* r : recs) {
            fc.push_back(r->final_cost);
            ee.push_back(r->eps_error);
            qe.push_back(r->quad_error);
            nm.push_back(r->nmrse);
        }
        out[key] = {aggregate(fc), aggregate(ee), aggregate(qe), aggregate(nm)};
    }
    return out;
}

void write_report_csv(const ExperimentReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_report_csv: cannot open " + path);
    out << "problem,T,regime,restart,failed,error,final_cost,eps_error,quad_error,nmrse,"
           "iters_to_1pct,converged_at,sparsity_f,sparsity_u,trace\n";
    for (const auto& r : report.records) {
        out << to_string(r.problem) << ',' << r.t << ',' << to_string(r.regime) << ','
            << r.restart << ',' << (r.failed ? 1 : 0) << ',' << csv_escape(r.error) << ','
            << format_double(r.final_cost) << ',' << format_double(r.eps_error) << ','
            << format_double(r.quad_error) << ',' << format_double(r.nmrse) << ','
            << r.iters_to_1pct << ','
            << (r.converged_at ? std::to_string(*r.converged_at) : std::string()) << ','
            << format_double(r.sparsity_f) << ',' << format_double(r.sparsity_u) << ','
            << csv_escape(trace_to_string(r.trace)) << '\n';
    }
    if (!out) throw std::runtime_error("write_report_csv: write failed for " + path);
}

std::vector<CellRecord> load_report_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_report_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_report_csv: empty file");
    std::vector<CellRecord> records;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 15)
            throw std::runtime_error("load_report_csv: expected 15 fields, got " +
                                     std::to_string(f.size()));
        CellRecord r;
        r.problem = problem_from_string(f[0]);
        r.t = std::stoul(f[1]);
        r.regime = regime_from_string(f[2]);
        r.restart = std::stoi(f[3]);
        r.failed = f[4] == "1";
        r.error = f[5];
        r.final_cost = parse_double(f[6]);
        r.eps_error = parse_double(f[7]);
        r.quad_error = parse_double(f[8]);
        r.nmrse = parse_double(f[9]);
        r.iters_to_1pct = std::stoi(f[10]);
        if (!f[11].empty()) r.converged_at = std::stoi(f[11]);
        r.sparsity_f = parse_double(f[12]);
        r.sparsity_u = parse_double(f[13]);
        if (!f[14].empty()) r.trace = trace_from_string(f[14]);
        records.push_back(std::move(r));
    }
    return records;
}

namespace {

// The thread count is an execution detail and stays out of the report so
// that runs with different worker pools serialize identically.
nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json j;
    for (Problem p : cfg.problems) j["problems"].push_back(to_string(p));
    j["lengths"] = cfg.lengths;
    j["restarts"] = cfg.restarts;
    for (Regime r : cfg.regimes) j["regimes"].push_back(to_string(r));
    j["d_u"] = cfg.d_u;
    j["eps"] = cfg.eps;
    j["max_iters"] = cfg.max_iters;
    j["tol"] = cfg.tol;
    j["master_seed"] = cfg.master_seed;
    j["fir_path"] = cfg.fir_path;
    return j;
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
    ExperimentConfig cfg;
    cfg.problems.clear();
    for (const auto& p : j.at("problems")) cfg.problems.push_back(problem_from_string(p));
    cfg.lengths = j.at("lengths").get<std::vector<std::size_t>>();
    cfg.restarts = j.at("restarts");
    cfg.regimes.clear();
    for (const auto& r : j.at("regimes")) cfg.regimes.push_back(regime_from_string(r));
    cfg.d_u = j.at("d_u");
    cfg.eps = j.at("eps");
    cfg.max_iters = j.at("max_iters");
    cfg.tol = j.at("tol");
    cfg.master_seed = j.at("master_seed");
    cfg.fir_path = j.at("fir_path").get<std::string>();
    cfg.threads = 0;
    return cfg;
}

}  // namespace

void write_report_json(const ExperimentReport& report, const std::string& path) {
    nlohmann::json j;
    j["config"] = config_to_json(report.config);

    j["records"] = nlohmann::json::array();
    for (const auto& r : report.records) {
        nlohmann::json rec;
        rec["problem"] = to_string(r.problem);
        rec["T"] = r.t;
        rec["regime"] = to_string(r.regime);
        rec["restart"] = r.restart;
        rec["failed"] = r.failed;
        if (r.failed) rec["error"] = r.error;
        rec["final_cost"] = r.final_cost;
        rec["eps_error"] = r.eps_error;
        rec["quad_error"] = r.quad_error;
        rec["nmrse"] = r.nmrse;
        rec["iters_to_1pct"] = r.iters_to_1pct;
        if (r.converged_at) rec["converged_at"] = *r.converged_at;
        rec["sparsity_f"] = r.sparsity_f;
        rec["sparsity_u"] = r.sparsity_u;
        nlohmann::json tr = nlohmann::json::array();
        for (const auto& e : r.trace)
            tr.push_back({{"iter", e.iteration},
                          {"half", e.half == HalfStep::UStep ? "u" : "f"},
                          {"cost", e.cost}});
        rec["trace"] = std::move(tr);
        j["records"].push_back(std::move(rec));
    }

    j["aggregates"] = nlohmann::json::object();
    for (const auto& [key, agg] : compute_aggregates(report)) {
        auto dump = [](const Aggregate& a) {
            return nlohmann::json{
                {"mean", a.mean}, {"stddev", a.stddev}, {"best", a.best}, {"worst", a.worst}};
        };
        j["aggregates"][key] = {{"final_cost", dump(agg.final_cost)},
                                {"eps_error", dump(agg.eps_error)},
                                {"quad_error", dump(agg.quad_error)},
                                {"nmrse", dump(agg.nmrse)}};
    }

    j["overlays"] = nlohmann::json::array();
    for (const auto& ov : report.overlays) {
        j["overlays"].push_back({{"problem", to_string(ov.problem)},
                                 {"regime", to_string(ov.regime)},
                                 {"T", ov.t},
                                 {"restart", ov.restart},
                                 {"target", ov.target},
                                 {"predicted", ov.predicted}});
    }

    std::ofstream out(path);
    if (!out) throw std::runtime_error("write_report_json: cannot open " + path);
    out << j.dump(1) << '\n';
    if (!out) throw std::runtime_error("write_report_json: write failed for " + path);
}

ExperimentReport load_report_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_report_json: cannot open " + path);
    nlohmann::json j;
    in >> j;

    ExperimentReport report;
    report.config = config_from_json(j.at("config"));
    for (const auto& rec : j.at("records")) {
        CellRecord r;
        r.problem = problem_from_string(rec.at("problem"));
        r.t = rec.at("T");
        r.regime = regime_from_string(rec.at("regime"));
        r.restart = rec.at("restart");
        r.failed = rec.at("failed");
        if (rec.contains("error")) r.error = rec.at("error").get<std::string>();
        r.final_cost = rec.at("final_cost");
        r.eps_error = rec.at("eps_error");
        r.quad_error = rec.at("quad_error");
        r.nmrse = rec.at("nmrse");
        r.iters_to_1pct = rec.at("iters_to_1pct");
        if (rec.contains("converged_at")) r.converged_at = rec.at("converged_at").get<int>();
        r.sparsity_f = rec.at("sparsity_f");
        r.sparsity_u = rec.at("sparsity_u");
        for (const auto& e : rec.at("trace")) {
            TraceEntry t;
            t.iteration = e.at("iter");
            t.half = e.at("half") == "u" ? HalfStep::UStep : HalfStep::FStep;
            t.cost = e.at("cost");
            r.trace.push_back(t);
        }
        report.records.push_back(std::move(r));
    }
    for (const auto& o : j.at("overlays")) {
        Overlay ov;
        ov.problem = problem_from_string(o.at("problem"));
        ov.regime = regime_from_string(o.at("regime"));
        ov.t = o.at("T");
        ov.restart = o.at("restart");
        ov.target = o.at("target").get<std::vector<double>>();
        ov.predicted = o.at("predicted").get<std::vector<double>>();
        report.overlays.push_back(std::move(ov));
    }
    return report;
}

}  // namespace lrnn
