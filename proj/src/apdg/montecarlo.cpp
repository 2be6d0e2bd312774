#include "apdg/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <thread>

#include "socp/sparse.hpp"

namespace apdg {

std::uint64_t SplitMix64::next()
{
    state_ += kGamma;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

double SplitMix64::uniform()
{
    return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
}

double GaussianStream::next()
{
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    const double u1 = rng_.uniform();
    const double u2 = rng_.uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
}

Scenario perturb(const Scenario& base, const NoiseSigma& sigma, GaussianStream& noise)
{
    Scenario sc = base;
    for (int i = 0; i < 3; ++i) {
        sc.bc.r0[i] += sigma.r * noise.next();
    }
    for (int i = 0; i < 3; ++i) {
        sc.bc.v0[i] += sigma.v * noise.next();
    }
    sc.bc.m0 += sigma.m * noise.next();
    return sc;
}

BatchSummary summarize(const std::vector<RunRow>& rows)
{
    BatchSummary s;
    s.runs = rows.size();
    double seconds = 0.0;
    double steps = 0.0;
    double fuel = 0.0;
    double r_err = 0.0;
    double v_err = 0.0;
    for (const RunRow& r : rows) {
        if (!r.success) {
            continue;
        }
        ++s.successes;
        seconds += r.seconds;
        steps += r.sc_steps;
        fuel += r.fuel_remaining;
        r_err += r.r_err;
        v_err += r.v_err;
    }
    const double ok = static_cast<double>(s.successes);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.success_rate = s.runs == 0 ? nan : ok / static_cast<double>(s.runs);
    s.mean_seconds = s.successes == 0 ? nan : seconds / ok;
    s.mean_sc_steps = s.successes == 0 ? nan : steps / ok;
    s.mean_fuel = s.successes == 0 ? nan : fuel / ok;
    s.mean_r_err = s.successes == 0 ? nan : r_err / ok;
    s.mean_v_err = s.successes == 0 ? nan : v_err / ok;
    return s;
}

RunRow run_one(const Scenario& base, const ScOptions& options, const NoiseSigma& sigma, std::uint64_t seed,
               std::uint64_t run)
{
    RunRow row;
    row.run = run;
    row.mode = mode_name(options);
    GaussianStream noise(SplitMix64::for_run(seed, run));
    const Scenario sc = perturb(base, sigma, noise);
    try {
        sc.validate();
    } catch (const ScenarioError& e) {
        row.message = std::string("invalid draw: ") + e.what();
        return row;
    }
    try {
        const ScResult res = sc_solve(sc, options);
        row.success = res.success;
        row.seconds = res.seconds;
        row.sc_steps = static_cast<int>(res.steps.size());
        row.ipm_iterations = res.total_iterations;
        row.factorizations = res.total_factorizations;
        row.kkt_solves = res.total_kkt_solves;
        row.fuel_remaining = res.verification.fuel_remaining;
        row.r_err = res.verification.r_err;
        row.v_err = res.verification.v_err;
        row.message = res.message;
    } catch (const std::exception& e) {
        row.message = std::string("exception: ") + e.what();
    }
    return row;
}

std::vector<RunRow> run_batch(const Scenario& base, const ScOptions& options, const NoiseSigma& sigma,
                              std::uint64_t runs, std::uint64_t seed, unsigned threads)
{
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::uint64_t>(threads, std::max<std::uint64_t>(runs, 1)));
    std::vector<RunRow> rows(runs);
    std::atomic<std::uint64_t> next{0};
    auto worker = [&] {
        for (std::uint64_t i = next++; i < runs; i = next++) {
            rows[i] = run_one(base, options, sigma, seed, i);
        }
    };
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < threads; ++t) {
        pool.emplace_back(worker);
    }
    worker();
    pool.clear();
    return rows;
}

namespace {

std::string quoted(const std::string& s)
{
    std::string out = "\"";
    for (const char c : s) {
        if (c == '"') {
            out += '"';
        }
        out += c;
    }
    return out + '"';
}

// Splits one CSV line; fields may be double-quoted with "" as an escaped quote.
std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> fields(1);
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (in_quotes) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                fields.back() += '"';
                ++i;
            } else if (c == '"') {
                in_quotes = false;
            } else {
                fields.back() += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            fields.emplace_back();
        } else {
            fields.back() += c;
        }
    }
    return fields;
}

} // namespace

void write_runs_csv(std::ostream& out, const std::vector<RunRow>& rows, bool timing)
{
    using socp::format_double;
    out << "run,mode,success," << (timing ? "seconds," : "")
        << "sc_steps,ipm_iterations,factorizations,kkt_solves,fuel_remaining,r_err,v_err,message\n";
    for (const RunRow& r : rows) {
        out << r.run << ',' << r.mode << ',' << (r.success ? 1 : 0) << ',';
        if (timing) {
            out << format_double(r.seconds) << ',';
        }
        out << r.sc_steps << ',' << r.ipm_iterations << ',' << r.factorizations << ',' << r.kkt_solves << ','
            << format_double(r.fuel_remaining) << ',' << format_double(r.r_err) << ',' << format_double(r.v_err)
            << ',' << quoted(r.message) << '\n';
    }
}

std::vector<RunRow> read_runs_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line)) {
        throw ScenarioError("runs csv: missing header");
    }
    const std::vector<std::string> header = split_csv(line);
    const bool timing = header.size() > 3 && header[3] == "seconds";
    const std::size_t width = timing ? 12 : 11;
    if (header.size() != width) {
        throw ScenarioError("runs csv: unexpected header");
    }
    std::vector<RunRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const std::vector<std::string> f = split_csv(line);
        if (f.size() != width) {
            throw ScenarioError("runs csv: bad row '" + line + "'");
        }
        std::size_t i = 0;
        RunRow r;
        r.run = std::stoull(f[i++]);
        r.mode = f[i++];
        r.success = f[i++] == "1";
        if (timing) {
            r.seconds = std::stod(f[i++]);
        }
        r.sc_steps = std::stoi(f[i++]);
        r.ipm_iterations = std::stoi(f[i++]);
        r.factorizations = std::stoull(f[i++]);
        r.kkt_solves = std::stoull(f[i++]);
        r.fuel_remaining = std::stod(f[i++]);
        r.r_err = std::stod(f[i++]);
        r.v_err = std::stod(f[i++]);
        r.message = f[i++];
        rows.push_back(std::move(r));
    }
    return rows;
}

void write_summary_csv(std::ostream& out, const BatchSummary& s, bool timing)
{
    using socp::format_double;
    out << "runs,successes,success_rate," << (timing ? "mean_seconds," : "")
        << "mean_sc_steps,mean_fuel_remaining,mean_r_err,mean_v_err\n";
    out << s.runs << ',' << s.successes << ',' << format_double(s.success_rate) << ',';
    if (timing) {
        out << format_double(s.mean_seconds) << ',';
    }
    out << format_double(s.mean_sc_steps) << ',' << format_double(s.mean_fuel) << ','
        << format_double(s.mean_r_err) << ',' << format_double(s.mean_v_err) << '\n';
}

} // namespace apdg
