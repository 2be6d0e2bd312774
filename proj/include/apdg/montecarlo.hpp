#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "apdg/params.hpp"
#include "apdg/scvx.hpp"

namespace apdg {

/**
 * SplitMix64 used as a counter-based generator. Draw i (i = 1, 2, ...) of a
 * stream started at state s is mix(s + i * 0x9E3779B97F4A7C15) with
 *
 *     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
 *     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
 *     z =  z ^ (z >> 31)
 *
 * all arithmetic mod 2^64.
 */
class SplitMix64 {
public:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

    explicit SplitMix64(std::uint64_t state) : state_(state) {}

    /// Stream of Monte Carlo run `run`: state seed + run * 2^20 * gamma, so
    /// runs never share counters while each draws fewer than 2^20 numbers.
    static SplitMix64 for_run(std::uint64_t seed, std::uint64_t run)
    {
        return SplitMix64(seed + (run << 20) * kGamma);
    }

    std::uint64_t next();
    /// ((z >> 11) + 1) / 2^53, in (0, 1].
    double uniform();

private:
    std::uint64_t state_;
};

/// Standard normals by Box-Muller on pairs of uniforms (u1, u2):
/// sqrt(-2 ln u1) cos(2 pi u2), then sqrt(-2 ln u1) sin(2 pi u2).
class GaussianStream {
public:
    explicit GaussianStream(SplitMix64 rng) : rng_(rng) {}
    double next();

private:
    SplitMix64 rng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

struct NoiseSigma {
    double r = 500.0; ///< per position component, m
    double v = 50.0;  ///< per velocity component, m/s
    double m = 300.0; ///< initial mass, kg
};

/// Adds noise to r0 (x, y, z), v0 (x, y, z) and m0, in that draw order. Not validated.
Scenario perturb(const Scenario& base, const NoiseSigma& sigma, GaussianStream& noise);

struct RunRow {
    std::uint64_t run = 0;
    std::string mode;
    bool success = false;
    double seconds = 0.0;
    int sc_steps = 0;
    int ipm_iterations = 0;
    std::uint64_t factorizations = 0;
    std::uint64_t kkt_solves = 0;
    double fuel_remaining = 0.0;
    double r_err = 0.0;
    double v_err = 0.0;
    std::string message;
};

/// Means are over successful runs; NaN when there are none.
struct BatchSummary {
    std::uint64_t runs = 0;
    std::uint64_t successes = 0;
    double success_rate = 0.0;
    double mean_seconds = 0.0;
    double mean_sc_steps = 0.0;
    double mean_fuel = 0.0;
    double mean_r_err = 0.0;
    double mean_v_err = 0.0;
};

/// Sums in row order, so equal rows give bit-identical summaries.
BatchSummary summarize(const std::vector<RunRow>& rows);

/// One perturbed scenario solved with `options`. Invalid draws and solver
/// exceptions become failed rows.
RunRow run_one(const Scenario& base, const ScOptions& options, const NoiseSigma& sigma, std::uint64_t seed,
               std::uint64_t run);

/// Runs 0 .. runs-1 on `threads` workers (0 = hardware concurrency). Rows are
/// ordered by run index and independent of the thread count.
std::vector<RunRow> run_batch(const Scenario& base, const ScOptions& options, const NoiseSigma& sigma,
                              std::uint64_t runs, std::uint64_t seed, unsigned threads = 0);

/// Per-run rows. Wall time is nondeterministic and only written when `timing` is set.
void write_runs_csv(std::ostream& out, const std::vector<RunRow>& rows, bool timing);
std::vector<RunRow> read_runs_csv(std::istream& in);
void write_summary_csv(std::ostream& out, const BatchSummary& summary, bool timing);

} // namespace apdg
