#pragma once

#include "lossequiv/loss.hpp"
#include "lossequiv/series.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace lossequiv {

/// Deviation tolerance eps_n = eps0 * n^(-alpha).
struct EpsilonSchedule {
    double eps0 = 1.0;
    double alpha = 0.25;

    /// Throws InvalidParameters unless eps0 > 0 and alpha in (0, 1].
    void validate() const;
    [[nodiscard]] double at(std::size_t n) const;
};

/// Indices (0-based) of units i < at_n with |Y_i - c X_i| > tolerance, where
/// c = S_x / S_y is taken over the first at_n units.
std::vector<std::size_t> sparse_set(const PairedSeries& series, double tolerance, std::size_t at_n);

/// As above with tolerance eps.at(at_n).
std::vector<std::size_t> sparse_set(const PairedSeries& series, const EpsilonSchedule& eps,
                                    std::size_t at_n);

enum class Verdict { Pass, Warn, Fail };
std::string_view to_string(Verdict v) noexcept;

/// Roughly log-spaced, strictly increasing prefix sizes ending at n.
std::vector<std::size_t> default_grid(std::size_t n, std::size_t points = 20);

// Finite-sample proxies for the regularity conditions. None of these can
// certify an asymptotic statement; they report trajectories and flag shapes
// that are inconsistent with it.

struct MomentPoint {
    std::size_t n = 0;
    double realized = 0.0;  ///< (1/n) sum X_i^p
    double target = 0.0;    ///< (1/n) sum Y_i^p
};

struct MomentCheck {
    std::vector<MomentPoint> trajectory;
    double realized_tail_range = 0.0;  ///< last-quartile range / median
    double target_tail_range = 0.0;
    Verdict verdict = Verdict::Pass;
};

/// Warn when the last-quartile range of either trajectory exceeds
/// max_relative_range times its median.
MomentCheck check_a1_moments(const PairedSeries& series, double p, std::span<const std::size_t> grid,
                             double max_relative_range = 0.20);

struct CesaroPoint {
    std::size_t n = 0;
    double weight_average = 0.0;           ///< (1/n) sum w(s_i) on prefix shares
    double weighted_moment_average = 0.0;  ///< (1/n) sum w(s_i)(X_i^p + Y_i^p)
};

struct CesaroCheck {
    std::vector<CesaroPoint> trajectory;
    double full_average = 0.0;           ///< weighted moment average on all n units
    double worst_subset_average = 0.0;   ///< max over probes
    std::size_t smallest_subset = 0;
    Verdict verdict = Verdict::Pass;
};

/// Prefix averages plus a seeded random-subset probe. Each probe draws a
/// subset of size in [ceil(delta n), n] without replacement from a generator
/// seeded by (seed, probe index). Warn if the worst subset average exceeds
/// subset_multiple times the full average.
CesaroCheck check_a2_cesaro(const PairedSeries& series, const LossSpec& spec, double delta,
                            std::size_t probes, std::uint64_t seed,
                            std::span<const std::size_t> grid, double subset_multiple = 3.0);

struct MeanPoint {
    std::size_t n = 0;
    double realized = 0.0;  ///< S_x / n
    double target = 0.0;    ///< S_y / n
};

struct MeanCheck {
    std::vector<MeanPoint> trajectory;
    double oscillation = 0.0;  ///< worst side, (max - min) / median over the tail
    Verdict verdict = Verdict::Pass;
};

/// Pass if the tail oscillation is below max_oscillation, Fail otherwise.
MeanCheck check_a3_means(const PairedSeries& series, std::span<const std::size_t> grid,
                         double tail_fraction = 0.25, double max_oscillation = 0.05);

struct WeightPoint {
    std::size_t n = 0;
    double realized = 0.0;  ///< (1/n) sum w(x_i), shares of the prefix
    double target = 0.0;    ///< (1/n) sum w(y_i)
};

struct WeightCheck {
    std::vector<WeightPoint> trajectory;
    double realized_limit = 0.0;  ///< last trajectory value
    double target_limit = 0.0;
    double drift = 0.0;  ///< worst side relative change over the final quartile
    Verdict verdict = Verdict::Pass;
};

/// Warn if drift exceeds max_drift. Weight bases that are 0 with q < 0
/// follow the spec's zero-weight policy.
WeightCheck check_a4_weights(const PairedSeries& series, const LossSpec& spec,
                             std::span<const std::size_t> grid, double max_drift = 0.10);

struct SparsePoint {
    std::size_t n = 0;
    std::size_t count = 0;  ///< |B_n|
    double fraction = 0.0;  ///< |B_n| / n
};

struct SparseCheck {
    std::vector<SparsePoint> trajectory;
    Verdict verdict = Verdict::Pass;
};

/// Pass when the final fraction is at most pass_fraction. Otherwise Fail if the
/// fraction did not shrink over the tail (it is not vanishing), else Warn.
SparseCheck check_a5_sparse(const PairedSeries& series, const EpsilonSchedule& eps,
                            std::span<const std::size_t> grid, double tail_fraction = 0.25,
                            double pass_fraction = 0.02);

struct AssumptionConfig {
    std::size_t grid_points = 20;
    double tail_fraction = 0.25;
    double moment_max_range = 0.20;
    double subset_delta = 0.5;
    std::size_t subset_probes = 200;
    double subset_multiple = 3.0;
    std::uint64_t seed = 0;
    double mean_max_oscillation = 0.05;
    double weight_max_drift = 0.10;
    double sparse_pass_fraction = 0.02;

    void validate() const;
};

struct AssumptionReport {
    std::vector<std::size_t> grid;
    MomentCheck a1;
    CesaroCheck a2;
    MeanCheck a3;
    WeightCheck a4;
    SparseCheck a5;
};

AssumptionReport assumption_report(const PairedSeries& series, const LossSpec& spec,
                                   const EpsilonSchedule& eps, const AssumptionConfig& config = {});

}  // namespace lossequiv
