#include "lossequiv/assumptions.hpp"

#include "lossequiv/error.hpp"
#include "lossequiv/summation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

namespace lossequiv {

void EpsilonSchedule::validate() const {
    if (!std::isfinite(eps0) || !(eps0 > 0.0)) {
        throw Error(Errc::InvalidParameters, "eps0 must be positive");
    }
    if (!(alpha > 0.0 && alpha <= 1.0)) {
        throw Error(Errc::InvalidParameters, "alpha must lie in (0, 1]");
    }
}

double EpsilonSchedule::at(std::size_t n) const {
    validate();
    if (n == 0) throw Error(Errc::InvalidParameters, "eps_n needs n >= 1");
    return eps0 * std::pow(static_cast<double>(n), -alpha);
}

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
        case Verdict::Pass: return "pass";
        case Verdict::Warn: return "warn";
        case Verdict::Fail: return "fail";
    }
    return "unknown";
}

std::vector<std::size_t> sparse_set(const PairedSeries& series, double tolerance, std::size_t at_n) {
    if (at_n == 0 || at_n > series.size()) {
        throw Error(Errc::IndexOutOfRange, "at_n " + std::to_string(at_n) + " outside [1, " +
                                               std::to_string(series.size()) + "]");
    }
    if (!(tolerance >= 0.0)) throw Error(Errc::InvalidParameters, "tolerance must be nonnegative");
    const auto x = series.realized().first(at_n);
    const auto y = series.target().first(at_n);
    const double sx = pairwise_sum(x);
    const double sy = pairwise_sum(y);
    if (!(sx > 0.0) || !(sy > 0.0)) {
        throw Error(Errc::ZeroTotal, "prefix totals must be positive for the sparse set");
    }
    const double c = sx / sy;
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < at_n; ++i) {
        if (std::abs(y[i] - c * x[i]) > tolerance) out.push_back(i);
    }
    return out;
}

std::vector<std::size_t> sparse_set(const PairedSeries& series, const EpsilonSchedule& eps,
                                    std::size_t at_n) {
    return sparse_set(series, eps.at(std::max<std::size_t>(at_n, 1)), at_n);
}

std::vector<std::size_t> default_grid(std::size_t n, std::size_t points) {
    if (n == 0) throw Error(Errc::InvalidParameters, "grid needs n >= 1");
    points = std::max<std::size_t>(points, 2);
    std::vector<std::size_t> grid;
    const double log_n = std::log(static_cast<double>(n));
    for (std::size_t k = 0; k < points; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(points - 1);
        auto m = static_cast<std::size_t>(std::llround(std::exp(t * log_n)));
        m = std::clamp<std::size_t>(m, 1, n);
        if (grid.empty() || m > grid.back()) grid.push_back(m);
    }
    if (grid.back() != n) grid.push_back(n);
    return grid;
}

namespace {

void check_grid(std::span<const std::size_t> grid, std::size_t n) {
    if (grid.empty()) throw Error(Errc::InvalidParameters, "prefix grid is empty");
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (grid[k] == 0 || grid[k] > n) {
            throw Error(Errc::InvalidParameters, "prefix size " + std::to_string(grid[k]) +
                                                     " outside [1, " + std::to_string(n) + "]");
        }
        if (k > 0 && grid[k] <= grid[k - 1]) {
            throw Error(Errc::InvalidParameters, "prefix grid must be strictly increasing");
        }
    }
}

/// Index of the first grid point in the final `fraction` of the grid.
std::size_t tail_start(std::size_t size, double fraction) {
    const auto len = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(size)));
    return size - std::clamp<std::size_t>(len, 1, size);
}

double relative_range(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const double range = values.back() - values.front();
    const std::size_t mid = values.size() / 2;
    const double median = values.size() % 2 == 1 ? values[mid] : (values[mid - 1] + values[mid]) / 2.0;
    if (range == 0.0) return 0.0;
    if (median == 0.0) return std::numeric_limits<double>::infinity();
    return range / std::abs(median);
}

double relative_change(double from, double to) {
    if (from == to) return 0.0;
    if (to == 0.0) return std::numeric_limits<double>::infinity();
    return std::abs(to - from) / std::abs(to);
}

double power(double v, double p) {
    return p == 1.0 ? v : p == 2.0 ? v * v : std::pow(v, p);
}

/// Weights of each unit evaluated on prefix shares of the given side;
/// nullopt marks units skipped by the zero-weight policy.
std::vector<std::optional<double>> prefix_weights(std::span<const double> values,
                                                  const LossSpec& spec, const char* side) {
    const double total = pairwise_sum(values);
    if (!(total > 0.0)) {
        throw Error(Errc::ZeroTotal, std::string(side) + " prefix total is zero");
    }
    std::vector<std::optional<double>> out;
    out.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto w = weight(values[i] / total, spec.q);
        if (!w && spec.zero_weight_policy == ZeroWeightPolicy::Error) {
            throw Error(Errc::ZeroWeightBase, "unit " + std::to_string(i + 1) + " has a zero " +
                                                  side + " share under a negative weight exponent");
        }
        out.push_back(w);
    }
    return out;
}

double counted_mean(std::span<const std::optional<double>> values) {
    std::vector<double> counted;
    counted.reserve(values.size());
    for (const auto& v : values) {
        if (v) counted.push_back(*v);
    }
    if (counted.empty()) throw Error(Errc::EmptyAfterSkip, "every unit was skipped");
    return pairwise_mean(counted);
}

}  // namespace

MomentCheck check_a1_moments(const PairedSeries& series, double p, std::span<const std::size_t> grid,
                             double max_relative_range) {
    check_grid(grid, series.size());
    if (!(p > 0.0)) throw Error(Errc::InvalidParameters, "moment order p must be positive");
    std::vector<double> xp, yp;
    xp.reserve(series.size());
    yp.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        xp.push_back(power(series.realized()[i], p));
        yp.push_back(power(series.target()[i], p));
    }
    MomentCheck out;
    for (std::size_t m : grid) {
        out.trajectory.push_back({m, pairwise_mean(std::span(xp).first(m)),
                                  pairwise_mean(std::span(yp).first(m))});
    }
    std::vector<double> tail_x, tail_y;
    for (std::size_t k = tail_start(grid.size(), 0.25); k < grid.size(); ++k) {
        tail_x.push_back(out.trajectory[k].realized);
        tail_y.push_back(out.trajectory[k].target);
    }
    out.realized_tail_range = relative_range(tail_x);
    out.target_tail_range = relative_range(tail_y);
    out.verdict = std::max(out.realized_tail_range, out.target_tail_range) > max_relative_range
                      ? Verdict::Warn
                      : Verdict::Pass;
    return out;
}

CesaroCheck check_a2_cesaro(const PairedSeries& series, const LossSpec& spec, double delta,
                            std::size_t probes, std::uint64_t seed,
                            std::span<const std::size_t> grid, double subset_multiple) {
    spec.validate();
    check_grid(grid, series.size());
    if (!(delta > 0.0 && delta < 1.0)) throw Error(Errc::InvalidParameters, "delta must lie in (0, 1)");
    if (probes == 0) throw Error(Errc::InvalidParameters, "need at least one subset probe");

    const auto weight_values = spec.weight_side == WeightSide::Realized ? series.realized() : series.target();
    const char* side = spec.weight_side == WeightSide::Realized ? "realized" : "target";
    const auto x = series.realized();
    const auto y = series.target();

    auto weighted_moments = [&](std::span<const std::optional<double>> w) {
        std::vector<std::optional<double>> out(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i]) out[i] = *w[i] * (power(x[i], spec.p) + power(y[i], spec.p));
        }
        return out;
    };

    CesaroCheck out;
    for (std::size_t m : grid) {
        const auto w = prefix_weights(weight_values.first(m), spec, side);
        out.trajectory.push_back({m, counted_mean(w), counted_mean(weighted_moments(w))});
    }

    const auto full_moments = weighted_moments(prefix_weights(weight_values, spec, side));
    out.full_average = counted_mean(full_moments);
    std::vector<std::size_t> counted;
    for (std::size_t i = 0; i < full_moments.size(); ++i) {
        if (full_moments[i]) counted.push_back(i);
    }
    const auto n = counted.size();
    const auto min_size = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(delta * static_cast<double>(n))), 1, n);
    out.smallest_subset = n;
    out.worst_subset_average = 0.0;
    std::vector<std::size_t> subset;
    std::vector<double> terms;
    for (std::size_t probe = 0; probe < probes; ++probe) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(probe), static_cast<std::uint32_t>(probe >> 32)};
        std::mt19937_64 rng(seq);
        const std::size_t size = std::uniform_int_distribution<std::size_t>(min_size, n)(rng);
        subset.clear();
        std::sample(counted.begin(), counted.end(), std::back_inserter(subset), size, rng);
        terms.clear();
        for (std::size_t i : subset) terms.push_back(*full_moments[i]);
        out.worst_subset_average = std::max(out.worst_subset_average, pairwise_mean(terms));
        out.smallest_subset = std::min(out.smallest_subset, size);
    }
    out.verdict = out.worst_subset_average > subset_multiple * out.full_average ? Verdict::Warn
                                                                               : Verdict::Pass;
    return out;
}

MeanCheck check_a3_means(const PairedSeries& series, std::span<const std::size_t> grid,
                         double tail_fraction, double max_oscillation) {
    check_grid(grid, series.size());
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
        throw Error(Errc::InvalidParameters, "tail fraction must lie in (0, 1]");
    }
    MeanCheck out;
    for (std::size_t m : grid) {
        const auto dm = static_cast<double>(m);
        out.trajectory.push_back({m, pairwise_sum(series.realized().first(m)) / dm,
                                  pairwise_sum(series.target().first(m)) / dm});
    }
    std::vector<double> tail_x, tail_y;
    for (std::size_t k = tail_start(grid.size(), tail_fraction); k < grid.size(); ++k) {
        tail_x.push_back(out.trajectory[k].realized);
        tail_y.push_back(out.trajectory[k].target);
    }
    out.oscillation = std::max(relative_range(tail_x), relative_range(tail_y));
    out.verdict = out.oscillation < max_oscillation ? Verdict::Pass : Verdict::Fail;
    return out;
}

WeightCheck check_a4_weights(const PairedSeries& series, const LossSpec& spec,
                             std::span<const std::size_t> grid, double max_drift) {
    spec.validate();
    check_grid(grid, series.size());
    WeightCheck out;
    for (std::size_t m : grid) {
        out.trajectory.push_back(
            {m, counted_mean(prefix_weights(series.realized().first(m), spec, "realized")),
             counted_mean(prefix_weights(series.target().first(m), spec, "target"))});
    }
    const auto& first = out.trajectory[tail_start(grid.size(), 0.25)];
    const auto& last = out.trajectory.back();
    out.realized_limit = last.realized;
    out.target_limit = last.target;
    out.drift = std::max(relative_change(first.realized, last.realized),
                         relative_change(first.target, last.target));
    out.verdict = out.drift > max_drift ? Verdict::Warn : Verdict::Pass;
    return out;
}

SparseCheck check_a5_sparse(const PairedSeries& series, const EpsilonSchedule& eps,
                            std::span<const std::size_t> grid, double tail_fraction,
                            double pass_fraction) {
    eps.validate();
    check_grid(grid, series.size());
    SparseCheck out;
    for (std::size_t m : grid) {
        const auto count = sparse_set(series, eps, m).size();
        out.trajectory.push_back({m, count, static_cast<double>(count) / static_cast<double>(m)});
    }
    const double final_fraction = out.trajectory.back().fraction;
    const double tail_first = out.trajectory[tail_start(grid.size(), tail_fraction)].fraction;
    if (final_fraction <= pass_fraction) {
        out.verdict = Verdict::Pass;
    } else if (final_fraction >= tail_first) {
        out.verdict = Verdict::Fail;
    } else {
        out.verdict = Verdict::Warn;
    }
    return out;
}

void AssumptionConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw Error(Errc::InvalidParameters, what);
    };
    require(grid_points >= 2, "grid_points must be at least 2");
    require(tail_fraction > 0.0 && tail_fraction <= 1.0, "tail_fraction must lie in (0, 1]");
    require(moment_max_range > 0.0, "moment_max_range must be positive");
    require(subset_delta > 0.0 && subset_delta < 1.0, "subset_delta must lie in (0, 1)");
    require(subset_probes >= 1, "subset_probes must be at least 1");
    require(subset_multiple > 0.0, "subset_multiple must be positive");
    require(mean_max_oscillation > 0.0, "mean_max_oscillation must be positive");
    require(weight_max_drift > 0.0, "weight_max_drift must be positive");
    require(sparse_pass_fraction >= 0.0 && sparse_pass_fraction <= 1.0,
            "sparse_pass_fraction must lie in [0, 1]");
}

AssumptionReport assumption_report(const PairedSeries& series, const LossSpec& spec,
                                   const EpsilonSchedule& eps, const AssumptionConfig& config) {
    config.validate();
    AssumptionReport r;
    r.grid = default_grid(series.size(), config.grid_points);
    std::size_t first = series.size() + 1;
    double sx = 0.0;
    double sy = 0.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        sx += series.realized()[i];
        sy += series.target()[i];
        if (sx > 0.0 && sy > 0.0) {
            first = i + 1;
            break;
        }
    }
    if (first > series.size()) throw Error(Errc::ZeroTotal, "series totals are zero");
    std::erase_if(r.grid, [first](std::size_t m) { return m < first; });
    if (r.grid.empty() || r.grid.front() != first) r.grid.insert(r.grid.begin(), first);
    r.a1 = check_a1_moments(series, spec.p, r.grid, config.moment_max_range);
    r.a2 = check_a2_cesaro(series, spec, config.subset_delta, config.subset_probes, config.seed, r.grid,
                           config.subset_multiple);
    r.a3 = check_a3_means(series, r.grid, config.tail_fraction, config.mean_max_oscillation);
    r.a4 = check_a4_weights(series, spec, r.grid, config.weight_max_drift);
    r.a5 = check_a5_sparse(series, eps, r.grid, config.tail_fraction, config.sparse_pass_fraction);
    return r;
}

}  // namespace lossequiv
