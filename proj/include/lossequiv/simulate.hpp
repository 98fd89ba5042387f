#pragma once

#include "lossequiv/assumptions.hpp"
#include "lossequiv/equivalence.hpp"
#include "lossequiv/loss.hpp"
#include "lossequiv/series.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace lossequiv {

/// X ~ U(lo, hi), 0 <= lo < hi.
struct UniformPositive {
    double lo = 0.0;
    double hi = 1.0;
};

/// X = scale * exp(shape * Z), Z standard normal. Right-skewed with a long
/// upper tail: most units are small, a few are large.
struct SkewedHeavy {
    double shape = 0.5;
    double scale = 0.1;
};

/// X = max(0, level + spread * U(-1, 1)).
struct ConstantPlusNoise {
    double level = 1.0;
    double spread = 0.0;
};

using BaseDistribution = std::variant<UniformPositive, SkewedHeavy, ConstantPlusNoise>;

/// Latent scale drawn once per series and multiplied into every X_i (and
/// hence Y_i): Theta = high with probability prob_high, else low.
struct TwoPointMixing {
    double low = 0.5;
    double high = 1.5;
    double prob_high = 0.5;
};

/// Y_i = X_i (1 + max(sigma_n zeta_i, -1)), sigma_n = s0 n^(-gamma),
/// zeta_i uniform on [-sqrt 3, sqrt 3] (mean 0, variance 1).
struct NoiseModel {
    double s0 = 0.1;
    double gamma = 0.25;

    [[nodiscard]] double sigma(std::size_t n) const;
};

/// round(f_n n) units, f_n = min(1, b n^(-beta)), chosen uniformly without
/// replacement, get Y_i = s_i X_i with s_i ~ U(shock_lo, shock_hi) instead of
/// the noise model. b = 0 disables injection.
struct DeviationInjection {
    double b = 1.0;
    double beta = 0.5;
    double shock_lo = 2.0;
    double shock_hi = 5.0;

    [[nodiscard]] double fraction(std::size_t n) const;
    [[nodiscard]] std::size_t count(std::size_t n) const;
};

struct GeneratorSpec {
    BaseDistribution base = SkewedHeavy{};
    std::optional<TwoPointMixing> mixing;
    NoiseModel noise;
    DeviationInjection injection;
    std::uint64_t seed = 0;

    /// Throws InvalidParameters.
    void validate() const;

    /// Analytic mean and standard deviation of X given Theta = 1.
    [[nodiscard]] double base_mean() const;
    [[nodiscard]] double base_stddev() const;

    /// Limit of mu_x / mu_y as n grows (Theta cancels).
    [[nodiscard]] double limit_ratio() const;
};

/// Deterministic in (gen, n). Ids are "1".."n".
PairedSeries generate(const GeneratorSpec& gen, std::size_t n);

/// Per-cell seed derived from (master, n, replicate) through std::seed_seq,
/// so a cell's data does not depend on which other cells run or in what order.
std::uint64_t cell_seed(std::uint64_t master, std::size_t n, std::size_t replicate);

struct RatePoint {
    std::size_t n = 0;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    double c_error = 0.0;            ///< |c_n - limit ratio|
    double diff = 0.0;               ///< equivalence difference
    double keydiff = 0.0;
    double sparse_fraction = 0.0;    ///< measured |B_n| / n at eps_n
    double injected_fraction = 0.0;  ///< round(f_n n) / n

    friend bool operator==(const RatePoint&, const RatePoint&) = default;
};

struct RatePoints {
    std::vector<RatePoint> points;
};

/// One row per (n, replicate), ordered by n then replicate. Cells may run on
/// `threads` workers; results do not depend on the thread count.
RatePoints run_convergence(const GeneratorSpec& gen, const LossSpec& spec,
                           std::span<const std::size_t> n_grid, std::size_t replicates,
                           const EpsilonSchedule& eps, std::size_t threads = 1);

enum class RateField { CError, Diff, KeyDiff };
std::string_view to_string(RateField f) noexcept;
RateField parse_rate_field(std::string_view text);

/// (n, median over replicates of |field|), ascending in n.
std::vector<std::pair<std::size_t, double>> median_by_n(const RatePoints& points, RateField field);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
};

/// OLS of log(median |field|) on log(n). Needs >= 3 distinct n and positive
/// medians; throws DegenerateInput otherwise.
RateFit fit_rate(const RatePoints& points, RateField field);

/// The two-unit example: one target set, two realization sets with equal
/// total absolute differences but different indices of dissimilarity.
struct SmallSampleDemo {
    PairedSeries set1;
    PairedSeries set2;
    EquivalenceReport report1;
    EquivalenceReport report2;
    MeasureValue tad1, tad2;
    MeasureValue id1, id2;
};

SmallSampleDemo small_sample_demo();

}  // namespace lossequiv
