#pragma once

#include "lossequiv/series.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lossequiv {

/// Which argument the weight w(t) = t^q is evaluated on.
enum class WeightSide { Realized, Target };

/// What to do with a unit whose weight base is 0 while q < 0.
enum class ZeroWeightPolicy { Error, SkipUnit };

enum class Normalization {
    Total,      ///< sum over counted units
    Mean,       ///< sum / units_used
    HalfMean,   ///< sum / (2 * units_used)
    HalfTotal,  ///< sum / 2
};

/// Weighted exponentiated difference loss |X - Y|^p * w(.), with w(t) = t^q.
///
/// q = 0 gives unit weights (w = 1 even at t = 0). Negative q covers the
/// percentage, chi-square/Webster, Huntington-Hill and Cobb-Douglas forms.
struct LossSpec {
    double p = 1.0;
    double q = 0.0;
    WeightSide weight_side = WeightSide::Realized;
    ZeroWeightPolicy zero_weight_policy = ZeroWeightPolicy::Error;

    /// Throws InvalidSpec unless p > 0, q <= 0 and both finite.
    void validate() const;

    /// Parses "p,q,side" where side is `realized`/`x` or `target`/`y`.
    static LossSpec parse(std::string_view text);

    /// Canonical "p,q,side" form accepted by parse().
    [[nodiscard]] std::string label() const;

    friend bool operator==(const LossSpec&, const LossSpec&) = default;
};

std::string_view to_string(WeightSide side) noexcept;
std::string_view to_string(Normalization norm) noexcept;

struct MeasureValue {
    double value = 0.0;
    std::size_t units_used = 0;
    Normalization normalization = Normalization::Total;
};

/// t^q with the 0^0 = 1 convention; nullopt when t = 0 and q < 0.
std::optional<double> weight(double base, double q) noexcept;

/// Per-unit losses on arbitrary arguments (levels or shares).
/// Units skipped under ZeroWeightPolicy::SkipUnit are nullopt; under
/// ZeroWeightPolicy::Error a zero weight base throws ZeroWeightBase.
std::vector<std::optional<double>> unit_losses(const LossSpec& spec,
                                               std::span<const double> realized,
                                               std::span<const double> target);

/// Sums the counted units and applies the normalization.
/// Throws EmptyAfterSkip if no unit was counted.
MeasureValue aggregate(std::span<const std::optional<double>> losses, Normalization norm);

/// Loss on level arguments (X_i, Y_i).
MeasureValue level_loss(const LossSpec& spec, const PairedSeries& series,
                        Normalization norm = Normalization::Mean);

/// Loss on share arguments (x_i, y_i); the weight is evaluated on the share.
MeasureValue share_loss(const LossSpec& spec, const PairedSeries& series,
                        Normalization norm = Normalization::Mean);

struct SharePair {
    ShareSeries realized;
    ShareSeries target;
};

/// Shares of both sides; throws ZeroTotal if either total is 0.
SharePair shares_of(const PairedSeries& series);

}  // namespace lossequiv
