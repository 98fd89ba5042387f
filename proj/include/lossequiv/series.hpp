#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace lossequiv {

/// Aligned realization/target pairs, one per unit.
///
/// Realized values play the role of X (estimates, census counts, simulated
/// populations); targets play the role of Y (the values being aimed at).
/// Construction validates lengths, finiteness and nonnegativity, so every
/// live PairedSeries satisfies those invariants. Positive totals are checked
/// lazily by the share-based operations that need them.
class PairedSeries {
public:
    PairedSeries(std::vector<std::string> ids, std::vector<double> realized,
                 std::vector<double> target);

    /// Ids default to "1".."n".
    PairedSeries(std::vector<double> realized, std::vector<double> target);

    [[nodiscard]] std::size_t size() const noexcept { return realized_.size(); }
    [[nodiscard]] std::span<const std::string> ids() const noexcept { return ids_; }
    [[nodiscard]] std::span<const double> realized() const noexcept { return realized_; }
    [[nodiscard]] std::span<const double> target() const noexcept { return target_; }

    [[nodiscard]] double realized_total() const noexcept { return realized_total_; }
    [[nodiscard]] double target_total() const noexcept { return target_total_; }

    /// First `count` units, with their own totals.
    [[nodiscard]] PairedSeries prefix(std::size_t count) const;

    friend bool operator==(const PairedSeries&, const PairedSeries&) = default;

private:
    void init();

    std::vector<std::string> ids_;
    std::vector<double> realized_;
    std::vector<double> target_;
    double realized_total_ = 0.0;
    double target_total_ = 0.0;
};

struct ShareSeries {
    std::vector<double> shares;

    [[nodiscard]] std::size_t size() const noexcept { return shares.size(); }
};

/// Shares of total. Throws ZeroTotal when the values sum to zero and
/// NegativeValue / NonFinite on invalid entries.
ShareSeries to_shares(std::span<const double> values);

}  // namespace lossequiv
