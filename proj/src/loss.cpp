#include "lossequiv/loss.hpp"

#include "lossequiv/error.hpp"
#include "lossequiv/summation.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace lossequiv {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return std::string(s.substr(first, last - first + 1));
}

double parse_real(std::string_view text, std::string_view what) {
    const std::string t = trim(text);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (t.empty() || ec != std::errc{} || ptr != t.data() + t.size()) {
        throw Error(Errc::InvalidSpec, "cannot parse " + std::string(what) + " from '" + t + "'");
    }
    return value;
}

}  // namespace

void LossSpec::validate() const {
    if (!std::isfinite(p) || !(p > 0.0)) {
        throw Error(Errc::InvalidSpec, "exponent p must be positive and finite");
    }
    if (!std::isfinite(q) || q > 0.0) {
        throw Error(Errc::InvalidSpec, "weight exponent q must be nonpositive and finite");
    }
}

LossSpec LossSpec::parse(std::string_view text) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        parts.push_back(text.substr(start, comma - start));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    if (parts.size() != 3) {
        throw Error(Errc::InvalidSpec, "expected 'p,q,side', got '" + std::string(text) + "'");
    }
    LossSpec spec;
    spec.p = parse_real(parts[0], "p");
    spec.q = parse_real(parts[1], "q");
    const std::string side = trim(parts[2]);
    if (side == "realized" || side == "x" || side == "X") {
        spec.weight_side = WeightSide::Realized;
    } else if (side == "target" || side == "y" || side == "Y") {
        spec.weight_side = WeightSide::Target;
    } else {
        throw Error(Errc::InvalidSpec, "weight side must be 'realized' or 'target', got '" + side + "'");
    }
    spec.validate();
    return spec;
}

std::string LossSpec::label() const {
    std::ostringstream os;
    os << p << ',' << q << ',' << to_string(weight_side);
    return os.str();
}

std::string_view to_string(WeightSide side) noexcept {
    return side == WeightSide::Realized ? "realized" : "target";
}

std::string_view to_string(Normalization norm) noexcept {
    switch (norm) {
        case Normalization::Total: return "total";
        case Normalization::Mean: return "mean";
        case Normalization::HalfMean: return "half_mean";
        case Normalization::HalfTotal: return "half_total";
    }
    return "unknown";
}

std::optional<double> weight(double base, double q) noexcept {
    if (q == 0.0) return 1.0;
    if (base == 0.0) return std::nullopt;
    if (q == -1.0) return 1.0 / base;
    return std::pow(base, q);
}

std::vector<std::optional<double>> unit_losses(const LossSpec& spec,
                                               std::span<const double> realized,
                                               std::span<const double> target) {
    spec.validate();
    if (realized.size() != target.size()) {
        throw Error(Errc::LengthMismatch, "realized and target lengths differ");
    }
    const auto weight_args = spec.weight_side == WeightSide::Realized ? realized : target;
    std::vector<std::optional<double>> out;
    out.reserve(realized.size());
    for (std::size_t i = 0; i < realized.size(); ++i) {
        const auto w = weight(weight_args[i], spec.q);
        if (!w) {
            if (spec.zero_weight_policy == ZeroWeightPolicy::Error) {
                throw Error(Errc::ZeroWeightBase,
                            "unit " + std::to_string(i + 1) + " has a zero " +
                                std::string(to_string(spec.weight_side)) +
                                " value under a negative weight exponent");
            }
            out.emplace_back(std::nullopt);
            continue;
        }
        const double diff = std::abs(realized[i] - target[i]);
        const double powered = spec.p == 1.0 ? diff : spec.p == 2.0 ? diff * diff : std::pow(diff, spec.p);
        out.emplace_back(powered * *w);
    }
    return out;
}

MeasureValue aggregate(std::span<const std::optional<double>> losses, Normalization norm) {
    std::vector<double> counted;
    counted.reserve(losses.size());
    for (const auto& l : losses) {
        if (l) counted.push_back(*l);
    }
    if (counted.empty()) throw Error(Errc::EmptyAfterSkip, "every unit was skipped");
    const double total = pairwise_sum(counted);
    const auto used = static_cast<double>(counted.size());
    double value = total;
    switch (norm) {
        case Normalization::Total: break;
        case Normalization::Mean: value = total / used; break;
        case Normalization::HalfMean: value = total / (2.0 * used); break;
        case Normalization::HalfTotal: value = total / 2.0; break;
    }
    return {value, counted.size(), norm};
}

SharePair shares_of(const PairedSeries& series) {
    return {to_shares(series.realized()), to_shares(series.target())};
}

MeasureValue level_loss(const LossSpec& spec, const PairedSeries& series, Normalization norm) {
    const auto losses = unit_losses(spec, series.realized(), series.target());
    return aggregate(losses, norm);
}

MeasureValue share_loss(const LossSpec& spec, const PairedSeries& series, Normalization norm) {
    const auto shares = shares_of(series);
    const auto losses = unit_losses(spec, shares.realized.shares, shares.target.shares);
    return aggregate(losses, norm);
}

}  // namespace lossequiv
