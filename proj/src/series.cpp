#include "lossequiv/series.hpp"

#include "lossequiv/error.hpp"
#include "lossequiv/summation.hpp"

#include <cmath>
#include <string>
#include <utility>

namespace lossequiv {

std::string_view to_string(Errc code) noexcept {
    switch (code) {
        case Errc::EmptySeries: return "EmptySeries";
        case Errc::LengthMismatch: return "LengthMismatch";
        case Errc::NegativeValue: return "NegativeValue";
        case Errc::NonFinite: return "NonFinite";
        case Errc::ZeroTotal: return "ZeroTotal";
        case Errc::InvalidSpec: return "InvalidSpec";
        case Errc::ZeroWeightBase: return "ZeroWeightBase";
        case Errc::EmptyAfterSkip: return "EmptyAfterSkip";
        case Errc::IndexOutOfRange: return "IndexOutOfRange";
        case Errc::UnknownMeasure: return "UnknownMeasure";
        case Errc::InvalidParameters: return "InvalidParameters";
        case Errc::DegenerateInput: return "DegenerateInput";
        case Errc::ParseError: return "ParseError";
        case Errc::DuplicateId: return "DuplicateId";
        case Errc::InvalidConfig: return "InvalidConfig";
        case Errc::Io: return "Io";
    }
    return "Unknown";
}

namespace {

void check_values(std::span<const double> values, const char* side) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw Error(Errc::NonFinite, std::string(side) + " value at unit " +
                                             std::to_string(i + 1) + " is not finite");
        }
        if (values[i] < 0.0) {
            throw Error(Errc::NegativeValue, std::string(side) + " value at unit " +
                                                 std::to_string(i + 1) + " is negative");
        }
    }
}

std::vector<std::string> default_ids(std::size_t n) {
    std::vector<std::string> ids;
    ids.reserve(n);
    for (std::size_t i = 1; i <= n; ++i) ids.push_back(std::to_string(i));
    return ids;
}

}  // namespace

PairedSeries::PairedSeries(std::vector<std::string> ids, std::vector<double> realized,
                           std::vector<double> target)
    : ids_(std::move(ids)), realized_(std::move(realized)), target_(std::move(target)) {
    init();
}

PairedSeries::PairedSeries(std::vector<double> realized, std::vector<double> target)
    : realized_(std::move(realized)), target_(std::move(target)) {
    ids_ = default_ids(realized_.size());
    init();
}

void PairedSeries::init() {
    if (realized_.empty()) throw Error(Errc::EmptySeries, "series has no units");
    if (realized_.size() != target_.size() || ids_.size() != realized_.size()) {
        throw Error(Errc::LengthMismatch,
                    "ids/realized/target lengths differ (" + std::to_string(ids_.size()) + "/" +
                        std::to_string(realized_.size()) + "/" + std::to_string(target_.size()) +
                        ")");
    }
    check_values(realized_, "realized");
    check_values(target_, "target");
    realized_total_ = pairwise_sum(realized_);
    target_total_ = pairwise_sum(target_);
}

PairedSeries PairedSeries::prefix(std::size_t count) const {
    if (count == 0 || count > size()) {
        throw Error(Errc::IndexOutOfRange, "prefix size " + std::to_string(count) +
                                               " outside [1, " + std::to_string(size()) + "]");
    }
    return PairedSeries({ids_.begin(), ids_.begin() + static_cast<std::ptrdiff_t>(count)},
                        {realized_.begin(), realized_.begin() + static_cast<std::ptrdiff_t>(count)},
                        {target_.begin(), target_.begin() + static_cast<std::ptrdiff_t>(count)});
}

ShareSeries to_shares(std::span<const double> values) {
    check_values(values, "share input");
    const double total = pairwise_sum(values);
    if (!(total > 0.0)) throw Error(Errc::ZeroTotal, "cannot form shares of a zero total");
    ShareSeries out;
    out.shares.reserve(values.size());
    for (double v : values) out.shares.push_back(v / total);
    return out;
}

}  // namespace lossequiv
