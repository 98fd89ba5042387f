#pragma once

#include "lossequiv/assumptions.hpp"
#include "lossequiv/equivalence.hpp"
#include "lossequiv/loss.hpp"
#include "lossequiv/measures.hpp"
#include "lossequiv/series.hpp"
#include "lossequiv/simulate.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lossequiv {

/// Dataset files: header `id,target,realized`, one unit per row, decimal
/// point reals without thousands separators. Negative values, non-numeric
/// cells and duplicate ids are rejected; row numbers in errors count data
/// rows from 1.
inline constexpr std::string_view dataset_header = "id,target,realized";

PairedSeries read_dataset(std::istream& in);
PairedSeries read_dataset(const std::filesystem::path& path);

/// Writes values at full precision, so read_dataset(write_dataset(s)) == s.
void write_dataset(std::ostream& out, const PairedSeries& series);
void write_dataset(const std::filesystem::path& path, const PairedSeries& series);

/// Everything a `simulate` run needs. Loaded from JSON; omitted keys take
/// the defaults below, unknown keys are rejected.
struct ExperimentConfig {
    GeneratorSpec generator;
    std::vector<std::size_t> n_grid{100, 1000, 10000, 100000};
    std::size_t replicates = 100;
    std::vector<LossSpec> specs{LossSpec{}};
    EpsilonSchedule epsilon;
    AssumptionConfig thresholds;
    std::size_t threads = 1;
    std::string points_file = "points.csv";
    std::string summary_file = "summary.json";

    void validate() const;
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const ExperimentConfig& config);

/// "p;q;side": the loss label with separators that survive CSV.
std::string spec_key(const LossSpec& spec);

inline constexpr std::string_view points_header =
    "spec,n,replicate,seed,c_error,diff,keydiff,sparse_fraction,injected_fraction";

void write_points(std::ostream& out, const LossSpec& spec, const RatePoints& points,
                  bool with_header = true);

/// Rows whose spec column matches `spec` (all rows when nullopt). Throws
/// InvalidConfig if several specs are present and none was selected.
RatePoints read_points(std::istream& in, const std::optional<LossSpec>& spec = std::nullopt);

nlohmann::json to_json(const LossSpec& spec);
nlohmann::json to_json(const EpsilonSchedule& eps);
nlohmann::json to_json(const AssumptionConfig& thresholds);
nlohmann::json to_json(const EquivalenceReport& report);
nlohmann::json to_json(const AssumptionReport& report);

/// Full-precision value for stored documents; 4-dp fixed string for display.
std::string format_display(double value);

struct ComparisonColumn {
    std::string label;
    PairedSeries series;
};

/// Measure-by-input table; with two inputs a third column holds first/second.
std::string comparison_table(std::span<const Measure> measures, std::span<const ComparisonColumn> inputs);

}  // namespace lossequiv
