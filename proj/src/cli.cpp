#include "lossequiv/cli.hpp"

#include "lossequiv/error.hpp"
#include "lossequiv/io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

namespace lossequiv {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

/// Integers print without decimals; everything else at 4 dp.
std::string compact(double v) {
    if (v == std::floor(v) && std::abs(v) < 1e15) return fmt::format("{:.0f}", v);
    return format_display(v);
}

struct ComputeArgs {
    std::vector<std::string> inputs;
    std::vector<std::string> labels;
    std::vector<std::string> measures;
    std::string id_normalization = "per-unit";
};

struct DiagnoseArgs {
    std::string input;
    std::string spec = "1,0,realized";
    double eps0 = 1.0;
    double alpha = 0.25;
    bool skip_zero_weights = false;
    AssumptionConfig thresholds;
    std::string out;
};

struct SimulateArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> threads;
};

struct RateArgs {
    std::string points;
    std::string field = "c_error";
    std::string spec;
};

int run_compute(const ComputeArgs& a, std::ostream& out) {
    if (!a.labels.empty() && a.labels.size() != a.inputs.size()) {
        throw Error(Errc::InvalidParameters, "give one --label per --input");
    }
    std::vector<ComparisonColumn> columns;
    for (std::size_t i = 0; i < a.inputs.size(); ++i) {
        const std::string label = a.labels.empty() ? fs::path(a.inputs[i]).stem().string() : a.labels[i];
        columns.push_back({label, read_dataset(fs::path(a.inputs[i]))});
    }
    const auto id_norm = a.id_normalization == "per-unit" ? IdNormalization::PerUnit : IdNormalization::Conventional;
    std::vector<Measure> measures;
    if (a.measures.empty()) {
        for (auto name : comparison_measures()) measures.push_back(Measure{.name = name});
    } else {
        for (const auto& key : a.measures) measures.push_back(Measure::parse(key));
    }
    for (auto& m : measures) m.id_normalization = id_norm;
    out << comparison_table(measures, columns);
    return 0;
}

int run_diagnose(const DiagnoseArgs& a, std::ostream& out) {
    auto spec = LossSpec::parse(a.spec);
    if (a.skip_zero_weights) spec.zero_weight_policy = ZeroWeightPolicy::SkipUnit;
    const EpsilonSchedule eps{a.eps0, a.alpha};
    eps.validate();
    const auto series = read_dataset(fs::path(a.input));
    const json doc{
        {"input", a.input},
        {"spec", to_json(spec)},
        {"epsilon", to_json(eps)},
        {"thresholds", to_json(a.thresholds)},
        {"equivalence", to_json(full_report(spec, series, eps))},
        {"assumptions", to_json(assumption_report(series, spec, eps, a.thresholds))},
    };
    if (a.out.empty()) {
        out << doc.dump(2) << '\n';
    } else {
        std::ofstream file(a.out);
        if (!file) throw Error(Errc::Io, "cannot open '" + a.out + "' for writing");
        file << doc.dump(2) << '\n';
        if (!file) throw Error(Errc::Io, "failed writing '" + a.out + "'");
        out << "wrote " << a.out << '\n';
    }
    return 0;
}

json fit_or_null(const RatePoints& points, RateField field) {
    try {
        const auto fit = fit_rate(points, field);
        return {{"slope", fit.slope}, {"intercept", fit.intercept}, {"slope_stderr", fit.slope_stderr}};
    } catch (const Error& e) {
        if (e.code() != Errc::DegenerateInput) throw;
        return nullptr;
    }
}

int run_simulate(const SimulateArgs& a, std::ostream& out) {
    auto config = load_config(fs::path(a.config));
    if (a.seed) config.generator.seed = *a.seed;
    if (a.threads) config.threads = *a.threads;
    config.validate();

    const fs::path dir(a.out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(Errc::Io, "cannot create '" + dir.string() + "': " + ec.message());

    std::ofstream points_out(dir / config.points_file);
    if (!points_out) throw Error(Errc::Io, "cannot write '" + (dir / config.points_file).string() + "'");
    points_out << points_header << '\n';

    json per_spec = json::array();
    for (const auto& spec : config.specs) {
        const auto points =
            run_convergence(config.generator, spec, config.n_grid, config.replicates, config.epsilon, config.threads);
        write_points(points_out, spec, points, false);

        json medians = json::array();
        const auto c_med = median_by_n(points, RateField::CError);
        const auto d_med = median_by_n(points, RateField::Diff);
        const auto k_med = median_by_n(points, RateField::KeyDiff);
        for (std::size_t i = 0; i < c_med.size(); ++i) {
            medians.push_back({{"n", c_med[i].first},
                               {"c_error", c_med[i].second},
                               {"diff", d_med[i].second},
                               {"keydiff", k_med[i].second}});
        }

        GeneratorSpec representative = config.generator;
        const std::size_t n_max = config.n_grid.back();
        representative.seed = cell_seed(config.generator.seed, n_max, 0);
        const auto series = generate(representative, n_max);
        per_spec.push_back({
            {"spec", to_json(spec)},
            {"medians", medians},
            {"fit",
             {{"c_error", fit_or_null(points, RateField::CError)},
              {"diff", fit_or_null(points, RateField::Diff)},
              {"keydiff", fit_or_null(points, RateField::KeyDiff)}}},
            {"representative",
             {{"n", n_max},
              {"replicate", 0},
              {"seed", representative.seed},
              {"equivalence", to_json(full_report(spec, series, config.epsilon))},
              {"assumptions", to_json(assumption_report(series, spec, config.epsilon, config.thresholds))}}},
        });
    }
    points_out.close();
    if (!points_out) throw Error(Errc::Io, "failed writing points file");

    std::ofstream summary(dir / config.summary_file);
    if (!summary) throw Error(Errc::Io, "cannot write '" + (dir / config.summary_file).string() + "'");
    summary << json{{"config", to_json(config)}, {"limit_ratio", config.generator.limit_ratio()}, {"results", per_spec}}
                   .dump(2)
            << '\n';
    out << "wrote " << (dir / config.points_file).string() << " and " << (dir / config.summary_file).string() << '\n';
    return 0;
}

int run_rate(const RateArgs& a, std::ostream& out) {
    std::ifstream in(a.points);
    if (!in) throw Error(Errc::Io, "cannot open '" + a.points + "'");
    const std::optional<LossSpec> spec = a.spec.empty() ? std::nullopt : std::optional(LossSpec::parse(a.spec));
    const auto field = parse_rate_field(a.field);
    const auto points = read_points(in, spec);
    const auto fit = fit_rate(points, field);
    out << fmt::format("field: {}\n", to_string(field));
    out << fmt::format("slope: {:.3f} +/- {:.3f}\n", fit.slope, fit.slope_stderr);
    out << fmt::format("intercept: {:.3f}\n", fit.intercept);
    for (const auto& [n, m] : median_by_n(points, field)) out << fmt::format("median at n={}: {}\n", n, m);
    return 0;
}

int run_demo(std::ostream& out) {
    const auto demo = small_sample_demo();
    const auto& y = demo.set1.target();
    const auto y_shares = to_shares(y);

    auto row = [&](std::string_view label, double a, double b, bool shares) {
        out << label << ' ' << (shares ? format_display(a) : compact(a)) << ' '
            << (shares ? format_display(b) : compact(b)) << '\n';
    };

    out << "Small Sample Example\n";
    out << "Unit 1 Unit 2\n";
    row("y_i", y[0], y[1], false);
    row("Share of Total", y_shares.shares[0], y_shares.shares[1], true);
    int set_number = 1;
    for (const auto* set : {&demo.set1, &demo.set2}) {
        const auto x = set->realized();
        const auto x_shares = to_shares(x);
        row(fmt::format("x_i{}", set_number++), x[0], x[1], false);
        row("Share of Total", x_shares.shares[0], x_shares.shares[1], true);
        row("Absolute Difference", std::abs(x[0] - y[0]), std::abs(x[1] - y[1]), false);
        row("Absolute Share Difference", std::abs(x_shares.shares[0] - y_shares.shares[0]),
            std::abs(x_shares.shares[1] - y_shares.shares[1]), true);
    }
    out << '\n';
    out << "Small Sample Summary Statistics\n";
    out << "Set 1 Set 2\n";
    row("Total Absolute Difference", demo.tad1.value, demo.tad2.value, false);
    row("Index of Dissimilarity", demo.id1.value, demo.id2.value, true);
    out << '\n';
    out << "Equivalence diagnostics (p=1, unit weights)\n";
    out << "Set 1 Set 2\n";
    row("c_n", demo.report1.c_n, demo.report2.c_n, true);
    row("K", demo.report1.k, demo.report2.k, false);
    row("Mean Level Loss", demo.report1.mean_level, demo.report2.mean_level, false);
    row("Mean Share Loss", demo.report1.mean_share, demo.report2.mean_share, true);
    row("Equivalence Difference", demo.report1.difference, demo.report2.difference, true);
    row("Key Difference", demo.report1.keydiff, demo.report2.keydiff, true);
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Accuracy measures and convergence diagnostics for realized vs target series", "lossequiv"};
    app.require_subcommand(1);

    ComputeArgs compute;
    auto* compute_cmd = app.add_subcommand("compute", "Accuracy measures for one or two datasets");
    compute_cmd->add_option("--input", compute.inputs, "Dataset CSV (id,target,realized); give two to compare")
        ->required()
        ->expected(1, 2);
    compute_cmd->add_option("--label", compute.labels, "Column label per input (default: file stem)");
    compute_cmd->add_option("--measure", compute.measures,
                            "tad, mad, id, taes, chi2, pearson, hh or cobb-douglas:p,q[,level|share] "
                            "(default: tad id chi2 pearson)");
    compute_cmd->add_option("--id-normalization", compute.id_normalization, "per-unit = 1/(2n), conventional = 1/2")
        ->check(CLI::IsMember({"per-unit", "conventional"}));

    DiagnoseArgs diagnose;
    auto* diagnose_cmd = app.add_subcommand("diagnose", "Equivalence and regularity diagnostics as JSON");
    diagnose_cmd->add_option("--input", diagnose.input, "Dataset CSV")->required();
    diagnose_cmd->add_option("--spec", diagnose.spec, "Loss as p,q,side (side: realized|target)");
    diagnose_cmd->add_option("--eps0", diagnose.eps0, "Deviation tolerance scale");
    diagnose_cmd->add_option("--alpha", diagnose.alpha, "Deviation tolerance decay exponent");
    diagnose_cmd->add_flag("--skip-zero-weights", diagnose.skip_zero_weights,
                           "Skip units whose weight base is 0 instead of failing");
    diagnose_cmd->add_option("--delta", diagnose.thresholds.subset_delta, "Minimum subset fraction for probes");
    diagnose_cmd->add_option("--probes", diagnose.thresholds.subset_probes, "Number of subset probes");
    diagnose_cmd->add_option("--seed", diagnose.thresholds.seed, "Seed for subset probes");
    diagnose_cmd->add_option("--grid-points", diagnose.thresholds.grid_points, "Prefix grid size");
    diagnose_cmd->add_option("--out", diagnose.out, "Write the report here instead of stdout");

    SimulateArgs simulate;
    auto* simulate_cmd = app.add_subcommand("simulate", "Run a seeded convergence experiment");
    simulate_cmd->add_option("--config", simulate.config, "Experiment config (JSON)")->required();
    simulate_cmd->add_option("--out", simulate.out, "Output directory")->required();
    simulate_cmd->add_option("--seed", simulate.seed, "Override the config master seed");
    simulate_cmd->add_option("--threads", simulate.threads, "Worker threads")->check(CLI::PositiveNumber);

    RateArgs rate;
    auto* rate_cmd = app.add_subcommand("rate", "Fit log(median error) against log(n)");
    rate_cmd->add_option("--points", rate.points, "Points CSV written by simulate")->required();
    rate_cmd->add_option("--field", rate.field, "c_error, diff or keydiff")
        ->check(CLI::IsMember({"c_error", "diff", "keydiff"}));
    rate_cmd->add_option("--spec", rate.spec, "Select rows for this loss (p,q,side)");

    auto* demo_cmd = app.add_subcommand("demo-small-sample", "Reproduce the two-unit example tables");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (compute_cmd->parsed()) return run_compute(compute, out);
        if (diagnose_cmd->parsed()) return run_diagnose(diagnose, out);
        if (simulate_cmd->parsed()) return run_simulate(simulate, out);
        if (rate_cmd->parsed()) return run_rate(rate, out);
        if (demo_cmd->parsed()) return run_demo(out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.is_validation() ? 1 : 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
    err << app.help();
    return 1;
}

}  // namespace lossequiv
