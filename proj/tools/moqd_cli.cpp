// Command-line front end: run, plot, compare, tessellate, reference.

#include <moqd/bench/compare.hpp>
#include <moqd/bench/config.hpp>
#include <moqd/bench/metrics_io.hpp>
#include <moqd/bench/plot.hpp>
#include <moqd/bench/runs.hpp>
#include <moqd/errors.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace fs = std::filesystem;
using namespace moqd;

namespace {

constexpr int exit_runtime = 1;
constexpr int exit_usage = 2;

std::string read_text(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read '" + path.string() + "'", "config");
    std::ostringstream text;
    text << in.rdbuf();
    return text.str();
}

void write_text(const fs::path& path, const std::string& text)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
}

int cmd_run(const fs::path& config, std::optional<std::uint64_t> seed, const fs::path& out, bool quiet)
{
    const auto text = read_text(config);
    const auto cfg = bench::parse_run_config(text);
    const auto s = seed.value_or(cfg.algorithm.seed);
    const int total = cfg.algorithm.iterations;
    ProgressCallback progress;
    if (!quiet)
        progress = [&](const MetricsRecord& row) {
            std::fprintf(stderr, "evals %8zu  moqd %.6g  hv %.6g  coverage %.3f\n", row.evaluations,
                         row.metrics.moqd_score, row.metrics.global_hypervolume, row.metrics.coverage);
        };
    const auto manifest = bench::execute_run(cfg, text, s, out, progress);
    std::printf("%s seed %llu: %zu evaluations over %d iterations, outputs in %s\n", manifest.algorithm.c_str(),
                static_cast<unsigned long long>(s), manifest.evaluations, total, out.string().c_str());
    return 0;
}

int cmd_plot(const std::string& kind, const fs::path& out, const std::vector<std::string>& inputs,
             const std::string& metric, const std::vector<double>& ref)
{
    if (kind == "curves") {
        std::vector<bench::RunGroup> groups;
        for (const auto& in : inputs)
            groups.push_back(bench::load_group(in));
        // Groups with the same label get their path appended so the legend stays unambiguous.
        for (std::size_t i = 0; i < groups.size(); ++i)
            for (std::size_t j = i + 1; j < groups.size(); ++j)
                if (groups[i].label == groups[j].label)
                    groups[j].label += " (" + inputs[j] + ")";
        write_text(out, bench::convergence_svg(groups, metric));
        return 0;
    }
    if (inputs.size() != 1)
        throw ConfigError("archive plots take exactly one archive.jsonl", "inputs");
    const fs::path snapshot = inputs.front();
    std::ifstream in(snapshot);
    if (!in)
        throw ConfigError("cannot read '" + snapshot.string() + "'", "inputs");
    const auto archive = MoqdArchive::load_snapshot(in);
    std::vector<double> reference = ref;
    if (reference.empty()) {
        const auto manifest = snapshot.parent_path() / bench::manifest_file;
        if (!fs::exists(manifest))
            throw ConfigError("no --ref given and no manifest.json next to the snapshot", "ref");
        reference = bench::read_manifest(manifest).reference_point;
    }
    write_text(out, bench::archive_svg(archive, reference));
    return 0;
}

int cmd_compare(const std::vector<std::string>& dirs, const std::string& metric, const std::string& csv)
{
    std::vector<bench::RunGroup> groups;
    for (const auto& d : dirs)
        groups.push_back(bench::load_group(d));
    for (std::size_t i = 0; i < groups.size(); ++i)
        for (std::size_t j = i + 1; j < groups.size(); ++j)
            if (groups[i].label == groups[j].label)
                groups[j].label = dirs[j];
    const auto table = bench::compare_groups(groups, metric);
    bench::write_comparison_text(std::cout, table);
    if (!csv.empty()) {
        std::ostringstream text;
        bench::write_comparison_csv(text, table);
        write_text(csv, text.str());
    }
    return 0;
}

int cmd_tessellate(const fs::path& config, const fs::path& out)
{
    const auto cfg = bench::parse_run_config(read_text(config));
    const auto task = bench::make_task(cfg.env);
    const auto& a = cfg.algorithm.archive;
    const auto centroids = cvt_centroids(task->descriptor_bounds(), a.cells, std::max(a.cvt_samples, 10 * a.cells),
                                         a.cvt_seed);
    MoqdArchive archive(centroids, a.front_capacity, ReplacementPolicy::random);
    std::ostringstream text;
    archive.write_snapshot(text);
    write_text(out, text.str());
    return 0;
}

int cmd_reference(const fs::path& config, std::size_t samples, std::uint64_t seed)
{
    const auto cfg = bench::parse_run_config(read_text(config));
    const auto task = bench::make_task(cfg.env);
    std::mt19937_64 rng(seed);
    std::vector<double> lo(task->objective_count(), std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < samples; ++i) {
        const auto e = task->evaluate(task->random_genotype(rng));
        for (std::size_t j = 0; j < lo.size(); ++j)
            lo[j] = std::min(lo[j], e.scores[j]);
    }
    std::printf("# minima over %zu random genotypes (seed %llu)\nreference_point = [", samples,
                static_cast<unsigned long long>(seed));
    for (std::size_t j = 0; j < lo.size(); ++j)
        std::printf("%s%s", j ? ", " : "", bench::format_double(lo[j]).c_str());
    std::printf("]\n");
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multi-objective quality-diversity runs, plots and comparisons"};
    app.set_version_flag("--version", std::string(bench::version()));
    app.require_subcommand(1);

    fs::path config, out;
    std::optional<std::uint64_t> seed;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "Run one configured algorithm with one seed");
    run->add_option("--config", config, "TOML run configuration")->required();
    run->add_option("--seed", seed, "Run seed (defaults to run.seed in the configuration)");
    run->add_option("--out", out, "Output directory")->required();
    run->add_flag("--quiet", quiet, "No per-iteration progress on stderr");

    std::string kind = "curves";
    std::string metric = "moqd_score";
    std::vector<std::string> inputs;
    std::vector<double> ref;
    auto* plot = app.add_subcommand("plot", "Write an SVG convergence plot or archive heatmap");
    plot->add_option("--kind", kind, "curves or archive")->check(CLI::IsMember({"curves", "archive"}));
    plot->add_option("--out", out, "Output SVG path")->required();
    plot->add_option("--metric", metric, "Metric column for curves");
    plot->add_option("--ref", ref, "Reference point for archive plots")->expected(-1);
    plot->add_option("inputs", inputs, "Run directories, metrics files or one archive.jsonl")->required();

    std::string csv;
    std::vector<std::string> dirs;
    auto* compare = app.add_subcommand("compare", "Paired statistics of final metrics; the first group is the reference");
    compare->add_option("--metric", metric, "Metric column");
    compare->add_option("--csv", csv, "Also write the table as CSV");
    compare->add_option("dirs", dirs, "Group directories")->required();

    auto* tessellate = app.add_subcommand("tessellate", "Write the CVT of a configuration as an empty snapshot");
    tessellate->add_option("--config", config, "TOML run configuration")->required();
    tessellate->add_option("--out", out, "Output archive.jsonl")->required();

    std::size_t samples = 10000;
    std::uint64_t ref_seed = 0;
    auto* reference = app.add_subcommand("reference", "Estimate a reference point from random genotypes");
    reference->add_option("--config", config, "TOML run configuration")->required();
    reference->add_option("--samples", samples, "Random genotypes to evaluate");
    reference->add_option("--seed", ref_seed, "Sampling seed");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_usage;
    }

    try {
        if (*run)
            return cmd_run(config, seed, out, quiet);
        if (*plot)
            return cmd_plot(kind, out, inputs, metric, ref);
        if (*compare)
            return cmd_compare(dirs, metric, csv);
        if (*tessellate)
            return cmd_tessellate(config, out);
        if (*reference)
            return cmd_reference(config, samples, ref_seed);
    }
    catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_usage;
    }
    catch (const ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_usage;
    }
    catch (const bench::PairingError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_usage;
    }
    catch (const UnsupportedDimensionError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_usage;
    }
    catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_runtime;
    }
    return exit_usage;
}
