#include <moqd/bench/metrics_io.hpp>
#include <moqd/bench/runs.hpp>
#include <moqd/errors.hpp>

#include <json.hpp>

#include <algorithm>
#include <fstream>

#ifndef MOQD_VERSION
#define MOQD_VERSION "unknown"
#endif

namespace moqd::bench {

namespace fs = std::filesystem;

const char* version()
{
    return MOQD_VERSION;
}

std::string manifest_json(const RunManifest& m)
{
    nlohmann::ordered_json j;
    j["config_hash"] = m.config_hash;
    j["seed"] = m.seed;
    j["algorithm"] = m.algorithm;
    j["environment"] = m.environment;
    j["reference_point"] = m.reference_point;
    j["evaluations"] = m.evaluations;
    j["version"] = m.version;
    j["outputs"] = m.outputs;
    return j.dump(2) + "\n";
}

RunManifest read_manifest(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot read " + path.string());
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
        RunManifest m;
        m.config_hash = j.at("config_hash").get<std::string>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.algorithm = j.at("algorithm").get<std::string>();
        m.environment = j.at("environment").get<std::string>();
        m.reference_point = j.at("reference_point").get<std::vector<double>>();
        m.evaluations = j.at("evaluations").get<std::size_t>();
        m.version = j.value("version", "");
        m.outputs = j.value("outputs", std::vector<std::string>{});
        return m;
    }
    catch (const nlohmann::json::exception& e) {
        throw ParseError(path.string() + ": " + e.what(), 1);
    }
}

RunManifest execute_run(RunConfig cfg, const std::string& config_text, std::uint64_t seed, const fs::path& out_dir,
                        const ProgressCallback& progress)
{
    cfg.algorithm.seed = seed;
    const auto task = make_task(cfg.env);
    cfg.algorithm.validate(*task);

    auto result = run_algorithm(cfg.algorithm, *task, progress);

    fs::create_directories(out_dir);
    write_metrics_csv(out_dir / metrics_file, result.metrics);
    {
        std::ofstream out(out_dir / archive_file, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + (out_dir / archive_file).string());
        result.archive.write_snapshot(out);
    }
    {
        std::ofstream out(out_dir / config_file, std::ios::binary);
        out << config_text;
    }

    RunManifest m;
    m.config_hash = config_hash(cfg);
    m.seed = seed;
    m.algorithm = to_string(cfg.algorithm.algorithm);
    m.environment = cfg.env.name;
    m.reference_point = cfg.algorithm.reference_point;
    m.evaluations = result.evaluations;
    m.version = version();
    m.outputs = {metrics_file, archive_file, manifest_file, config_file};
    std::ofstream out(out_dir / manifest_file, std::ios::binary);
    out << manifest_json(m);
    if (!out)
        throw std::runtime_error("cannot write " + (out_dir / manifest_file).string());
    return m;
}

namespace {

RunRecord load_run(const fs::path& dir, const fs::path& metrics, std::uint64_t fallback_seed)
{
    RunRecord r;
    r.dir = dir;
    r.seed = fallback_seed;
    r.metrics = read_metrics_csv(metrics);
    if (fs::exists(dir / manifest_file)) {
        const auto m = read_manifest(dir / manifest_file);
        r.seed = m.seed;
        r.algorithm = m.algorithm;
    }
    return r;
}

} // namespace

RunGroup load_group(const fs::path& path)
{
    RunGroup g;
    if (fs::is_regular_file(path)) {
        g.runs.push_back(load_run(path.parent_path(), path, 0));
        g.label = path.parent_path().filename().string();
    }
    else if (fs::is_directory(path)) {
        g.label = fs::path(path).lexically_normal().filename().string();
        if (g.label.empty())
            g.label = fs::path(path).lexically_normal().parent_path().filename().string();
        if (fs::exists(path / metrics_file)) {
            g.runs.push_back(load_run(path, path / metrics_file, 0));
        }
        else {
            std::vector<fs::path> dirs;
            for (const auto& entry : fs::directory_iterator(path))
                if (entry.is_directory() && fs::exists(entry.path() / metrics_file))
                    dirs.push_back(entry.path());
            std::sort(dirs.begin(), dirs.end());
            for (std::size_t i = 0; i < dirs.size(); ++i)
                g.runs.push_back(load_run(dirs[i], dirs[i] / metrics_file, i));
        }
    }
    if (g.runs.empty())
        throw ConfigError("no metrics.csv found under '" + path.string() + "'", "inputs");

    g.algorithm = g.runs.front().algorithm;
    for (const auto& r : g.runs)
        if (r.algorithm != g.algorithm)
            g.algorithm.clear();
    if (g.label.empty() || g.label == ".")
        g.label = g.algorithm.empty() ? "run" : g.algorithm;
    return g;
}

} // namespace moqd::bench
