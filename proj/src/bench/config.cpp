#include <moqd/bench/config.hpp>
#include <moqd/errors.hpp>

#include <json.hpp>
#include <toml.hpp>

#include <cstdio>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace moqd::bench {

namespace {

using Keys = std::set<std::string, std::less<>>;

const std::vector<std::pair<std::string, Keys>>& schema()
{
    static const std::vector<std::pair<std::string, Keys>> sections = {
        {"run", {"algorithm", "iterations", "batch_size", "metrics_every", "seed", "wall_clock"}},
        {"env",
         {"name", "episode_length", "energy_weight", "dt", "phase_period", "genotype_size", "init_range",
          "reference_point"}},
        {"archive", {"cells", "front_capacity", "cvt_samples", "cvt_seed"}},
        {"variation", {"iso_sigma", "line_sigma", "genotype_bounds"}},
        {"policy", {"hidden"}},
        {"td3",
         {"buffer_size", "batch_size", "critic_hidden", "critic_lr", "actor_lr", "policy_lr", "critic_steps",
          "pg_steps", "policy_noise", "noise_clip", "discount", "tau", "policy_delay"}},
        {"algorithm", {"pg_objectives", "crowding", "inject_actor"}},
    };
    return sections;
}

class Reader {
public:
    explicit Reader(const toml::table& root) : _root(root)
    {
        for (const auto& [key, node] : root) {
            const std::string section(key.str());
            const auto* keys = allowed(section);
            if (!keys)
                throw ConfigError("unknown section", section);
            const auto* table = node.as_table();
            if (!table)
                throw ConfigError("expected a table", section);
            for (const auto& [name, value] : *table)
                if (!keys->contains(name.str()))
                    throw ConfigError("unknown key", section + "." + std::string(name.str()));
        }
    }

    const toml::node* find(const std::string& section, const std::string& key) const
    {
        const auto* table = _root[section].as_table();
        return table ? table->get(key) : nullptr;
    }

    void integer(const std::string& section, const std::string& key, long long min, auto& out) const
    {
        const auto* node = find(section, key);
        if (!node)
            return;
        const auto* v = node->as_integer();
        if (!v)
            throw ConfigError("expected an integer", section + "." + key);
        if (v->get() < min)
            throw ConfigError("must be at least " + std::to_string(min), section + "." + key);
        using T = std::remove_reference_t<decltype(out)>;
        if (static_cast<unsigned long long>(v->get()) > static_cast<unsigned long long>(std::numeric_limits<T>::max()))
            throw ConfigError("value too large", section + "." + key);
        out = static_cast<T>(v->get());
    }

    void real(const std::string& section, const std::string& key, double& out) const
    {
        const auto* node = find(section, key);
        if (!node)
            return;
        if (const auto* f = node->as_floating_point())
            out = f->get();
        else if (const auto* i = node->as_integer())
            out = static_cast<double>(i->get());
        else
            throw ConfigError("expected a number", section + "." + key);
    }

    void boolean(const std::string& section, const std::string& key, bool& out) const
    {
        const auto* node = find(section, key);
        if (!node)
            return;
        const auto* b = node->as_boolean();
        if (!b)
            throw ConfigError("expected true or false", section + "." + key);
        out = b->get();
    }

    void string(const std::string& section, const std::string& key, std::string& out) const
    {
        const auto* node = find(section, key);
        if (!node)
            return;
        const auto* s = node->as_string();
        if (!s)
            throw ConfigError("expected a string", section + "." + key);
        out = s->get();
    }

    std::optional<std::vector<double>> reals(const std::string& section, const std::string& key) const
    {
        const auto* node = find(section, key);
        if (!node)
            return std::nullopt;
        const auto* arr = node->as_array();
        if (!arr)
            throw ConfigError("expected an array of numbers", section + "." + key);
        std::vector<double> out;
        for (const auto& item : *arr) {
            if (const auto* f = item.as_floating_point())
                out.push_back(f->get());
            else if (const auto* i = item.as_integer())
                out.push_back(static_cast<double>(i->get()));
            else
                throw ConfigError("expected an array of numbers", section + "." + key);
        }
        return out;
    }

    std::optional<std::vector<long long>> integers(const std::string& section, const std::string& key,
                                                   long long min) const
    {
        const auto* node = find(section, key);
        if (!node)
            return std::nullopt;
        const auto* arr = node->as_array();
        if (!arr)
            throw ConfigError("expected an array of integers", section + "." + key);
        std::vector<long long> out;
        for (const auto& item : *arr) {
            const auto* i = item.as_integer();
            if (!i)
                throw ConfigError("expected an array of integers", section + "." + key);
            if (i->get() < min)
                throw ConfigError("entries must be at least " + std::to_string(min), section + "." + key);
            out.push_back(i->get());
        }
        return out;
    }

private:
    static const Keys* allowed(const std::string& section)
    {
        for (const auto& [name, keys] : schema())
            if (name == section)
                return &keys;
        return nullptr;
    }

    const toml::table& _root;
};

std::vector<int> to_ints(const std::vector<long long>& v)
{
    std::vector<int> out;
    for (auto x : v) {
        if (x > std::numeric_limits<int>::max())
            throw ConfigError("layer size too large", "policy.hidden");
        out.push_back(static_cast<int>(x));
    }
    return out;
}

} // namespace

RunConfig parse_run_config(std::string_view toml_text)
{
    toml::table root;
    try {
        root = toml::parse(toml_text);
    }
    catch (const toml::parse_error& e) {
        throw ParseError(std::string(e.description()), e.source().begin.line);
    }
    const Reader r(root);

    RunConfig cfg;
    auto& a = cfg.algorithm;
    auto& env = cfg.env;

    std::string algorithm = to_string(a.algorithm);
    r.string("run", "algorithm", algorithm);
    a.algorithm = algorithm_from_string(algorithm);
    r.integer("run", "iterations", 1, a.iterations);
    r.integer("run", "batch_size", 2, a.batch_size);
    r.integer("run", "metrics_every", 1, a.metrics_every);
    r.integer("run", "seed", 0, a.seed);
    r.boolean("run", "wall_clock", a.wall_clock);

    r.string("env", "name", env.name);
    if (env.name != "pointwalker" && env.name != "bisphere")
        throw ConfigError("unknown environment '" + env.name + "' (expected pointwalker or bisphere)", "env.name");
    r.integer("env", "episode_length", 1, env.pointwalker.episode_length);
    r.real("env", "energy_weight", env.pointwalker.energy_weight);
    r.real("env", "dt", env.pointwalker.dt);
    r.integer("env", "phase_period", 1, env.pointwalker.phase_period);
    r.integer("env", "genotype_size", 2, env.genotype_size);
    r.real("env", "init_range", env.init_range);
    const auto ref = r.reals("env", "reference_point");
    if (!ref)
        throw ConfigError("required", "env.reference_point");
    a.reference_point = *ref;

    r.integer("archive", "cells", 1, a.archive.cells);
    r.integer("archive", "front_capacity", 1, a.archive.front_capacity);
    r.integer("archive", "cvt_samples", 1, a.archive.cvt_samples);
    r.integer("archive", "cvt_seed", 0, a.archive.cvt_seed);

    r.real("variation", "iso_sigma", a.variation.iso_sigma);
    r.real("variation", "line_sigma", a.variation.line_sigma);
    if (const auto gb = r.reals("variation", "genotype_bounds")) {
        if (gb->size() != 2 || !((*gb)[0] < (*gb)[1]))
            throw ConfigError("expected [low, high] with low < high", "variation.genotype_bounds");
        a.variation.genotype_bounds = std::array<double, 2>{(*gb)[0], (*gb)[1]};
    }

    if (const auto hidden = r.integers("policy", "hidden", 1))
        env.policy_hidden = to_ints(*hidden);

    auto& td3 = a.td3;
    r.integer("td3", "buffer_size", 1, td3.buffer_size);
    r.integer("td3", "batch_size", 1, td3.batch_size);
    if (const auto hidden = r.integers("td3", "critic_hidden", 1))
        td3.critic_hidden = to_ints(*hidden);
    r.real("td3", "critic_lr", td3.critic_lr);
    r.real("td3", "actor_lr", td3.actor_lr);
    r.real("td3", "policy_lr", td3.policy_lr);
    r.integer("td3", "critic_steps", 0, td3.critic_steps);
    r.integer("td3", "pg_steps", 0, td3.pg_steps);
    r.real("td3", "policy_noise", td3.policy_noise);
    r.real("td3", "noise_clip", td3.noise_clip);
    r.real("td3", "discount", td3.discount);
    r.real("td3", "tau", td3.tau);
    r.integer("td3", "policy_delay", 1, td3.policy_delay);

    if (const auto objs = r.integers("algorithm", "pg_objectives", 0)) {
        std::vector<std::size_t> v(objs->begin(), objs->end());
        a.pg_objectives = v;
    }
    r.boolean("algorithm", "crowding", a.crowding);
    r.boolean("algorithm", "inject_actor", a.inject_actor);

    for (double lr : {td3.critic_lr, td3.actor_lr, td3.policy_lr})
        if (!(lr > 0.0))
            throw ConfigError("learning rates must be positive", "td3");

    const auto task = make_task(env);
    a.validate(*task);
    return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ConfigError("cannot read '" + path.string() + "'", "config");
    std::ostringstream text;
    text << in.rdbuf();
    return parse_run_config(text.str());
}

std::unique_ptr<Task> make_task(const EnvConfig& env)
{
    if (env.name == "pointwalker")
        return std::make_unique<PointWalkerTask>(env.pointwalker, env.policy_hidden);
    if (env.name == "bisphere")
        return std::make_unique<BiSphereTask>(env.genotype_size, env.init_range);
    throw ConfigError("unknown environment '" + env.name + "'", "env.name");
}

std::string canonical_json(const RunConfig& cfg)
{
    const auto& a = cfg.algorithm;
    nlohmann::json j;
    j["run"] = {{"algorithm", to_string(a.algorithm)},
                {"iterations", a.iterations},
                {"batch_size", a.batch_size},
                {"metrics_every", a.metrics_every},
                {"wall_clock", a.wall_clock}};
    j["env"] = {{"name", cfg.env.name}, {"reference_point", a.reference_point}};
    if (cfg.env.name == "pointwalker") {
        const auto& pw = cfg.env.pointwalker;
        j["env"]["episode_length"] = pw.episode_length;
        j["env"]["energy_weight"] = pw.energy_weight;
        j["env"]["dt"] = pw.dt;
        j["env"]["phase_period"] = pw.phase_period;
        j["policy"] = {{"hidden", cfg.env.policy_hidden}};
    }
    else {
        j["env"]["genotype_size"] = cfg.env.genotype_size;
        j["env"]["init_range"] = cfg.env.init_range;
    }
    j["archive"] = {{"cells", a.archive.cells},
                    {"front_capacity", a.archive.front_capacity},
                    {"cvt_samples", a.archive.cvt_samples},
                    {"cvt_seed", a.archive.cvt_seed}};
    j["variation"] = {{"iso_sigma", a.variation.iso_sigma}, {"line_sigma", a.variation.line_sigma}};
    if (a.variation.genotype_bounds)
        j["variation"]["genotype_bounds"] = *a.variation.genotype_bounds;
    const auto& t = a.td3;
    j["td3"] = {{"buffer_size", t.buffer_size},   {"batch_size", t.batch_size},   {"critic_hidden", t.critic_hidden},
                {"critic_lr", t.critic_lr},       {"actor_lr", t.actor_lr},       {"policy_lr", t.policy_lr},
                {"critic_steps", t.critic_steps}, {"pg_steps", t.pg_steps},       {"policy_noise", t.policy_noise},
                {"noise_clip", t.noise_clip},     {"discount", t.discount},       {"tau", t.tau},
                {"policy_delay", t.policy_delay}};
    j["algorithm"] = {{"crowding", a.crowding}, {"inject_actor", a.inject_actor}};
    if (a.pg_objectives)
        j["algorithm"]["pg_objectives"] = *a.pg_objectives;
    return j.dump();
}

std::string config_hash(const RunConfig& cfg)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : canonical_json(cfg)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

} // namespace moqd::bench
