#include <moqd/archive.hpp>
#include <moqd/errors.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>

namespace moqd {

Descriptor Bounds::clip(std::span<const double> point) const
{
    if (point.size() != ranges.size())
        throw DimensionError("descriptor of length " + std::to_string(point.size()) + ", bounds of dimension " +
                             std::to_string(ranges.size()));
    Descriptor out(point.begin(), point.end());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = std::clamp(out[i], ranges[i][0], ranges[i][1]);
    return out;
}

bool Bounds::contains(std::span<const double> point) const
{
    if (point.size() != ranges.size())
        return false;
    for (std::size_t i = 0; i < point.size(); ++i)
        if (point[i] < ranges[i][0] || point[i] > ranges[i][1])
            return false;
    return true;
}

std::size_t nearest_centroid(const Centroids& centroids, std::span<const double> point)
{
    double best = std::numeric_limits<double>::infinity();
    std::size_t arg = 0;
    for (std::size_t c = 0; c < centroids.size(); ++c) {
        double dist = 0.0;
        for (std::size_t j = 0; j < point.size(); ++j) {
            const double diff = point[j] - centroids.points[c][j];
            dist += diff * diff;
        }
        if (dist < best) {
            best = dist;
            arg = c;
        }
    }
    return arg;
}

Centroids cvt_centroids(const Bounds& bounds, std::size_t k, std::size_t n_samples, std::uint64_t seed)
{
    if (k == 0)
        throw ConfigError("need at least one centroid", "archive.cells");
    if (k > n_samples)
        throw ConfigError("more centroids than samples", "archive.cvt_samples");
    if (n_samples < 10 * k)
        throw ConfigError("need at least 10 samples per centroid", "archive.cvt_samples");
    const auto d = bounds.dim();
    if (d == 0)
        throw ConfigError("descriptor space has no dimensions", "env.descriptor_bounds");

    std::mt19937_64 rng(seed);
    std::vector<std::uniform_real_distribution<double>> draw;
    for (const auto& r : bounds.ranges)
        draw.emplace_back(r[0], r[1]);

    std::vector<double> samples(n_samples * d);
    for (std::size_t s = 0; s < n_samples; ++s)
        for (std::size_t j = 0; j < d; ++j)
            samples[s * d + j] = draw[j](rng);

    std::vector<double> centers(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(k * d));
    std::vector<std::size_t> assign(n_samples);
    std::vector<double> sums(k * d);
    std::vector<std::size_t> counts(k);

    for (int iter = 0; iter < 200; ++iter) {
        for (std::size_t s = 0; s < n_samples; ++s) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t c = 0; c < k; ++c) {
                double dist = 0.0;
                for (std::size_t j = 0; j < d; ++j) {
                    const double diff = samples[s * d + j] - centers[c * d + j];
                    dist += diff * diff;
                }
                if (dist < best) {
                    best = dist;
                    arg = c;
                }
            }
            assign[s] = arg;
        }

        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t s = 0; s < n_samples; ++s) {
            ++counts[assign[s]];
            for (std::size_t j = 0; j < d; ++j)
                sums[assign[s] * d + j] += samples[s * d + j];
        }

        double shift = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] == 0)
                continue; // empty cluster keeps its center
            double moved = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double next = sums[c * d + j] / static_cast<double>(counts[c]);
                moved += (next - centers[c * d + j]) * (next - centers[c * d + j]);
                centers[c * d + j] = next;
            }
            shift = std::max(shift, std::sqrt(moved));
        }
        if (shift < 1e-6)
            break;
    }

    Centroids out;
    out.bounds = bounds;
    out.points.resize(k, Descriptor(d));
    for (std::size_t c = 0; c < k; ++c)
        for (std::size_t j = 0; j < d; ++j)
            out.points[c][j] = centers[c * d + j];
    return out;
}

const char* to_string(ReplacementPolicy policy)
{
    return policy == ReplacementPolicy::random ? "random" : "crowding";
}

ReplacementPolicy replacement_policy_from_string(const std::string& name)
{
    if (name == "random")
        return ReplacementPolicy::random;
    if (name == "crowding")
        return ReplacementPolicy::crowding;
    throw ConfigError("unknown replacement policy '" + name + "'", "archive.policy");
}

MoqdArchive::MoqdArchive(Centroids centroids, std::size_t front_capacity, ReplacementPolicy policy, std::uint64_t seed)
    : _centroids(std::move(centroids)), _capacity(front_capacity), _policy(policy), _rng(seed)
{
    if (_centroids.points.empty())
        throw ConfigError("archive needs at least one centroid", "archive.cells");
    if (_capacity == 0)
        throw ConfigError("front capacity must be positive", "archive.front_capacity");
    _cells.resize(_centroids.size());
}

std::size_t MoqdArchive::size() const
{
    std::size_t n = 0;
    for (const auto& c : _cells)
        n += c.size();
    return n;
}

std::size_t MoqdArchive::occupied_cells() const
{
    return static_cast<std::size_t>(std::count_if(_cells.begin(), _cells.end(), [](const auto& c) { return !c.empty(); }));
}

std::size_t MoqdArchive::cell_index(std::span<const double> descriptor) const
{
    return nearest_centroid(_centroids, _centroids.bounds.clip(descriptor));
}

InsertionReport MoqdArchive::insert(Solution s)
{
    InsertionReport report;
    report.cell = cell_index(s.descriptor);
    auto& front = _cells[report.cell];

    for (const auto& member : front)
        if (dominates(member.scores, s.scores) || member.scores == s.scores)
            return report;

    std::erase_if(front, [&](const Solution& member) {
        if (!dominates(s.scores, member.scores))
            return false;
        report.evicted.push_back(member.id);
        return true;
    });
    front.push_back(std::move(s));
    report.added = true;

    while (front.size() > _capacity) {
        std::size_t victim = 0;
        if (_policy == ReplacementPolicy::random) {
            victim = std::uniform_int_distribution<std::size_t>(0, front.size() - 1)(_rng);
        }
        else {
            std::vector<ScoreVector> scores;
            scores.reserve(front.size());
            for (const auto& member : front)
                scores.push_back(member.scores);
            const auto dist = crowding_distances(scores, CrowdingMode::replacement);
            // strict < keeps the oldest member among equal minima
            for (std::size_t i = 1; i < dist.size(); ++i)
                if (dist[i] < dist[victim])
                    victim = i;
            // Only boundary points left (capacity 1): the incumbent stays.
            if (std::isinf(dist[victim]))
                victim = front.size() - 1;
        }
        report.evicted.push_back(front[victim].id);
        if (victim == front.size() - 1) // the candidate is always last
            report.added = false;
        front.erase(front.begin() + static_cast<std::ptrdiff_t>(victim));
    }
    return report;
}

std::vector<const Solution*> MoqdArchive::sample_solutions(std::size_t batch, std::mt19937_64& rng,
                                                           SelectionMode mode) const
{
    std::vector<std::size_t> occupied;
    for (std::size_t c = 0; c < _cells.size(); ++c)
        if (!_cells[c].empty())
            occupied.push_back(c);
    if (occupied.empty())
        throw EmptyArchiveError("cannot sample from an empty archive");

    // Selection weights are cached per cell; only computed for cells that get drawn.
    std::vector<std::vector<double>> weights(_cells.size());
    std::uniform_int_distribution<std::size_t> pick_cell(0, occupied.size() - 1);

    std::vector<const Solution*> out;
    out.reserve(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        const auto& front = _cells[occupied[pick_cell(rng)]];
        std::size_t member = 0;
        if (mode == SelectionMode::uniform || front.size() == 1) {
            member = std::uniform_int_distribution<std::size_t>(0, front.size() - 1)(rng);
        }
        else {
            auto& w = weights[static_cast<std::size_t>(&front - _cells.data())];
            if (w.empty()) {
                std::vector<ScoreVector> scores;
                for (const auto& s : front)
                    scores.push_back(s.scores);
                w = crowding_distances(scores, CrowdingMode::selection);
                if (std::accumulate(w.begin(), w.end(), 0.0) <= 0.0)
                    std::fill(w.begin(), w.end(), 1.0);
            }
            member = std::discrete_distribution<std::size_t>(w.begin(), w.end())(rng);
        }
        out.push_back(&front[member]);
    }
    return out;
}

std::vector<Genotype> MoqdArchive::sample(std::size_t batch, std::mt19937_64& rng, SelectionMode mode) const
{
    std::vector<Genotype> out;
    for (const auto* s : sample_solutions(batch, rng, mode))
        out.push_back(s->genotype);
    return out;
}

ArchiveMetrics MoqdArchive::metrics(std::span<const double> ref) const
{
    ArchiveMetrics m;
    std::vector<ScoreVector> all;
    for (const auto& front : _cells) {
        if (front.empty())
            continue;
        std::vector<ScoreVector> scores;
        for (const auto& s : front) {
            scores.push_back(s.scores);
            const double total = std::accumulate(s.scores.begin(), s.scores.end(), 0.0);
            m.max_sum = m.max_sum ? std::max(*m.max_sum, total) : total;
            for (std::size_t i = 0; i < ref.size(); ++i) {
                if (s.scores[i] < ref[i]) {
                    ++m.reference_violations;
                    break;
                }
            }
        }
        m.moqd_score += hypervolume(scores, ref);
        all.insert(all.end(), scores.begin(), scores.end());
    }
    std::vector<ScoreVector> global;
    for (auto i : extract_front(all))
        global.push_back(all[i]);
    m.global_hypervolume = hypervolume(global, ref);
    m.coverage = static_cast<double>(occupied_cells()) / static_cast<double>(_cells.size());
    return m;
}

std::vector<Solution> MoqdArchive::solutions() const
{
    std::vector<Solution> out;
    for (const auto& front : _cells)
        out.insert(out.end(), front.begin(), front.end());
    return out;
}

void MoqdArchive::write_snapshot(std::ostream& out) const
{
    nlohmann::json header;
    header["kind"] = "header";
    header["centroids"] = _centroids.points;
    header["bounds"] = _centroids.bounds.ranges;
    if (_capacity == unbounded_front)
        header["P"] = nullptr;
    else
        header["P"] = _capacity;
    header["policy"] = to_string(_policy);
    out << header.dump() << '\n';

    for (std::size_t c = 0; c < _cells.size(); ++c) {
        for (const auto& s : _cells[c]) {
            nlohmann::json rec;
            rec["kind"] = "sol";
            rec["cell"] = c;
            rec["id"] = s.id;
            rec["desc"] = s.descriptor;
            rec["scores"] = s.scores;
            rec["genotype"] = s.genotype;
            out << rec.dump() << '\n';
        }
    }
}

MoqdArchive MoqdArchive::load_snapshot(std::istream& in, std::uint64_t seed)
{
    std::string line;
    std::size_t line_no = 0;
    std::optional<MoqdArchive> archive;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty())
            continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
            const auto kind = rec.at("kind").get<std::string>();
            if (!archive) {
                if (kind != "header")
                    throw ParseError("expected header record", line_no);
                Centroids centroids;
                centroids.points = rec.at("centroids").get<std::vector<Descriptor>>();
                centroids.bounds.ranges = rec.at("bounds").get<std::vector<std::array<double, 2>>>();
                for (const auto& p : centroids.points)
                    if (p.size() != centroids.bounds.dim())
                        throw ParseError("centroid dimension does not match bounds", line_no);
                const auto capacity = rec.at("P").is_null() ? unbounded_front : rec.at("P").get<std::size_t>();
                archive.emplace(std::move(centroids), capacity,
                                replacement_policy_from_string(rec.at("policy").get<std::string>()), seed);
                continue;
            }
            if (kind != "sol")
                throw ParseError("unknown record kind '" + kind + "'", line_no);
            Solution s;
            const auto cell = rec.at("cell").get<std::size_t>();
            s.id = rec.value("id", std::uint64_t{0});
            s.descriptor = rec.at("desc").get<Descriptor>();
            s.scores = rec.at("scores").get<ScoreVector>();
            s.genotype = rec.at("genotype").get<Genotype>();
            if (cell >= archive->_cells.size())
                throw ParseError("cell index out of range", line_no);
            if (s.descriptor.size() != archive->_centroids.bounds.dim())
                throw ParseError("descriptor dimension does not match bounds", line_no);
            archive->_cells[cell].push_back(std::move(s));
        }
        catch (const ParseError&) {
            throw;
        }
        catch (const std::exception& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    if (!archive)
        throw ParseError("missing header record", line_no + 1);
    return std::move(*archive);
}

ArchiveMetrics archive_metrics(const MoqdArchive& archive, std::span<const double> ref)
{
    return archive.metrics(ref);
}

std::size_t passive_insert(MoqdArchive& passive, std::span<const Solution> population)
{
    std::size_t added = 0;
    for (const auto& s : population)
        if (passive.insert(s).added)
            ++added;
    return added;
}

} // namespace moqd
