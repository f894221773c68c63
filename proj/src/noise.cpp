#include "ldplab/noise.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>

namespace ldplab {

IntensityGrid IntensityGrid::constant(double horizon, std::size_t marks, double value) {
    return IntensityGrid{TimeGrid::uniform(horizon, 1), {std::vector<double>(marks, value)}};
}

IntensityGrid IntensityGrid::from_control(const ControlPair& q) {
    IntensityGrid out{q.partition(), {}};
    for (std::size_t i = 0; i < q.intervals(); ++i) {
        std::vector<double> row(q.marks());
        for (std::size_t j = 0; j < q.marks(); ++j) row[j] = q.g(i, j);
        out.values.push_back(std::move(row));
    }
    return out;
}

double IntensityGrid::at(double t, std::size_t mark) const {
    const auto& nodes = partition.nodes();
    const auto it = std::upper_bound(nodes.begin() + 1, nodes.end() - 1, t);
    return values[static_cast<std::size_t>(it - (nodes.begin() + 1))][mark];
}

double IntensityGrid::max(std::size_t mark) const {
    double m = 0.0;
    for (const auto& row : values) m = std::max(m, row[mark]);
    return m;
}

BrownianTable sample_brownian(std::size_t modes, std::span<const double> grid, StreamKey key) {
    if (grid.size() < 2) throw std::invalid_argument("sample_brownian: grid needs at least one step");
    if (grid.front() != 0.0) throw std::invalid_argument("sample_brownian: grid must start at 0");
    for (std::size_t m = 1; m < grid.size(); ++m)
        if (grid[m] < grid[m - 1]) throw std::invalid_argument("sample_brownian: grid must be increasing");
    BrownianTable table(modes, grid.size() - 1);
    CounterRng rng(key);
    std::normal_distribution<double> normal;
    for (std::size_t m = 0; m + 1 < grid.size(); ++m) {
        const double scale = std::sqrt(grid[m + 1] - grid[m]);
        for (std::size_t k = 0; k < modes; ++k) table(m, k) = scale * normal(rng);
    }
    return table;
}

BrownianTable sample_brownian(std::size_t modes, std::span<const double> grid, std::uint64_t seed) {
    return sample_brownian(modes, grid, StreamKey{seed, 0, Purpose::brownian});
}

namespace {

/// Per-mark Poisson counts with uniform times on (0, T]; `rate(j)` is the mean count density.
template <class Rate, class Accept>
std::vector<JumpEvent> sample_events(const MarkMeasure& mm, double horizon, StreamKey key, Rate&& rate,
                                     Accept&& accept) {
    if (!(horizon > 0.0)) throw std::invalid_argument("sample_prm: horizon must be > 0");
    CounterRng rng(key);
    std::vector<JumpEvent> events;
    for (std::size_t j = 0; j < mm.size(); ++j) {
        const double mean = rate(j) * mm.weight(j) * horizon;
        if (!(mean > 0.0)) continue;
        std::poisson_distribution<long long> poisson(mean);
        const long long count = poisson(rng);
        for (long long n = 0; n < count; ++n) {
            const double t = horizon * (1.0 - rng.uniform());
            if (accept(t, j)) events.push_back({t, j});
        }
    }
    std::sort(events.begin(), events.end(), [](const JumpEvent& a, const JumpEvent& b) { return a.time < b.time; });
    // equal times have probability zero; redraw the later one if it happens anyway
    for (std::size_t i = 1; i < events.size(); ++i) {
        if (events[i].time == events[i - 1].time) {
            events[i].time = horizon * (1.0 - rng.uniform());
            std::sort(events.begin(), events.end(),
                      [](const JumpEvent& a, const JumpEvent& b) { return a.time < b.time; });
            i = 0;
        }
    }
    return events;
}

}  // namespace

std::vector<JumpEvent> sample_prm(double theta, const MarkMeasure& mm, double horizon, StreamKey key) {
    if (!(theta > 0.0) || !std::isfinite(theta)) throw std::invalid_argument("sample_prm: theta must be > 0");
    return sample_events(mm, horizon, key, [&](std::size_t) { return theta; },
                         [](double, std::size_t) { return true; });
}

std::vector<JumpEvent> sample_prm(double theta, const MarkMeasure& mm, double horizon, std::uint64_t seed) {
    return sample_prm(theta, mm, horizon, StreamKey{seed, 0, Purpose::jumps});
}

std::vector<JumpEvent> sample_controlled_prm(const IntensityGrid& phi, double epsilon, const MarkMeasure& mm,
                                             double horizon, StreamKey key) {
    if (!(epsilon > 0.0)) throw std::invalid_argument("sample_controlled_prm: epsilon must be > 0");
    if (phi.values.empty() || phi.marks() != mm.size())
        throw std::invalid_argument("sample_controlled_prm: control has wrong mark count");
    for (const auto& row : phi.values)
        for (double v : row)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("sample_controlled_prm: control entries must be finite and >= 0");

    std::vector<double> phi_max(mm.size());
    for (std::size_t j = 0; j < mm.size(); ++j) phi_max[j] = phi.max(j);

    CounterRng thinning(StreamKey{key.seed, key.replica, Purpose::thinning});
    return sample_events(
        mm, horizon, key, [&](std::size_t j) { return phi_max[j] / epsilon; },
        [&](double t, std::size_t j) {
            // accept iff the auxiliary coordinate r ~ U[0, phi_max] falls below phi(t, v_j)
            return thinning.uniform() * phi_max[j] < phi.at(t, j);
        });
}

std::vector<JumpEvent> sample_controlled_prm(const IntensityGrid& phi, double epsilon, const MarkMeasure& mm,
                                             double horizon, std::uint64_t seed) {
    return sample_controlled_prm(phi, epsilon, mm, horizon, StreamKey{seed, 0, Purpose::jumps});
}

// ------------------------------------------------------------------ binary IO

namespace {

constexpr char kMagic[8] = {'L', 'D', 'P', 'N', 'O', 'I', 'S', 'E'};

void put_u64(std::ostream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

std::uint64_t get_u64(std::istream& in) {
    unsigned char b[8];
    if (!in.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("read_noise_bundle: truncated input");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

}  // namespace

void write_noise_bundle(std::ostream& out, const NoiseBundle& bundle) {
    if (bundle.grid.size() != bundle.brownian.steps() + 1 && !(bundle.grid.empty() && bundle.brownian.steps() == 0))
        throw std::invalid_argument("write_noise_bundle: grid and increment table disagree");
    out.write(kMagic, sizeof(kMagic));
    put_u64(out, bundle.seed);
    put_u64(out, bundle.brownian.modes());
    put_u64(out, bundle.grid.size());
    for (double t : bundle.grid) put_f64(out, t);
    for (double v : bundle.brownian.data()) put_f64(out, v);
    put_u64(out, bundle.jumps.size());
    for (const auto& e : bundle.jumps) {
        put_f64(out, e.time);
        put_u64(out, e.mark);
    }
    if (!out) throw std::runtime_error("write_noise_bundle: write failed");
}

NoiseBundle read_noise_bundle(std::istream& in) {
    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw std::runtime_error("read_noise_bundle: bad magic");
    NoiseBundle b;
    b.seed = get_u64(in);
    const std::uint64_t modes = get_u64(in);
    const std::uint64_t nodes = get_u64(in);
    if (nodes > (1ULL << 32) || modes > (1ULL << 20)) throw std::runtime_error("read_noise_bundle: implausible header");
    b.grid.resize(nodes);
    for (auto& t : b.grid) t = get_f64(in);
    const std::size_t steps = nodes > 0 ? nodes - 1 : 0;
    b.brownian = BrownianTable(modes, steps);
    for (std::size_t m = 0; m < steps; ++m)
        for (std::size_t k = 0; k < modes; ++k) b.brownian(m, k) = get_f64(in);
    const std::uint64_t events = get_u64(in);
    if (events > (1ULL << 32)) throw std::runtime_error("read_noise_bundle: implausible event count");
    b.jumps.resize(events);
    for (auto& e : b.jumps) {
        e.time = get_f64(in);
        e.mark = get_u64(in);
    }
    return b;
}

}  // namespace ldplab
