#include "bbm/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace bbm {

ModelParams::ModelParams(int dim, double rate, OffspringLaw l,
                         std::vector<double> th)
    : d(dim), beta(rate), law(std::move(l)), theta(std::move(th)) {
    if (d < 1) throw std::invalid_argument("ModelParams: d < 1");
    if (beta <= 0.0) throw std::invalid_argument("ModelParams: beta <= 0");
    if (int(theta.size()) != d)
        throw std::invalid_argument("ModelParams: theta dimension mismatch");
}

double ModelParams::theta_norm2() const {
    double s = 0.0;
    for (double t : theta) s += t * t;
    return s;
}

double ModelParams::discount(double t) const {
    return std::exp(-(beta * (mu() - 1.0) + 0.5 * theta_norm2()) * t);
}

bool ModelParams::theta_admissible() const {
    return theta_norm2() < 2.0 * beta * (mu() - 1.0);
}

double estimate_population(const ModelParams& params, double t) {
    if (t < 0.0) throw std::invalid_argument("estimate_population: t < 0");
    return std::exp(params.beta * (params.mu() - 1.0) * t);
}

namespace {

constexpr int MAX_DIM = 8;

// One alive particle carried across a slab boundary. death_time is absolute;
// the stream has already produced the draws up to the particle's current
// position, so resuming is just continuing the stream.
struct Alive {
    std::uint64_t id;
    double death_time;
    RandomStream rng;
    double pos[MAX_DIM];
};

struct SlabOutput {
    std::vector<Alive> next;
};

// Advance one particle (and everything it spawns) from `from` to slab end
// `until`. Survivors at `until` are recorded; the explicit stack keeps the
// recursion iterative.
void advance_subtree(const ModelParams& params, std::uint64_t seed, Alive start,
                     double from, double until, SlabOutput& out,
                     std::atomic<long long>& budget) {
    const int d = params.d;
    std::vector<std::pair<Alive, double>> stack;  // (particle, current time)
    stack.emplace_back(start, from);
    while (!stack.empty()) {
        auto [p, now] = stack.back();
        stack.pop_back();
        while (p.death_time <= until) {
            // move to the death time, branch there
            const double dt = p.death_time - now;
            const double sd = std::sqrt(dt);
            for (int j = 0; j < d; ++j) p.pos[j] += sd * p.rng.gaussian();
            now = p.death_time;
            const int count = params.law.sample(p.rng);
            if (budget.fetch_sub(count - 1, std::memory_order_relaxed) <
                static_cast<long long>(count - 1))
                return;  // cap tripped; caller checks the flag
            if (count == 0) goto dead;
            for (int i = 1; i < count; ++i) {
                Alive c;
                c.id = child_particle_id(p.id, unsigned(i));
                c.rng = RandomStream::for_particle(seed, c.id);
                c.death_time = now + c.rng.exponential(params.beta);
                std::copy(p.pos, p.pos + d, c.pos);
                stack.emplace_back(c, now);
            }
            {
                // continue in place as child 0
                const std::uint64_t cid = child_particle_id(p.id, 0);
                p.id = cid;
                p.rng = RandomStream::for_particle(seed, cid);
                p.death_time = now + p.rng.exponential(params.beta);
            }
        }
        // survives the slab: record at `until`
        {
            const double dt = until - now;
            const double sd = std::sqrt(dt);
            for (int j = 0; j < d; ++j) p.pos[j] += sd * p.rng.gaussian();
            out.next.push_back(p);
        }
    dead:;
    }
}

}  // namespace

Trajectory simulate(const ModelParams& params, std::span<const double> schedule,
                    std::uint64_t seed, int workers, std::size_t cap) {
    if (schedule.empty())
        throw std::invalid_argument("simulate: empty schedule");
    if (params.d > MAX_DIM)
        throw std::invalid_argument("simulate: dimension too large");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (schedule[i] <= 0.0 || (i > 0 && schedule[i] <= schedule[i - 1]))
            throw std::invalid_argument(
                "simulate: schedule must be strictly increasing and positive");
    }
    if (workers < 1) workers = 1;

    Trajectory traj;
    traj.seed = seed;

    std::vector<Alive> alive(1);
    alive[0].id = root_particle_id();
    alive[0].rng = RandomStream::for_particle(seed, alive[0].id);
    alive[0].death_time = alive[0].rng.exponential(params.beta);
    std::fill(alive[0].pos, alive[0].pos + MAX_DIM, 0.0);

    double slab_start = 0.0;
    for (double slab_end : schedule) {
        std::atomic<long long> budget{static_cast<long long>(cap) -
                                      static_cast<long long>(alive.size())};
        if (budget.load() < 0)
            throw PopulationCapExceeded(cap, std::move(traj));

        // fixed-size chunks so the decomposition is worker-count independent
        constexpr std::size_t CHUNK = 256;
        const std::size_t nchunks = (alive.size() + CHUNK - 1) / CHUNK;
        std::vector<SlabOutput> outs(nchunks);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(workers)
#endif
        for (std::size_t c = 0; c < nchunks; ++c) {
            const std::size_t lo = c * CHUNK;
            const std::size_t hi = std::min(lo + CHUNK, alive.size());
            for (std::size_t i = lo; i < hi; ++i) {
                if (budget.load(std::memory_order_relaxed) < 0) break;
                advance_subtree(params, seed, alive[i], slab_start, slab_end,
                                outs[c], budget);
            }
        }

        if (budget.load() < 0)
            throw PopulationCapExceeded(cap, std::move(traj));

        std::size_t total = 0;
        for (const auto& o : outs) total += o.next.size();

        Snapshot snap;
        snap.time = slab_end;
        snap.ids.reserve(total);
        snap.coords.reserve(total * std::size_t(params.d));

        std::vector<Alive> merged;
        merged.reserve(total);
        for (auto& o : outs)
            merged.insert(merged.end(), o.next.begin(), o.next.end());
        // canonical order: sort by genealogy id
        std::sort(merged.begin(), merged.end(),
                  [](const Alive& a, const Alive& b) { return a.id < b.id; });
        for (const auto& p : merged) {
            snap.ids.push_back(p.id);
            snap.coords.insert(snap.coords.end(), p.pos, p.pos + params.d);
        }
        traj.snapshots.push_back(std::move(snap));
        alive = std::move(merged);
        slab_start = slab_end;
    }
    return traj;
}

}  // namespace bbm
