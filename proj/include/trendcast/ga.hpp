#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "trendcast/errors.hpp"

namespace trendcast {

using Rng = std::mt19937_64;

struct GeneRange {
    double lo = 0.0;
    double hi = 1.0;
};

/// Search box, one closed interval per gene.
struct GeneBounds {
    std::vector<GeneRange> genes;

    void validate() const {
        if (genes.empty()) throw ParameterError("GeneBounds: no genes");
        for (const auto& g : genes)
            if (!(g.lo <= g.hi))
                throw ParameterError("GeneBounds: lo > hi (" + std::to_string(g.lo) + " > " +
                                     std::to_string(g.hi) + ")");
    }

    /// Bounded box for (C, epsilon, gamma): C in [0.01, 1], eps in [0.1, 1],
    /// gamma in [0, gamma_upper] with gamma_upper derived from the training
    /// features at run time.
    static GeneBounds iga_box(double gamma_upper) {
        return {{{0.01, 1.0}, {0.1, 1.0}, {0.0, gamma_upper}}};
    }

    /// Baseline box for (C, epsilon) with gamma pinned outside the genome:
    /// the wider C range the unrestricted baseline exhibits.
    static GeneBounds oga_box() { return {{{0.001, 100.0}, {0.1, 1.0}}}; }
};

struct Chromosome {
    std::vector<double> genes;
    std::optional<double> fitness; // lower is better
};

struct GaConfig {
    std::size_t population_size = 50;
    int generations = 30;
    std::size_t tournament_size = 3;
    double crossover_rate = 0.9;
    double mutation_rate = 0.2;  // per gene
    double mutation_sigma = 0.1; // fraction of gene range
    std::size_t elitism = 1;
    std::uint64_t seed = 0;
    // Threads for fitness evaluation within a generation; results are
    // reduced in index order so the outcome is independent of this value.
    std::size_t eval_threads = 1;

    void validate() const {
        if (population_size < 2) throw ParameterError("GaConfig: population_size must be >= 2");
        if (generations < 1) throw ParameterError("GaConfig: generations must be >= 1");
        if (tournament_size < 1 || tournament_size > population_size)
            throw ParameterError("GaConfig: tournament_size out of range");
        if (elitism >= population_size)
            throw ParameterError("GaConfig: elitism must be < population_size");
        for (const double rate : {crossover_rate, mutation_rate})
            if (!(rate >= 0.0 && rate <= 1.0)) throw ParameterError("GaConfig: rate not in [0, 1]");
        if (!(mutation_sigma >= 0.0)) throw ParameterError("GaConfig: mutation_sigma < 0");
    }
};

inline constexpr double kBlendAlpha = 0.25;

inline std::vector<Chromosome> init_population(const GeneBounds& bounds, const GaConfig& cfg,
                                               Rng& rng) {
    bounds.validate();
    cfg.validate();
    std::vector<Chromosome> pop(cfg.population_size);
    for (auto& c : pop) {
        c.genes.reserve(bounds.genes.size());
        for (const auto& g : bounds.genes) {
            std::uniform_real_distribution<double> dist(g.lo, g.hi);
            c.genes.push_back(dist(rng));
        }
    }
    return pop;
}

/// k draws with replacement; minimal fitness wins, ties broken by lowest index.
inline const Chromosome& tournament_select(const std::vector<Chromosome>& pop, std::size_t k,
                                           Rng& rng) {
    if (pop.empty() || k < 1 || k > pop.size())
        throw ParameterError("tournament_select: need 1 <= k <= |pop|");
    std::uniform_int_distribution<std::size_t> pick(0, pop.size() - 1);
    std::size_t best = static_cast<std::size_t>(-1);
    for (std::size_t draw = 0; draw < k; ++draw) {
        const std::size_t idx = pick(rng);
        if (!pop[idx].fitness)
            throw StateError("tournament_select: chromosome " + std::to_string(idx) +
                             " not evaluated");
        if (best == static_cast<std::size_t>(-1) || *pop[idx].fitness < *pop[best].fitness ||
            (*pop[idx].fitness == *pop[best].fitness && idx < best))
            best = idx;
    }
    return pop[best];
}

/// BLX-alpha: per gene, child = u*a + (1-u)*b with u ~ U[-alpha, 1+alpha],
/// clamped to the box.
inline Chromosome blend_crossover(const Chromosome& a, const Chromosome& b,
                                  const GeneBounds& bounds, Rng& rng) {
    Chromosome child;
    child.genes.resize(bounds.genes.size());
    std::uniform_real_distribution<double> mix(-kBlendAlpha, 1.0 + kBlendAlpha);
    for (std::size_t g = 0; g < bounds.genes.size(); ++g) {
        const double u = mix(rng);
        const double value = u * a.genes[g] + (1.0 - u) * b.genes[g];
        child.genes[g] = std::clamp(value, bounds.genes[g].lo, bounds.genes[g].hi);
    }
    return child;
}

/// Gaussian per-gene perturbation; always clears fitness.
inline Chromosome mutate(const Chromosome& c, const GeneBounds& bounds, const GaConfig& cfg,
                         Rng& rng) {
    Chromosome out{c.genes, std::nullopt};
    std::uniform_real_distribution<double> gate(0.0, 1.0);
    for (std::size_t g = 0; g < out.genes.size(); ++g) {
        if (gate(rng) >= cfg.mutation_rate) continue;
        const double range = bounds.genes[g].hi - bounds.genes[g].lo;
        std::normal_distribution<double> noise(0.0, cfg.mutation_sigma * range);
        out.genes[g] =
            std::clamp(out.genes[g] + noise(rng), bounds.genes[g].lo, bounds.genes[g].hi);
    }
    return out;
}

using FitnessFn = std::function<double(const Chromosome&)>;

struct GaResult {
    Chromosome best;             // best-ever over the whole run
    std::vector<double> history; // per-generation best fitness of the population
};

namespace detail {

inline std::string genes_to_string(const std::vector<double>& genes) {
    std::string s = "(";
    for (std::size_t i = 0; i < genes.size(); ++i) {
        if (i) s += ", ";
        s += std::to_string(genes[i]);
    }
    return s + ")";
}

// Evaluates every chromosome lacking a fitness, consulting and filling the
// run-level cache. Deterministic for any thread count: jobs are deduplicated
// and results assigned in index order.
class GaEvaluator {
public:
    explicit GaEvaluator(const FitnessFn& fn, std::size_t threads)
        : fn_(fn), threads_(std::max<std::size_t>(threads, 1)) {}

    void evaluate(std::vector<Chromosome>& pop) {
        std::vector<std::size_t> pending;
        for (std::size_t i = 0; i < pop.size(); ++i) {
            if (pop[i].fitness) continue;
            if (const auto it = cache_.find(pop[i].genes); it != cache_.end())
                pop[i].fitness = it->second;
            else
                pending.push_back(i);
        }
        if (pending.empty()) return;

        // One job per distinct gene vector.
        std::vector<std::size_t> jobs;
        std::map<std::vector<double>, std::size_t> job_of;
        for (const std::size_t i : pending)
            if (job_of.emplace(pop[i].genes, jobs.size()).second) jobs.push_back(i);

        std::vector<double> results(jobs.size());
        std::vector<std::exception_ptr> errors(jobs.size());
        auto run_job = [&](std::size_t j) {
            try {
                results[j] = fn_(pop[jobs[j]]);
            } catch (...) {
                errors[j] = std::current_exception();
            }
        };
        if (threads_ == 1 || jobs.size() == 1) {
            for (std::size_t j = 0; j < jobs.size(); ++j) run_job(j);
        } else {
            std::vector<std::thread> workers;
            const std::size_t nw = std::min(threads_, jobs.size());
            std::atomic<std::size_t> next{0};
            workers.reserve(nw);
            for (std::size_t w = 0; w < nw; ++w)
                workers.emplace_back([&] {
                    for (std::size_t j = next.fetch_add(1); j < jobs.size();
                         j = next.fetch_add(1))
                        run_job(j);
                });
            for (auto& t : workers) t.join();
        }
        for (std::size_t j = 0; j < jobs.size(); ++j)
            if (errors[j]) std::rethrow_exception(errors[j]);
        for (std::size_t j = 0; j < jobs.size(); ++j) {
            const auto& genes = pop[jobs[j]].genes;
            if (!std::isfinite(results[j]))
                throw FitnessError("fitness not finite for chromosome " +
                                   genes_to_string(genes));
            cache_.emplace(genes, results[j]);
        }
        for (const std::size_t i : pending) pop[i].fitness = cache_.at(pop[i].genes);
    }

private:
    const FitnessFn& fn_;
    std::size_t threads_;
    std::map<std::vector<double>, double> cache_;
};

inline std::size_t best_index(const std::vector<Chromosome>& pop) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i)
        if (*pop[i].fitness < *pop[best].fitness) best = i;
    return best;
}

} // namespace detail

/// Elitist generational GA over the box. Deterministic given (seed, bounds,
/// cfg) and a deterministic fitness function. `progress`, when given, receives
/// one tab-separated line per generation: generation, best fitness, best genes.
inline GaResult run_ga(const GeneBounds& bounds, const GaConfig& cfg, const FitnessFn& fitness,
                       std::ostream* progress = nullptr) {
    bounds.validate();
    cfg.validate();
    Rng rng(cfg.seed);
    detail::GaEvaluator evaluator(fitness, cfg.eval_threads);

    std::vector<Chromosome> pop = init_population(bounds, cfg, rng);
    GaResult result;
    auto record = [&](int gen) {
        const std::size_t bi = detail::best_index(pop);
        result.history.push_back(*pop[bi].fitness);
        if (!result.best.fitness || *pop[bi].fitness < *result.best.fitness) result.best = pop[bi];
        if (progress) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%d\t%.12g", gen, *pop[bi].fitness);
            *progress << buf;
            for (const double g : pop[bi].genes) {
                std::snprintf(buf, sizeof buf, "\t%.12g", g);
                *progress << buf;
            }
            *progress << '\n';
        }
    };

    evaluator.evaluate(pop);
    record(0);
    for (int gen = 1; gen < cfg.generations; ++gen) {
        std::vector<Chromosome> next;
        next.reserve(cfg.population_size);
        // Elites carry over verbatim, fitness included.
        std::vector<std::size_t> order(pop.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return *pop[a].fitness < *pop[b].fitness;
        });
        for (std::size_t e = 0; e < cfg.elitism; ++e) next.push_back(pop[order[e]]);

        std::uniform_real_distribution<double> coin(0.0, 1.0);
        while (next.size() < cfg.population_size) {
            const Chromosome& p1 = tournament_select(pop, cfg.tournament_size, rng);
            const Chromosome& p2 = tournament_select(pop, cfg.tournament_size, rng);
            Chromosome child =
                coin(rng) < cfg.crossover_rate ? blend_crossover(p1, p2, bounds, rng) : p1;
            next.push_back(mutate(child, bounds, cfg, rng));
        }
        pop = std::move(next);
        evaluator.evaluate(pop);
        record(gen);
    }
    return result;
}

} // namespace trendcast
