#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "gpdr/dataset.hpp"
#include "gpdr/fitness.hpp"
#include "gpdr/gp/generate.hpp"
#include "gpdr/gp/infix.hpp"
#include "gpdr/variation.hpp"

namespace gpdr {

struct GpRunConfig {
    std::size_t population = 1000;
    std::size_t generations = 100;
    VariationConfig variation{};
    int depth_min = 2;
    int depth_max = 7;
    std::size_t batch_size = 100;
    std::uint64_t seed = 0;
    std::size_t threads = 1;  // genome scoring within a generation

    void validate() const {
        if (population < 2) throw InvalidInput("GpRunConfig: population must be >= 2");
        if (generations < 1) throw InvalidInput("GpRunConfig: generations must be >= 1");
        if (batch_size < 3) throw InvalidInput("GpRunConfig: batch size must be >= 3");
        if (depth_min < 0 || depth_min > depth_max || depth_max > variation.max_depth)
            throw InvalidInput("GpRunConfig: need 0 <= depth_min <= depth_max <= max depth");
        variation.validate(population);
    }
};

template <class G>
struct RunResult {
    G best;
    double best_fitness = kWorstFitness;  // on the full DR-train split
    std::vector<double> history;          // best-of-batch fitness per generation
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::string> expressions;          // one per latent dimension
    std::vector<std::string> decoder_expressions;  // autoencoder genomes only
    VariationStats variation{};
};

/// Called once per generation after scoring, with the scored population.
template <class G>
using GenerationObserver = std::function<void(std::size_t generation, const std::vector<G>& population,
                                              std::span<const double> fitness)>;

namespace detail {

template <class G>
std::vector<G> initial_population(const FitnessProblem& problem, std::size_t k, const GpRunConfig& cfg, Rng& rng) {
    const std::size_t p = problem.inputs.cols();
    const auto& ps = cfg.variation.primitives;
    if constexpr (std::is_same_v<G, gp::MultiTree>)
        return gp::ramped_half_and_half(cfg.population, p, k, cfg.depth_min, cfg.depth_max, ps, rng);
    else
        return gp::ramped_half_and_half_autoencoder(cfg.population, p, k, problem.target.cols(), cfg.depth_min,
                                                    cfg.depth_max, ps, rng);
}

template <class G>
std::vector<double> score_all(const std::vector<G>& pop, const BatchView& batch, std::size_t threads) {
    std::vector<double> f(pop.size());
    parallel_for(pop.size(), threads, [&](std::size_t i) { f[i] = score(pop[i], batch); });
    return f;
}

inline std::vector<std::string> infix_all(const gp::MultiTree& mt, int precision = -1) {
    std::vector<std::string> out;
    for (const auto& t : mt.trees) out.push_back(gp::to_infix(t, {}, precision));
    return out;
}

}  // namespace detail

/// Generational GP on the problem's rows. Each generation draws a fresh batch,
/// scores the population on it and breeds the next one. The returned genome is the
/// full-split minimum over the final population and every generation's batch-best.
template <class G>
RunResult<G> evolve(const FitnessProblem& problem, std::size_t k, const GpRunConfig& cfg,
                    const GenerationObserver<G>& observer = {}) {
    static_assert(std::is_same_v<G, gp::MultiTree> || std::is_same_v<G, gp::AutoencoderMultiTree>);
    cfg.validate();
    if (k == 0) throw InvalidInput("evolve: k must be positive");
    const auto start = std::chrono::steady_clock::now();

    RunResult<G> result;
    result.seed = cfg.seed;
    Rng rng(derive_seed({cfg.seed, 1}));
    BatchSampler sampler(cfg.batch_size, derive_seed({cfg.seed, 2}));

    std::vector<G> pop = detail::initial_population<G>(problem, k, cfg, rng);
    std::vector<G> archive;
    for (std::size_t gen = 0; gen < cfg.generations; ++gen) {
        const BatchView batch = make_batch(problem, sampler.next(problem.size()));
        const std::vector<double> fitness = detail::score_all(pop, batch, cfg.threads);
        if (observer) observer(gen, pop, fitness);
        const auto best = static_cast<std::size_t>(std::min_element(fitness.begin(), fitness.end()) - fitness.begin());
        result.history.push_back(fitness[best]);
        if (std::find(archive.begin(), archive.end(), pop[best]) == archive.end()) archive.push_back(pop[best]);
        if (gen + 1 < cfg.generations) pop = next_generation(pop, fitness, cfg.variation, rng, &result.variation);
    }

    std::vector<G> candidates = std::move(archive);
    for (auto& g : pop)
        if (std::find(candidates.begin(), candidates.end(), g) == candidates.end()) candidates.push_back(std::move(g));
    const BatchView full = full_batch(problem);
    const std::vector<double> final_fitness = detail::score_all(candidates, full, cfg.threads);
    const auto win = static_cast<std::size_t>(std::min_element(final_fitness.begin(), final_fitness.end()) -
                                              final_fitness.begin());
    result.best = candidates[win];
    result.best_fitness = final_fitness[win];

    if constexpr (std::is_same_v<G, gp::MultiTree>) {
        result.expressions = detail::infix_all(result.best);
    } else {
        result.expressions = detail::infix_all(result.best.encoder);
        result.decoder_expressions = detail::infix_all(result.best.decoder);
    }
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

template <class G>
const std::vector<double>& fitness_curve(const RunResult<G>& r) {
    return r.history;
}

}  // namespace gpdr
