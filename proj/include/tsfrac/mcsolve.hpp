#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "tsfrac/kernel.hpp"
#include "tsfrac/problem.hpp"

namespace tsfrac {

/// Deterministic random stream: xoshiro256** seeded through splitmix64.
/// Hand-rolled so estimates are bit-identical across standard libraries.
namespace rng_detail {

inline std::uint64_t splitmix64(std::uint64_t& s) {
    std::uint64_t z = (s += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

} // namespace rng_detail

class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& w : state_) w = rng_detail::splitmix64(s);
    }

    /// Stream for path `index` derived from a base seed; distinct indices give
    /// statistically independent streams.
    static RandomStream for_path(std::uint64_t base_seed, std::uint64_t index) {
        std::uint64_t s = base_seed;
        const std::uint64_t k = rng_detail::splitmix64(s);
        return RandomStream(k ^ (index * 0x9e3779b97f4a7c15ULL + 0x853c49e6748fea9bULL));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on (0,1), never exactly 0.
    double uniform() {
        const double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        cached_ = r * std::sin(2.0 * M_PI * u2);
        has_cached_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4]{};
    double cached_ = 0.0;
    bool has_cached_ = false;
};

struct PathConfig {
    double eps = 1e-4;   // small-jump cutoff
    double dt = 1e-3;    // Euler step for the drift-diffusion part
    double t_max = 50.0; // censoring horizon
    std::uint64_t seed = 1;
    std::size_t n_paths = 10000;
    unsigned n_threads = 1; // estimates are bit-identical for any thread count

    void validate() const {
        if (!(eps > 0.0)) throw ConfigError("path config: eps must be positive");
        if (!(dt > 0.0)) throw ConfigError("path config: dt must be positive");
        if (!(t_max > 0.0)) throw ConfigError("path config: t_max must be positive");
        if (n_paths == 0) throw ConfigError("path config: n_paths must be positive");
    }
};

enum class ExitSide { Lower, Upper, Censored };

struct ExitSample {
    double tau = 0.0;    // exit time, or t_max when censored
    ExitSide side = ExitSide::Censored;
    double x_exit = 0.0; // position at exit; may overshoot past a or b
    double F = 0.0;      // accumulated int_0^tau e^{-lambda t} g(X_t) dt
    double discount = 1.0; // e^{-lambda tau}
};

struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    std::size_t n = 0;
    double censored_fraction = 0.0;
    std::uint64_t seed = 0;
    double discard_bias_bound = 0.0; // truncated_first_moment(eps) x mean path length
    std::string warning;
};

namespace mc_detail {

/// Order-independent pairwise reduction of f(samples[i]) over [lo, hi).
template <class F>
double pairwise_sum(const std::vector<ExitSample>& s, std::size_t lo, std::size_t hi, F&& f) {
    if (hi - lo <= 8) {
        double acc = 0.0;
        for (std::size_t i = lo; i < hi; ++i) acc += f(s[i]);
        return acc;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(s, lo, mid, f) + pairwise_sum(s, mid, hi, f);
}

/// Jump-magnitude sampler: draws |Y| > eps from the kernel's tail, frozen at
/// the pre-jump state. Stable-type kernels invert the tail in closed form
/// (y = eps u^{-1/beta}); other variants use a cached log-grid inversion table
/// keyed by a coarse x-cell.
class MagnitudeSampler {
  public:
    MagnitudeSampler(const KernelSpec& kernel, double a, double b, double eps)
        : k_(&kernel), eps_(eps), cell_width_((b - a) / 64.0), a_(a) {}

    double sample(double x, RandomStream& rng) const {
        const KernelVariant v = k_->variant();
        if (v == KernelVariant::ClassicalStable || v == KernelVariant::VariableOrder) {
            const double beta = k_->order_at(x);
            return eps_ * std::pow(rng.uniform(), -1.0 / beta);
        }
        const double u = rng.uniform();
        std::lock_guard<std::mutex> lock(cache_mutex_);
        const Table& t = table_for(x);
        // target tail value, uniform in (0, T(eps))
        const double target = u * t.tails.front();
        auto it = std::lower_bound(t.tails.begin(), t.tails.end(), target,
                                   [](double tail, double tgt) { return tail > tgt; });
        if (it == t.tails.begin()) return t.ys.front();
        if (it == t.tails.end()) return t.ys.back();
        const std::size_t j = static_cast<std::size_t>(it - t.tails.begin());
        const double t0 = t.tails[j - 1], t1 = t.tails[j];
        const double w = t0 > t1 ? (t0 - target) / (t0 - t1) : 0.0;
        // interpolate in log magnitude
        return std::exp((1.0 - w) * std::log(t.ys[j - 1]) + w * std::log(t.ys[j]));
    }

  private:
    struct Table {
        std::vector<double> ys;
        std::vector<double> tails; // decreasing
    };

    const Table& table_for(double x) const {
        // x-independent kernels share one table
        const long long cell =
            k_->x_dependent() ? static_cast<long long>(std::floor((x - a_) / cell_width_)) : 0;
        auto it = cache_.find(cell);
        if (it != cache_.end()) return it->second;
        const double xc = a_ + (static_cast<double>(cell) + 0.5) * cell_width_;
        Table t;
        const double t_eps = k_->tail_mass(xc, eps_);
        double y = eps_;
        double tail = t_eps;
        const double stop = std::max(t_eps * 1e-9, 1e-300);
        while (tail > stop && t.ys.size() < 4096) {
            t.ys.push_back(y);
            t.tails.push_back(tail);
            y *= 1.05;
            tail = k_->tail_mass(xc, y);
        }
        t.ys.push_back(y);
        t.tails.push_back(tail);
        return cache_.emplace(cell, std::move(t)).first->second;
    }

    const KernelSpec* k_;
    double eps_;
    double cell_width_;
    double a_;
    mutable std::mutex cache_mutex_;
    mutable std::unordered_map<long long, Table> cache_;
};

} // namespace mc_detail

/// Simulates first-exit samples of the free jump-diffusion generated by the
/// two-sided operator: compound-Poisson jumps above the cutoff eps (small
/// jumps discarded uncompensated), Euler steps of dt for the drift-diffusion
/// part with infinitesimal variance 2 alpha, exit checked after every substep
/// and jump, censoring at t_max. gamma and alpha are extended by zero beyond
/// [a,b]; the jump kernel is frozen at the pre-jump state.
class PathSimulator {
  public:
    PathSimulator(const ProblemSpec& spec, const PathConfig& cfg)
        : spec_(spec), cfg_(cfg),
          sampler_plus_(spec_.kernel.plus, spec_.a, spec_.b, cfg.eps),
          sampler_minus_(spec_.kernel.minus, spec_.a, spec_.b, cfg.eps),
          pure_jump_(spec_.coeffs.pure_jump()) {
        cfg.validate();
        spec_.validate();
        const double xm = 0.5 * (spec_.a + spec_.b);
        // x-independent kernels admit a fixed jump intensity
        tails_cached_ = !spec_.kernel.plus.x_dependent() && !spec_.kernel.minus.x_dependent();
        if (tails_cached_) {
            tail_p_eps_ = spec_.kernel.plus.tail_mass(xm, cfg.eps);
            tail_m_eps_ = spec_.kernel.minus.tail_mass(xm, cfg.eps);
        }
        const double activity = tails_cached_ ? tail_p_eps_ + tail_m_eps_
                                              : spec_.kernel.plus.tail_mass(xm, cfg.eps) +
                                                    spec_.kernel.minus.tail_mass(xm, cfg.eps);
        if (pure_jump_ && !(activity > 0.0))
            throw ConfigError("path simulator: degenerate dynamics (no jumps, no drift-diffusion)");
    }

    /// One path started at x0, driven by `rng`, accruing the source `g`
    /// (defaults to the problem's g).
    ExitSample sample_path(double x0, RandomStream& rng,
                           const std::function<double(double)>* g_override = nullptr) const {
        if (!(x0 > spec_.a && x0 < spec_.b))
            throw ConfigError("sample_path: start point must lie in (a,b)");
        const double lambda = spec_.lambda;
        auto g_at = [&](double x) {
            if (g_override) return (*g_override)(x);
            return spec_.g_at(x);
        };
        double x = x0, t = 0.0, F = 0.0;
        ExitSample out;
        while (t < cfg_.t_max) {
            const double tail_p =
                tails_cached_ ? tail_p_eps_ : spec_.kernel.plus.tail_mass(x, cfg_.eps);
            const double tail_m =
                tails_cached_ ? tail_m_eps_ : spec_.kernel.minus.tail_mass(x, cfg_.eps);
            const double intensity = tail_p + tail_m;
            double t_jump = intensity > 0.0 ? rng.exponential(intensity)
                                            : std::numeric_limits<double>::infinity();
            double sojourn = std::min(t_jump, cfg_.t_max - t);
            const bool jumps_now = t_jump <= cfg_.t_max - t;

            if (pure_jump_) {
                F += sojourn_integral(g_at(x), lambda, t, sojourn);
                t += sojourn;
            } else {
                // Euler substeps across the sojourn, exit checked after each
                double remaining = sojourn;
                bool exited = false;
                while (remaining > 0.0) {
                    const double h = std::min(cfg_.dt, remaining);
                    F += std::exp(-lambda * t) * g_at(x) * h;
                    double dx = spec_.coeffs.gamma_at(x) * h;
                    const double alp = spec_.coeffs.alpha_at(x);
                    if (alp > 0.0) dx += std::sqrt(2.0 * alp * h) * rng.normal();
                    x += dx;
                    t += h;
                    remaining -= h;
                    if (x <= spec_.a || x >= spec_.b) {
                        exited = true;
                        break;
                    }
                }
                if (exited) break;
            }
            if (!jumps_now) break; // censored at t_max
            // jump: side chosen by relative tail mass, magnitude from the tail
            if (rng.uniform() * intensity < tail_p)
                x -= sampler_plus_.sample(x, rng); // toward the lower terminal
            else
                x += sampler_minus_.sample(x, rng);
            if (x <= spec_.a || x >= spec_.b) break;
        }
        out.tau = std::min(t, cfg_.t_max);
        out.x_exit = x;
        out.F = F;
        if (x <= spec_.a) out.side = ExitSide::Lower;
        else if (x >= spec_.b) out.side = ExitSide::Upper;
        else out.side = ExitSide::Censored;
        out.discount = std::exp(-lambda * out.tau);
        return out;
    }

    /// Full ensemble with per-path seed derivation; bit-identical for any
    /// thread count since path i always uses stream (seed, i).
    std::vector<ExitSample> simulate_ensemble(
        double x0, const std::function<double(double)>* g_override = nullptr) const {
        std::vector<ExitSample> samples(cfg_.n_paths);
        const unsigned workers = std::max(1u, cfg_.n_threads);
        auto run_range = [&](std::size_t lo, std::size_t hi) {
            for (std::size_t i = lo; i < hi; ++i) {
                RandomStream rng = RandomStream::for_path(cfg_.seed, i);
                samples[i] = sample_path(x0, rng, g_override);
            }
        };
        if (workers == 1 || cfg_.n_paths < 2 * workers) {
            run_range(0, cfg_.n_paths);
        } else {
            std::vector<std::thread> pool;
            const std::size_t chunk = (cfg_.n_paths + workers - 1) / workers;
            for (unsigned w = 0; w < workers; ++w) {
                const std::size_t lo = static_cast<std::size_t>(w) * chunk;
                const std::size_t hi = std::min(cfg_.n_paths, lo + chunk);
                if (lo >= hi) break;
                pool.emplace_back(run_range, lo, hi);
            }
            for (auto& th : pool) th.join();
        }
        return samples;
    }

    /// The jump kernel's interrupted variant lands overshooting jumps on the
    /// nearest boundary point; diagnostic only — exit statistics agree.
    static ExitSample interrupted(ExitSample s, double a, double b) {
        if (s.side == ExitSide::Lower) s.x_exit = a;
        else if (s.side == ExitSide::Upper) s.x_exit = b;
        return s;
    }

    /// Upper bound on the discard bias of an ensemble: sup-grid truncated
    /// first moment at eps times the mean path length.
    double discard_bias_bound(const std::vector<ExitSample>& samples) const {
        double tfm = 0.0;
        for (int i = 1; i < 16; ++i) {
            const double x = spec_.a + (spec_.b - spec_.a) * i / 16.0;
            tfm = std::max(tfm, truncated_first_moment(spec_.kernel, x, cfg_.eps));
        }
        const double mean_tau =
            mc_detail::pairwise_sum(samples, 0, samples.size(), [](const ExitSample& s) { return s.tau; }) /
            static_cast<double>(samples.size());
        return tfm * mean_tau;
    }

    const ProblemSpec& spec() const { return spec_; }
    const PathConfig& config() const { return cfg_; }

  private:
    static double sojourn_integral(double g, double lambda, double t0, double s) {
        if (g == 0.0 || s <= 0.0) return 0.0;
        if (lambda == 0.0) return g * s;
        return g * std::exp(-lambda * t0) * (-std::expm1(-lambda * s)) / lambda;
    }

    ProblemSpec spec_;
    PathConfig cfg_;
    mc_detail::MagnitudeSampler sampler_plus_;
    mc_detail::MagnitudeSampler sampler_minus_;
    bool pure_jump_;
    bool tails_cached_ = false;
    double tail_p_eps_ = 0.0;
    double tail_m_eps_ = 0.0;
};

namespace mc_detail {

template <class F>
Estimate reduce(const std::vector<ExitSample>& samples, const PathConfig& cfg, F&& per_path,
                double bias_bound) {
    const std::size_t n = samples.size();
    Estimate e;
    e.n = n;
    e.seed = cfg.seed;
    e.discard_bias_bound = bias_bound;
    e.mean = pairwise_sum(samples, 0, n, per_path) / static_cast<double>(n);
    const double mu = e.mean;
    const double ss = pairwise_sum(samples, 0, n, [&](const ExitSample& s) {
        const double d = per_path(s) - mu;
        return d * d;
    });
    if (n > 1) e.stderr_ = std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n));
    const double censored = pairwise_sum(samples, 0, n, [](const ExitSample& s) {
        return s.side == ExitSide::Censored ? 1.0 : 0.0;
    });
    e.censored_fraction = censored / static_cast<double>(n);
    if (e.censored_fraction > 0.05)
        e.warning = "censored fraction exceeds 5%: raise t_max";
    return e;
}

} // namespace mc_detail

/// Stochastic representation of the RL-flavor solution with zero boundary
/// data: u(x) = E[int_0^tau e^{-lambda t} g(X_t) dt].
inline Estimate estimate_rl_solution(const ProblemSpec& spec, double x, const PathConfig& cfg) {
    if (spec.u_a != 0.0 || spec.u_b != 0.0)
        throw ConfigError("estimate_rl_solution: boundary data must be zero");
    PathSimulator sim(spec, cfg);
    auto samples = sim.simulate_ensemble(x);
    return mc_detail::reduce(samples, cfg, [](const ExitSample& s) { return s.F; },
                             sim.discard_bias_bound(samples));
}

/// Stochastic representation of the Caputo-flavor solution:
/// u(x) = E[u_a e^{-lambda tau} 1{lower} + u_b e^{-lambda tau} 1{upper} + F].
inline Estimate estimate_caputo_solution(const ProblemSpec& spec, double x, const PathConfig& cfg) {
    PathSimulator sim(spec, cfg);
    auto samples = sim.simulate_ensemble(x);
    const double ua = spec.u_a, ub = spec.u_b;
    return mc_detail::reduce(
        samples, cfg,
        [ua, ub](const ExitSample& s) {
            double v = s.F;
            if (s.side == ExitSide::Lower) v += ua * s.discount;
            else if (s.side == ExitSide::Upper) v += ub * s.discount;
            return v;
        },
        sim.discard_bias_bound(samples));
}

struct ExitStatistics {
    Estimate p_lower;           // P[exit through a]
    Estimate p_upper;           // P[exit through b]
    Estimate mean_exit_time;    // E[tau]
    Estimate discounted_lower;  // E[e^{-lambda tau}; lower]
    Estimate discounted_upper;  // E[e^{-lambda tau}; upper]
};

/// Empirical exit statistics over one shared ensemble; the frequencies satisfy
/// p_lower + p_upper + censored_fraction = 1 exactly.
inline ExitStatistics estimate_exit_statistics(const ProblemSpec& spec, double x,
                                               const PathConfig& cfg) {
    PathSimulator sim(spec, cfg);
    auto samples = sim.simulate_ensemble(x);
    const double bias = sim.discard_bias_bound(samples);
    ExitStatistics st;
    st.p_lower = mc_detail::reduce(
        samples, cfg, [](const ExitSample& s) { return s.side == ExitSide::Lower ? 1.0 : 0.0; }, bias);
    st.p_upper = mc_detail::reduce(
        samples, cfg, [](const ExitSample& s) { return s.side == ExitSide::Upper ? 1.0 : 0.0; }, bias);
    st.mean_exit_time =
        mc_detail::reduce(samples, cfg, [](const ExitSample& s) { return s.tau; }, bias);
    st.discounted_lower = mc_detail::reduce(
        samples, cfg,
        [](const ExitSample& s) { return s.side == ExitSide::Lower ? s.discount : 0.0; }, bias);
    st.discounted_upper = mc_detail::reduce(
        samples, cfg,
        [](const ExitSample& s) { return s.side == ExitSide::Upper ? s.discount : 0.0; }, bias);
    return st;
}

/// int g_probe dH(x, .) = E[int_0^tau g_probe(X_t) dt]; requires lambda = 0.
inline Estimate estimate_potential_integral(const ProblemSpec& spec,
                                            const std::function<double(double)>& g_probe, double x,
                                            const PathConfig& cfg) {
    if (spec.lambda != 0.0)
        throw ConfigError("estimate_potential_integral: requires lambda = 0");
    if (!g_probe) throw ConfigError("estimate_potential_integral: probe function is null");
    PathSimulator sim(spec, cfg);
    auto samples = sim.simulate_ensemble(x, &g_probe);
    return mc_detail::reduce(samples, cfg, [](const ExitSample& s) { return s.F; },
                             sim.discard_bias_bound(samples));
}

} // namespace tsfrac
