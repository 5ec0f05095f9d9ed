#ifndef SKROCK_NOISE_HPP
#define SKROCK_NOISE_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "skrock/spatial.hpp"

namespace skrock {

struct WhiteNoise {};

/// Diagonal covariance in the operator eigenbasis, q_m = lambda_m^{-r}.
struct SpectralDecay {
    double r = 1.0;
};

struct NoiseSpec {
    double sigma = 1.0;
    std::variant<WhiteNoise, SpectralDecay> structure = WhiteNoise{};
    bool multiplicative = false;  ///< g(u) = u when set, g = 1 otherwise

    bool is_white() const { return std::holds_alternative<WhiteNoise>(structure); }

    /// Supremum of the admissible regularity exponent in one space dimension
    /// (1/2 for space-time white noise, r + 1/2 for spectral decay r).
    double regularity() const {
        if (is_white()) return 0.5;
        return std::get<SpectralDecay>(structure).r + 0.5;
    }
};

// ---------------------------------------------------------------------------
// Counter-based Gaussian streams

inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// SplitMix64 as a UniformRandomBitGenerator.
class SplitMix64 {
public:
    using result_type = std::uint64_t;
    explicit SplitMix64(std::uint64_t state) : state_(state) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
    result_type operator()() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix64(state_);
    }

private:
    std::uint64_t state_;
};

/// Key of the Gaussian stream feeding one fine step of one trajectory.
inline constexpr std::uint64_t stream_key(std::uint64_t master_seed, std::uint64_t trajectory,
                                          std::uint64_t fine_step) {
    std::uint64_t k = mix64(master_seed ^ 0x6a09e667f3bcc909ULL);
    k = mix64(k ^ (trajectory * 0x9e3779b97f4a7c15ULL + 0x3c6ef372fe94f82bULL));
    k = mix64(k ^ (fine_step * 0xd1b54a32d192ed03ULL + 0xa54ff53a5f1d36f1ULL));
    return k;
}

/// Brownian increments of one trajectory on a dyadic time grid.
///
/// Entry i of the fine increment over step k is the i-th draw of the stream
/// keyed by (master_seed, trajectory, k): any window can be regenerated
/// independently of evaluation order. A level-l increment spans 2^l fine
/// steps and is the sum of its two level-(l-1) halves, left + right, so every
/// coarse value is an exact floating-point sum of finer ones.
class NoisePath {
public:
    NoisePath(std::uint64_t master_seed, std::uint64_t trajectory, double fine_dt,
              std::int64_t fine_steps, int width)
        : seed_(master_seed), trajectory_(trajectory), fine_dt_(fine_dt),
          fine_steps_(fine_steps), width_(width), fine_scale_(std::sqrt(fine_dt)) {
        if (!(fine_dt > 0.0)) throw std::invalid_argument("NoisePath: fine_dt must be positive");
        if (fine_steps < 1 || width < 1) throw std::invalid_argument("NoisePath: empty path");
    }

    std::uint64_t master_seed() const { return seed_; }
    std::uint64_t trajectory() const { return trajectory_; }
    double fine_dt() const { return fine_dt_; }
    std::int64_t fine_steps() const { return fine_steps_; }
    int width() const { return width_; }
    double dt(int level) const { return std::ldexp(fine_dt_, level); }

    /// Fine increment: i.i.d. N(0, fine_dt) entries.
    void fine_increment(std::int64_t step, std::span<double> out) const {
        check(0, step, out);
        SplitMix64 engine(stream_key(seed_, trajectory_, static_cast<std::uint64_t>(step)));
        std::normal_distribution<double> normal;
        for (auto& v : out) v = fine_scale_ * normal(engine);
    }

    /// Increment over fine steps [step * 2^level, (step + 1) * 2^level).
    void increment(int level, std::int64_t step, std::span<double> out) const {
        check(level, step, out);
        if (level == 0) {
            fine_increment(step, out);
            return;
        }
        std::vector<double> right(out.size());
        increment(level - 1, 2 * step, out);
        increment(level - 1, 2 * step + 1, right);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] + right[i];
    }

    std::vector<double> increment(int level, std::int64_t step) const {
        std::vector<double> out(width_);
        increment(level, step, out);
        return out;
    }

private:
    void check(int level, std::int64_t step, std::span<double> out) const {
        if (out.size() != static_cast<std::size_t>(width_))
            throw std::invalid_argument("NoisePath: output width mismatch");
        if (level < 0 || level > 62 || step < 0)
            throw std::out_of_range("NoisePath: invalid level/step");
        const std::int64_t window = std::int64_t{1} << level;
        if ((step + 1) > fine_steps_ / window || fine_steps_ % window != 0)
            throw std::out_of_range("NoisePath: window (level " + std::to_string(level) + ", step " +
                                    std::to_string(step) + ") exceeds the path horizon");
    }

    std::uint64_t seed_;
    std::uint64_t trajectory_;
    double fine_dt_;
    std::int64_t fine_steps_;
    int width_;
    double fine_scale_;
};

/// Streams fine increments and emits every completed coarse window, with the
/// same pairwise summation tree as NoisePath::increment.
class CoarseningStream {
public:
    CoarseningStream(int max_level, int width)
        : max_level_(max_level), pending_(max_level + 1, std::vector<double>(width)),
          has_pending_(max_level + 1, false), carry_(width) {}

    /// sink(level, increment) is called for level 0 and for every window that
    /// the pushed increment completes, in increasing level order.
    template <class Sink>
    void push(std::span<const double> fine, Sink&& sink) {
        carry_.assign(fine.begin(), fine.end());
        for (int level = 0;; ++level) {
            sink(level, std::span<const double>(carry_));
            if (level == max_level_) return;
            auto& slot = pending_[level];
            if (!has_pending_[level]) {
                slot = carry_;
                has_pending_[level] = true;
                return;
            }
            for (std::size_t i = 0; i < carry_.size(); ++i) carry_[i] = slot[i] + carry_[i];
            has_pending_[level] = false;
        }
    }

    void reset() { std::fill(has_pending_.begin(), has_pending_.end(), false); }

private:
    int max_level_;
    std::vector<std::vector<double>> pending_;
    std::vector<bool> has_pending_;
    std::vector<double> carry_;
};

/// Maps standard Brownian increments (variance dt per entry) onto grid-level
/// Q-Wiener increments.
///
/// White: entry i scaled by 1/sqrt(h), so Var = dt/h per node.
/// SpectralDecay: sum_m sqrt(q_m) xi_m e_m in the h-orthonormal eigenbasis.
class NoiseShaper {
public:
    NoiseShaper(const NoiseSpec& spec, const DiscreteOperator& op)
        : n_(op.n_interior), white_(spec.is_white()), scale_(1.0 / std::sqrt(op.h)) {
        if (white_) return;
        const double r = std::get<SpectralDecay>(spec.structure).r;
        const auto dec = decompose(op);
        weights_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
        for (int m = 0; m < n_; ++m) {
            const double amplitude = std::pow(dec.eigenvalues[m], -r / 2.0);
            for (int i = 0; i < n_; ++i)
                weights_[static_cast<std::size_t>(i) * n_ + m] = amplitude * dec.eigenvectors[m][i];
        }
    }

    int size() const { return n_; }

    void shape(std::span<const double> raw, std::span<double> out) const {
        if (raw.size() != static_cast<std::size_t>(n_) || out.size() != raw.size())
            throw std::invalid_argument("NoiseShaper: dimension mismatch");
        if (white_) {
            for (int i = 0; i < n_; ++i) out[i] = scale_ * raw[i];
            return;
        }
        for (int i = 0; i < n_; ++i) {
            const double* row = weights_.data() + static_cast<std::size_t>(i) * n_;
            double acc = 0.0;
            for (int m = 0; m < n_; ++m) acc += row[m] * raw[m];
            out[i] = acc;
        }
    }

private:
    int n_;
    bool white_;
    double scale_;
    std::vector<double> weights_;  // row-major (node, mode)
};

/// Grid-level Q-Wiener increment over window `step` at coarsening `level`.
inline std::vector<double> sample_increment(const NoisePath& path, const NoiseShaper& shaper,
                                            std::int64_t step, int level) {
    if (path.width() != shaper.size())
        throw std::invalid_argument("sample_increment: path width does not match the grid");
    const auto raw = path.increment(level, step);
    std::vector<double> out(raw.size());
    shaper.shape(raw, out);
    return out;
}

inline std::vector<double> sample_increment(const NoisePath& path, const NoiseSpec& spec,
                                            const DiscreteOperator& op, std::int64_t step,
                                            int level) {
    return sample_increment(path, NoiseShaper(spec, op), step, level);
}

/// Noise contribution sigma * g(u) * dW, componentwise.
inline void apply_diffusion(const NoiseSpec& spec, std::span<const double> u,
                            std::span<const double> dW, std::span<double> out) {
    if (u.size() != dW.size() || out.size() != dW.size())
        throw std::invalid_argument("apply_diffusion: dimension mismatch");
    if (spec.multiplicative) {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = spec.sigma * u[i] * dW[i];
    } else {
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = spec.sigma * dW[i];
    }
}

inline std::vector<double> apply_diffusion(const NoiseSpec& spec, std::span<const double> u,
                                           std::span<const double> dW) {
    std::vector<double> out(dW.size());
    apply_diffusion(spec, u, dW, out);
    return out;
}

}  // namespace skrock

#endif
