#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "yo/errors.hpp"
#include "yo/rng.hpp"

namespace yo {

using RealVector = std::vector<double>;
using Tour = std::vector<std::size_t>;

/// Axis-aligned box [lower, upper] in R^D.
class ContinuousBox {
public:
    using point_type = RealVector;

    ContinuousBox(RealVector lower, RealVector upper) : lower_(std::move(lower)), upper_(std::move(upper)) {
        if (lower_.empty() || lower_.size() != upper_.size())
            throw ConfigError("ContinuousBox: bounds must be non-empty and of equal dimension");
        for (std::size_t i = 0; i < lower_.size(); ++i)
            if (!(lower_[i] < upper_[i]))
                throw ConfigError("ContinuousBox: lower[" + std::to_string(i) + "] must be < upper");
    }

    static ContinuousBox cube(std::size_t dim, double lo, double hi) {
        return {RealVector(dim, lo), RealVector(dim, hi)};
    }

    std::size_t dim() const { return lower_.size(); }
    const RealVector& lower() const { return lower_; }
    const RealVector& upper() const { return upper_; }
    double range(std::size_t i) const { return upper_[i] - lower_[i]; }

    bool is_valid(const point_type& x) const {
        if (x.size() != dim()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (!(x[i] >= lower_[i] && x[i] <= upper_[i])) return false;
        return true;
    }

    double clamp(double v, std::size_t i) const { return std::clamp(v, lower_[i], upper_[i]); }

    point_type random_point(RngStream& rng) const {
        point_type x(dim());
        for (std::size_t i = 0; i < dim(); ++i) x[i] = rng.uniform(lower_[i], upper_[i]);
        return x;
    }

    /// Per-dimension map onto [0,1].
    RealVector normalize(const point_type& x) const {
        RealVector u(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) u[i] = (x[i] - lower_[i]) / range(i);
        return u;
    }

    friend bool operator==(const ContinuousBox&, const ContinuousBox&) = default;

private:
    RealVector lower_;
    RealVector upper_;
};

/// Closed tours over n_items cities; a point is a permutation of 0..n-1.
class PermutationSpace {
public:
    using point_type = Tour;

    explicit PermutationSpace(std::size_t n_items) : n_(n_items) {
        if (n_ < 3) throw ConfigError("PermutationSpace: need at least 3 items");
    }

    std::size_t n_items() const { return n_; }

    bool is_valid(const point_type& p) const {
        if (p.size() != n_) return false;
        std::vector<bool> seen(n_, false);
        for (auto v : p) {
            if (v >= n_ || seen[v]) return false;
            seen[v] = true;
        }
        return true;
    }

    point_type random_point(RngStream& rng) const {
        point_type p(n_);
        std::iota(p.begin(), p.end(), std::size_t{0});
        std::shuffle(p.begin(), p.end(), rng.engine());
        return p;
    }

    friend bool operator==(const PermutationSpace&, const PermutationSpace&) = default;

private:
    std::size_t n_;
};

template <class S>
concept SearchSpace = requires(const S& s, const typename S::point_type& p, RngStream& rng) {
    typename S::point_type;
    { s.is_valid(p) } -> std::convertible_to<bool>;
    { s.random_point(rng) } -> std::same_as<typename S::point_type>;
};

template <class Point>
struct Candidate {
    Point position;
    std::optional<double> value;
};

template <SearchSpace S>
using CandidateOf = Candidate<typename S::point_type>;

/// Parameters of the proposal kernel.
struct ProposalParams {
    /// Gaussian step std as a fraction of each dimension's range.
    double step_scale = 0.1;
    /// Probabilities of {segment reversal, swap, insertion}.
    std::array<double, 3> move_mix{0.7, 0.2, 0.1};

    void validate() const {
        if (!(step_scale > 0.0)) throw ConfigError("ProposalParams: step_scale must be > 0");
        double sum = 0.0;
        for (double w : move_mix) {
            if (!(w >= 0.0)) throw ConfigError("ProposalParams: move_mix entries must be >= 0");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("ProposalParams: move_mix must sum to 1");
    }
};

template <SearchSpace S>
void require_valid(const S& space, const typename S::point_type& x, const char* what) {
    if (!space.is_valid(x)) throw ContractViolation(std::string(what) + ": candidate is not valid in its space");
}

/// Isotropic Gaussian step, clamped to the box.
inline Candidate<RealVector> mcmc_propose(const Candidate<RealVector>& x, const ContinuousBox& space,
                                          const ProposalParams& params, RngStream& rng) {
    require_valid(space, x.position, "mcmc_propose");
    if (params.step_scale < 0.0) throw ContractViolation("mcmc_propose: negative step_scale");
    Candidate<RealVector> out{x.position, std::nullopt};
    for (std::size_t i = 0; i < space.dim(); ++i) {
        const double step = params.step_scale * space.range(i) * rng.normal();
        out.position[i] = space.clamp(out.position[i] + step, i);
    }
    return out;
}

enum class TourMove { Reversal, Swap, Insertion };

/// Applies one move to `tour`; positions i != j.
inline void apply_tour_move(Tour& tour, TourMove move, std::size_t i, std::size_t j) {
    switch (move) {
        case TourMove::Reversal: {
            if (i > j) std::swap(i, j);
            std::reverse(tour.begin() + static_cast<std::ptrdiff_t>(i),
                         tour.begin() + static_cast<std::ptrdiff_t>(j) + 1);
            break;
        }
        case TourMove::Swap:
            std::swap(tour[i], tour[j]);
            break;
        case TourMove::Insertion: {
            const auto city = tour[i];
            tour.erase(tour.begin() + static_cast<std::ptrdiff_t>(i));
            tour.insert(tour.begin() + static_cast<std::ptrdiff_t>(j), city);
            break;
        }
    }
}

/// One move drawn from `params.move_mix`.
inline Candidate<Tour> mcmc_propose(const Candidate<Tour>& x, const PermutationSpace& space,
                                    const ProposalParams& params, RngStream& rng) {
    require_valid(space, x.position, "mcmc_propose");
    const std::size_t n = space.n_items();
    const double r = rng.uniform();
    TourMove move = TourMove::Insertion;
    if (r < params.move_mix[0])
        move = TourMove::Reversal;
    else if (r < params.move_mix[0] + params.move_mix[1])
        move = TourMove::Swap;
    const std::size_t i = rng.index(n);
    std::size_t j = rng.index(n - 1);
    if (j >= i) ++j;
    Candidate<Tour> out{x.position, std::nullopt};
    apply_tour_move(out.position, move, i, j);
    return out;
}

/// Representative of the tour's rotation/reflection class: city 0 first,
/// then the direction whose second city is smaller.
inline Tour canonical_tour(const Tour& p) {
    const std::size_t n = p.size();
    if (n == 0) return p;
    const auto zero = static_cast<std::size_t>(std::find(p.begin(), p.end(), std::size_t{0}) - p.begin());
    if (zero == n) throw ContractViolation("canonical_tour: not a permutation of 0..n-1");
    Tour out(n);
    const bool forward = n < 2 || p[(zero + 1) % n] <= p[(zero + n - 1) % n];
    for (std::size_t k = 0; k < n; ++k)
        out[k] = forward ? p[(zero + k) % n] : p[(zero + n - k) % n];
    return out;
}

}  // namespace yo
