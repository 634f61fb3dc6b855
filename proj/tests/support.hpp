#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <limits>
#include <memory>
#include <numeric>

#include "yo/objectives.hpp"
#include "yo/search_space.hpp"

namespace yo::test {

/// Wraps an objective so every real evaluation bumps a shared counter.
template <SearchSpace S>
struct Counted {
    Objective<S> f;
    std::shared_ptr<std::atomic<std::size_t>> calls = std::make_shared<std::atomic<std::size_t>>(0);

    explicit Counted(Objective<S> inner) : f(std::move(inner)) {
        auto fn = f.fn;
        auto c = calls;
        f.fn = [fn, c](const typename S::point_type& x) {
            ++*c;
            return fn(x);
        };
    }
    std::size_t count() const { return calls->load(); }
};

inline Objective<ContinuousBox> sphere_objective(std::size_t dim, double lo = -5.12, double hi = 5.12) {
    return {ContinuousBox::cube(dim, lo, hi), [](const RealVector& x) { return sphere(x); }, {}};
}

inline Objective<ContinuousBox> composite_objective() {
    return {ContinuousBox::cube(5, -5.12, 5.12), [](const RealVector& x) { return composite_expensive(x); }, {}};
}

inline Objective<ContinuousBox> rosenbrock_objective() {
    return {ContinuousBox::cube(5, -5.0, 10.0), [](const RealVector& x) { return rosenbrock(x); }, {}};
}

/// Exhaustive optimum: city 0 fixed, all (n-1)! orders.
inline double brute_force_tsp(const TspInstance& inst) {
    Tour p(inst.size());
    std::iota(p.begin(), p.end(), std::size_t{0});
    double best = std::numeric_limits<double>::infinity();
    do {
        best = std::min(best, tour_length(inst, p));
    } while (std::next_permutation(p.begin() + 1, p.end()));
    return best;
}

inline TspInstance unit_square() {
    TspInstance inst;
    inst.coords = {{0, 0}, {1, 0}, {1, 1}, {0, 1}};
    return inst;
}

inline bool is_bijection(const Tour& t, std::size_t n) {
    if (t.size() != n) return false;
    Tour s = t;
    std::sort(s.begin(), s.end());
    for (std::size_t i = 0; i < n; ++i)
        if (s[i] != i) return false;
    return true;
}

}  // namespace yo::test
