#pragma once

#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <istream>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "yo/errors.hpp"
#include "yo/rng.hpp"
#include "yo/search_space.hpp"

namespace yo {

// Benchmark functions (minimization).

inline double rastrigin(const RealVector& x) {
    double sum = 10.0 * static_cast<double>(x.size());
    for (double v : x) sum += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
    return sum;
}

inline double rosenbrock(const RealVector& x) {
    if (x.size() < 2) throw InvalidInput("rosenbrock: dimension must be >= 2");
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double a = x[i + 1] - x[i] * x[i];
        const double b = 1.0 - x[i];
        sum += 100.0 * a * a + b * b;
    }
    return sum;
}

inline double sphere(const RealVector& x) {
    double sum = 0.0;
    for (double v : x) sum += v * v;
    return sum;
}

/// Weights of rastrigin, rosenbrock, sphere, and the sin+exp term.
using CompositeWeights = std::array<double, 4>;

/// Weighted sum of rastrigin, rosenbrock, sphere and sum(sin(x_i)) + exp(|x|/D).
inline double composite_expensive(const RealVector& x, const CompositeWeights& w = {1.0, 1.0, 1.0, 1.0},
                                  std::chrono::nanoseconds delay = std::chrono::nanoseconds{0}) {
    const double d = static_cast<double>(x.size());
    double sin_sum = 0.0;
    for (double v : x) sin_sum += std::sin(v);
    const double value = w[0] * rastrigin(x) + w[1] * rosenbrock(x) + w[2] * sphere(x) +
                         w[3] * (sin_sum + std::exp(std::sqrt(sphere(x)) / d));
    if (delay.count() > 0) std::this_thread::sleep_for(delay);
    return value;
}

// Euclidean TSP.

struct City {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const City&, const City&) = default;
};

struct TspInstance {
    std::vector<City> coords;
    std::uint64_t seed = 0;

    std::size_t size() const { return coords.size(); }
    PermutationSpace space() const { return PermutationSpace(coords.size()); }
};

/// n cities uniform on [0,100]^2; identical (n, seed) gives an identical instance.
inline TspInstance generate_tsp(std::size_t n, std::uint64_t seed) {
    if (n < 3) throw InvalidInput("generate_tsp: need at least 3 cities");
    RngStream rng(seed, 0x7590);
    TspInstance inst;
    inst.seed = seed;
    inst.coords.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = rng.uniform(0.0, 100.0);
        const double y = rng.uniform(0.0, 100.0);
        inst.coords.push_back({x, y});
    }
    return inst;
}

inline double city_distance(const City& a, const City& b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline double tour_length(const TspInstance& inst, const Tour& p) {
    if (!PermutationSpace(inst.size()).is_valid(p))
        throw ContractViolation("tour_length: not a permutation of the instance's cities");
    double sum = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) sum += city_distance(inst.coords[p[i]], inst.coords[p[(i + 1) % p.size()]]);
    return sum;
}

/// CSV with header `x,y`; row index is the city id.
inline void write_tsp_csv(std::ostream& os, const TspInstance& inst) {
    os.precision(17);
    os << "x,y\n";
    for (const auto& c : inst.coords) os << c.x << ',' << c.y << '\n';
}

inline TspInstance read_tsp_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("x,y", 0) != 0) throw IngestionError("tsp csv: expected header 'x,y'");
    TspInstance inst;
    std::size_t row = 1;
    while (std::getline(is, line)) {
        ++row;
        if (line.empty() || line == "\r") continue;
        std::istringstream ss(line);
        City c;
        char comma = 0;
        if (!(ss >> c.x >> comma >> c.y) || comma != ',' || !std::isfinite(c.x) || !std::isfinite(c.y))
            throw IngestionError("tsp csv: malformed row " + std::to_string(row) + ": '" + line + "'");
        inst.coords.push_back(c);
    }
    if (inst.coords.size() < 3) throw IngestionError("tsp csv: need at least 3 cities");
    return inst;
}

// Objective and evaluation budget.

/// Deterministic black-box objective over a search space.
template <SearchSpace S>
struct Objective {
    using point_type = typename S::point_type;

    S space;
    std::function<double(const point_type&)> fn;
    std::chrono::nanoseconds delay{0};

    double evaluate(const point_type& x) const {
        if (delay.count() > 0) std::this_thread::sleep_for(delay);
        return fn(x);
    }
};

inline Objective<PermutationSpace> tsp_objective(TspInstance inst) {
    PermutationSpace space(inst.size());
    return {space, [inst = std::move(inst)](const Tour& t) { return tour_length(inst, t); }, {}};
}

enum class Phase { BurnIn, Hybrid };

/// Hard cap on objective evaluations, split into burn-in and hybrid
/// allocations. charge() is the only way to obtain permission to evaluate.
class BudgetLedger {
public:
    BudgetLedger(std::size_t total, double burn_in_fraction) : total_(total), alpha_(burn_in_fraction) {
        if (total == 0) throw ConfigError("BudgetLedger: total must be positive");
        if (!(burn_in_fraction > 0.0 && burn_in_fraction < 1.0))
            throw ConfigError("BudgetLedger: burn_in_fraction must lie in (0,1)");
        burn_in_alloc_ = static_cast<std::size_t>(std::floor(burn_in_fraction * static_cast<double>(total) + 1e-9));
    }

    /// Ledger with no burn-in allocation; everything is charged to Hybrid.
    static BudgetLedger unsplit(std::size_t total) {
        BudgetLedger ledger(total, 0.5);
        ledger.alpha_ = 0.0;
        ledger.burn_in_alloc_ = 0;
        return ledger;
    }

    BudgetLedger(const BudgetLedger& other)
        : total_(other.total_), alpha_(other.alpha_), burn_in_alloc_(other.burn_in_alloc_) {
        std::lock_guard lock(other.mutex_);
        used_burn_in_ = other.used_burn_in_;
        used_hybrid_ = other.used_hybrid_;
    }

    /// Grants one evaluation in `phase`; returns its 1-based global index,
    /// or nullopt (without mutation) when the phase or the total is spent.
    std::optional<std::size_t> charge(Phase phase) {
        std::lock_guard lock(mutex_);
        if (used_burn_in_ + used_hybrid_ >= total_) return std::nullopt;
        if (phase == Phase::BurnIn) {
            if (used_burn_in_ >= burn_in_alloc_) return std::nullopt;
            ++used_burn_in_;
        } else {
            if (used_hybrid_ >= hybrid_allocation()) return std::nullopt;
            ++used_hybrid_;
        }
        return used_burn_in_ + used_hybrid_;
    }

    std::size_t total() const { return total_; }
    double burn_in_fraction() const { return alpha_; }
    std::size_t burn_in_allocation() const { return burn_in_alloc_; }
    std::size_t hybrid_allocation() const { return total_ - burn_in_alloc_; }

    std::size_t used() const {
        std::lock_guard lock(mutex_);
        return used_burn_in_ + used_hybrid_;
    }
    std::size_t used_burn_in() const {
        std::lock_guard lock(mutex_);
        return used_burn_in_;
    }
    std::size_t used_hybrid() const {
        std::lock_guard lock(mutex_);
        return used_hybrid_;
    }
    std::size_t remaining() const { return total_ - used(); }

private:
    std::size_t total_;
    double alpha_;
    std::size_t burn_in_alloc_ = 0;
    std::size_t used_burn_in_ = 0;
    std::size_t used_hybrid_ = 0;
    mutable std::mutex mutex_;
};

/// Splits `amount` across `parts` as floor(amount/parts), remainder to the last.
inline std::vector<std::size_t> split_allocation(std::size_t amount, std::size_t parts) {
    std::vector<std::size_t> out(parts, parts == 0 ? 0 : amount / parts);
    if (parts > 0) out.back() += amount % parts;
    return out;
}

}  // namespace yo
