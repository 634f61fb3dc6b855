#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <optional>
#include <type_traits>
#include <utility>

#include "yo/objectives.hpp"
#include "yo/search_space.hpp"

namespace yo {

/// Charged evaluation: returns nullopt once the budget refuses the charge.
template <class E, class Point>
concept Evaluator = std::invocable<E&, const Point&> &&
                    std::convertible_to<std::invoke_result_t<E&, const Point&>, std::optional<double>>;

/// Evaluator backed directly by an Objective and a ledger phase.
template <SearchSpace S>
auto ledger_evaluator(const Objective<S>& f, BudgetLedger& ledger, Phase phase) {
    return [&f, &ledger, phase](const typename S::point_type& x) -> std::optional<double> {
        if (!ledger.charge(phase)) return std::nullopt;
        return f.evaluate(x);
    };
}

/// Makes sure `x` carries a value; false if the budget refused.
template <class Point, Evaluator<Point> E>
bool ensure_evaluated(Candidate<Point>& x, E& eval) {
    if (x.value) return true;
    x.value = eval(x.position);
    return x.value.has_value();
}

/// Coordinate descent: per dimension try +delta then -delta
/// (delta = refine_scale * range), keep strict improvements, stop after a
/// sweep without improvement, after `max_probes` probes, or when the
/// budget runs out. Probes that clamp onto the current point are skipped.
template <Evaluator<RealVector> E>
Candidate<RealVector> greedy_refine(Candidate<RealVector> x, const ContinuousBox& space, E&& eval,
                                    std::size_t max_probes, double refine_scale) {
    require_valid(space, x.position, "greedy_refine");
    if (!ensure_evaluated(x, eval)) return x;
    std::size_t probes = 0;
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t d = 0; d < space.dim(); ++d) {
            const double delta = refine_scale * space.range(d);
            for (double sign : {1.0, -1.0}) {
                const double moved = space.clamp(x.position[d] + sign * delta, d);
                if (moved == x.position[d]) continue;
                if (probes >= max_probes) return x;
                RealVector trial = x.position;
                trial[d] = moved;
                const auto value = eval(trial);
                if (!value) return x;
                ++probes;
                if (*value < *x.value) {
                    x.position = std::move(trial);
                    x.value = value;
                    improved = true;
                    break;
                }
            }
        }
    }
    return x;
}

/// Enumerates 2-opt moves as position pairs (i, j), i < j - 1, meaning
/// "reverse positions i+1..j". The pair (0, n-1) is a pure reflection and
/// is skipped. Order is row-major in i, then j.
class TwoOptScan {
public:
    explicit TwoOptScan(std::size_t n) : n_(n) {}

    std::size_t size() const { return n_ < 4 ? 0 : n_ * (n_ - 3) / 2; }

    std::pair<std::size_t, std::size_t> at(std::size_t k) const {
        std::size_t i = 0;
        for (;; ++i) {
            const std::size_t row = row_length(i);
            if (k < row) break;
            k -= row;
        }
        return {i, i + 2 + k};
    }

    void advance(std::pair<std::size_t, std::size_t>& ij) const {
        auto& [i, j] = ij;
        ++j;
        const std::size_t last = (i == 0) ? n_ - 2 : n_ - 1;
        if (j > last) {
            ++i;
            j = i + 2;
            if (i + 2 > n_ - 1) {
                i = 0;
                j = 2;
            }
        }
    }

private:
    std::size_t row_length(std::size_t i) const { return i == 0 ? n_ - 3 : n_ - i - 2; }
    std::size_t n_;
};

/// First-improvement 2-opt. The scan walks the fixed pair order from
/// `*cursor` (0 when null), applies the first strictly improving reversal and
/// keeps scanning from the next pair, wrapping around; it stops after a full
/// cycle without improvement, after `max_probes` probes, or when the budget
/// runs out. The cursor is left at the next unprobed pair.
template <Evaluator<Tour> E>
Candidate<Tour> greedy_refine(Candidate<Tour> x, const PermutationSpace& space, E&& eval, std::size_t max_probes,
                              std::size_t* cursor = nullptr) {
    require_valid(space, x.position, "greedy_refine");
    if (!ensure_evaluated(x, eval)) return x;
    const TwoOptScan scan(space.n_items());
    const std::size_t cycle = scan.size();
    if (cycle == 0) return x;

    std::size_t k = cursor ? *cursor % cycle : 0;
    auto ij = scan.at(k);
    std::size_t probes = 0;
    std::size_t since_improvement = 0;
    Tour trial;
    while (since_improvement < cycle && probes < max_probes) {
        trial = x.position;
        std::reverse(trial.begin() + static_cast<std::ptrdiff_t>(ij.first) + 1,
                     trial.begin() + static_cast<std::ptrdiff_t>(ij.second) + 1);
        const auto value = eval(trial);
        if (!value) break;
        ++probes;
        if (*value < *x.value) {
            x.position.swap(trial);
            x.value = value;
            since_improvement = 0;
        } else {
            ++since_improvement;
        }
        scan.advance(ij);
        k = (k + 1) % cycle;
    }
    if (cursor) *cursor = k;
    return x;
}

/// Ledger-charged convenience overloads.
inline Candidate<RealVector> greedy_refine(Candidate<RealVector> x, const Objective<ContinuousBox>& f,
                                           BudgetLedger& ledger, std::size_t max_probes, double refine_scale,
                                           Phase phase = Phase::Hybrid) {
    return greedy_refine(std::move(x), f.space, ledger_evaluator(f, ledger, phase), max_probes, refine_scale);
}

inline Candidate<Tour> greedy_refine(Candidate<Tour> x, const Objective<PermutationSpace>& f, BudgetLedger& ledger,
                                     std::size_t max_probes, Phase phase = Phase::Hybrid) {
    return greedy_refine(std::move(x), f.space, ledger_evaluator(f, ledger, phase), max_probes);
}

}  // namespace yo
