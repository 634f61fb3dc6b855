#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <deque>
#include <functional>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "yo/errors.hpp"
#include "yo/search_space.hpp"

namespace yo {

struct TourHash {
    std::size_t operator()(const Tour& t) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (auto v : t) h = (h ^ v) * 1099511628211ull;
        return h;
    }
};

/// Memory of poor regions. Membership queries never evaluate the objective.
/// Not synchronized; yo::run guards a shared instance with a shared_mutex.
template <SearchSpace S>
class Blacklist;

/// Continuous kind: hyperballs in coordinates normalized to [0,1] per dimension.
template <>
class Blacklist<ContinuousBox> {
public:
    explicit Blacklist(ContinuousBox space, std::size_t max_regions = 256)
        : space_(std::move(space)), max_regions_(max_regions) {
        if (max_regions_ == 0) throw ConfigError("Blacklist: max_regions must be positive");
    }

    Blacklist(const Blacklist& o)
        : space_(o.space_), max_regions_(o.max_regions_), regions_(o.regions_), hits_(o.hits_.load()),
          additions_(o.additions_) {}

    bool contains(const RealVector& x) const {
        check(x, "Blacklist::contains");
        const RealVector u = space_.normalize(x);
        for (const auto& r : regions_) {
            double d2 = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) d2 += (u[i] - r.center[i]) * (u[i] - r.center[i]);
            if (std::sqrt(d2) <= r.radius) {
                ++hits_;
                return true;
            }
        }
        return false;
    }

    void add_region(const RealVector& x, double radius) {
        check(x, "Blacklist::add_region");
        if (!(radius > 0.0)) throw ContractViolation("Blacklist::add_region: radius must be > 0");
        if (regions_.size() == max_regions_) regions_.pop_front();
        regions_.push_back({space_.normalize(x), radius});
        ++additions_;
    }

    std::size_t size() const { return regions_.size(); }
    std::size_t max_regions() const { return max_regions_; }
    std::size_t hits() const { return hits_; }
    std::size_t additions() const { return additions_; }

private:
    struct Region {
        RealVector center;
        double radius;
    };

    void check(const RealVector& x, const char* what) const {
        if (x.size() != space_.dim())
            throw ContractViolation(std::string(what) + ": point dimension does not match the blacklist's space");
    }

    ContinuousBox space_;
    std::size_t max_regions_;
    std::deque<Region> regions_;
    mutable std::atomic<std::size_t> hits_{0};
    std::size_t additions_ = 0;
};

/// Permutation kind: exact canonical tours, FIFO-evicted.
template <>
class Blacklist<PermutationSpace> {
public:
    explicit Blacklist(PermutationSpace space, std::size_t max_regions = 256)
        : space_(space), max_regions_(max_regions) {
        if (max_regions_ == 0) throw ConfigError("Blacklist: max_regions must be positive");
    }

    Blacklist(const Blacklist& o)
        : space_(o.space_), max_regions_(o.max_regions_), order_(o.order_), members_(o.members_),
          hits_(o.hits_.load()), additions_(o.additions_) {}

    bool contains(const Tour& x) const {
        check(x, "Blacklist::contains");
        const bool hit = members_.contains(canonical_tour(x));
        if (hit) ++hits_;
        return hit;
    }

    /// `radius` is ignored for tours.
    void add_region(const Tour& x, double /*radius*/ = 0.0) {
        check(x, "Blacklist::add_region");
        Tour key = canonical_tour(x);
        ++additions_;
        if (members_.contains(key)) return;
        if (order_.size() == max_regions_) {
            members_.erase(order_.front());
            order_.pop_front();
        }
        members_.insert(key);
        order_.push_back(std::move(key));
    }

    std::size_t size() const { return order_.size(); }
    std::size_t max_regions() const { return max_regions_; }
    std::size_t hits() const { return hits_; }
    std::size_t additions() const { return additions_; }

private:
    void check(const Tour& x, const char* what) const {
        if (!space_.is_valid(x)) throw ContractViolation(std::string(what) + ": tour does not match the blacklist's space");
    }

    PermutationSpace space_;
    std::size_t max_regions_;
    std::deque<Tour> order_;
    std::unordered_set<Tour, TourHash> members_;
    mutable std::atomic<std::size_t> hits_{0};
    std::size_t additions_ = 0;
};

}  // namespace yo
