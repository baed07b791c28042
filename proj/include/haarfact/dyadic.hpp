#pragma once

#include <algorithm>
#include <boost/rational.hpp>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "haarfact/config.hpp"

namespace haarfact {

using Rational = boost::rational<long long>;

// Exact dyadic rational num / 2^log2_den.  Measures and all combinatorial
// predicates stay in this type; no floating point is involved.
struct DyadicRational {
    long long num = 0;
    int log2_den = 0;

    static DyadicRational pow2(int neg_exponent) { return {1, neg_exponent}; }

    DyadicRational normalized() const {
        DyadicRational r = *this;
        while (r.log2_den > 0 && r.num % 2 == 0) {
            r.num /= 2;
            --r.log2_den;
        }
        if (r.num == 0) r.log2_den = 0;
        return r;
    }
    friend DyadicRational operator+(DyadicRational a, DyadicRational b) {
        int d = std::max(a.log2_den, b.log2_den);
        long long n = (a.num << (d - a.log2_den)) + (b.num << (d - b.log2_den));
        return DyadicRational{n, d}.normalized();
    }
    friend DyadicRational operator-(DyadicRational a, DyadicRational b) {
        return a + DyadicRational{-b.num, b.log2_den};
    }
    friend bool operator==(DyadicRational a, DyadicRational b) {
        a = a.normalized();
        b = b.normalized();
        return a.num == b.num && a.log2_den == b.log2_den;
    }
    friend std::strong_ordering operator<=>(DyadicRational a, DyadicRational b) {
        int d = std::max(a.log2_den, b.log2_den);
        return (a.num << (d - a.log2_den)) <=> (b.num << (d - b.log2_den));
    }
    Rational to_rational() const { return Rational(num, 1LL << log2_den); }
    double to_double() const { return double(num) / double(1LL << log2_den); }
};

// Half-open dyadic interval [(k-1) 2^-level, k 2^-level) with 1 <= k <= 2^level.
struct DyadicInterval {
    int level = 0;
    long long k = 1;

    DyadicInterval() = default;
    DyadicInterval(int level_, long long k_) : level(level_), k(k_) {
        if (level < 0 || k < 1 || k > (1LL << level))
            throw DomainError("invalid dyadic interval " + std::to_string(level) + ":" +
                              std::to_string(k));
        if (level > max_level())
            throw ResourceLimitError("dyadic interval below MAX_LEVEL");
    }

    static DyadicInterval unit() { return DyadicInterval(0, 1); }

    DyadicRational measure() const { return DyadicRational::pow2(level); }
    DyadicInterval left_half() const { return DyadicInterval(level + 1, 2 * k - 1); }
    DyadicInterval right_half() const { return DyadicInterval(level + 1, 2 * k); }
    DyadicInterval parent() const {
        if (level == 0) throw DomainError("unit interval has no parent");
        return DyadicInterval(level - 1, (k + 1) / 2);
    }
    bool is_left_child() const { return level > 0 && k % 2 == 1; }

    // J.contained_in(I): J subseteq I.
    bool contained_in(const DyadicInterval& o) const {
        return level >= o.level && ((k - 1) >> (level - o.level)) == o.k - 1;
    }
    bool strictly_contained_in(const DyadicInterval& o) const {
        return level > o.level && contained_in(o);
    }
    bool disjoint_from(const DyadicInterval& o) const {
        return !contained_in(o) && !o.contained_in(*this);
    }

    friend auto operator<=>(const DyadicInterval&, const DyadicInterval&) = default;

    std::string literal() const;  // "level:k"
    static DyadicInterval from_literal(const std::string& s);
};

// j = 2^level + k - 1; bijection D_m <-> {1, ..., 2^(m+1)-1} with the child
// relation j -> 2j, 2j+1.
long long canonical_index(const DyadicInterval& I);
DyadicInterval interval_from_canonical_index(long long j);

// Finite duplicate-free set of dyadic intervals, kept sorted.
class IntervalFamily {
  public:
    IntervalFamily() = default;
    explicit IntervalFamily(std::vector<DyadicInterval> members);

    const std::vector<DyadicInterval>& members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    bool contains(const DyadicInterval& I) const;
    int max_level() const;
    DyadicRational total_measure() const;

    bool pairwise_disjoint() const;
    // Maximal members with respect to containment (always an antichain).
    IntervalFamily maximal_members() const;
    // Point-set relations between unions of pairwise disjoint families.
    bool covers(const DyadicInterval& J) const;            // J subseteq union
    bool union_contains(const IntervalFamily& other) const;
    bool union_disjoint_from(const IntervalFamily& other) const;

    void insert(const DyadicInterval& I);

  private:
    std::vector<DyadicInterval> members_;  // sorted, unique
};

IntervalFamily enumerate_dn(int n);

// Carleson constant [[F]] = max over members I of (1/|I|) sum_{J in F, J subseteq I} |J|.
// Bottom-up accumulation over the containment order, O(|F| * depth).
Rational carleson_constant(const IntervalFamily& F);
// O(|F|^2) double loop, kept as an independent test oracle.
Rational carleson_brute_force(const IntervalFamily& F);

// Index assignment I in D_m -> E_I (pairwise disjoint intervals in D_N).
struct DyadicTreeOfSets {
    int depth = 0;
    // Indexed by canonical_index - 1, size 2^(depth+1)-1.
    std::vector<IntervalFamily> sets;

    const IntervalFamily& at(const DyadicInterval& I) const {
        return sets.at(std::size_t(canonical_index(I) - 1));
    }
    DyadicRational set_measure(const DyadicInterval& I) const { return at(I).total_measure(); }
};

struct TreeViolation {
    DyadicInterval parent;
    std::string reason;
};

// Nesting and disjointness of every parent/children triple; for gg-trees the
// normalized measure bounds |I|/2 <= |E_I|/|E_root| <= |I| can be requested too.
std::optional<TreeViolation> check_dyadic_tree(const DyadicTreeOfSets& T,
                                               bool check_gg_measure_bounds = false);
inline bool is_dyadic_tree(const DyadicTreeOfSets& T) { return !check_dyadic_tree(T); }

// Carleson constant of a tree of sets: supremum over nodes I of
// (1/|E_I|) sum_{J subseteq I} |E_J|, the containment taken in the index tree.
Rational carleson_constant(const DyadicTreeOfSets& T);

// Carleson constant of a family of weighted nodes (index interval, set measure),
// as used for subfamilies L of a block basis.
Rational carleson_constant_weighted(
    const std::vector<std::pair<DyadicInterval, DyadicRational>>& nodes);

// Index l0 maximizing [[parts[l]]]; guaranteed [[parts[l0]]] >= [[F]] / L.
std::size_t partition_pigeonhole(const IntervalFamily& F,
                                 const std::vector<IntervalFamily>& parts);

}  // namespace haarfact
