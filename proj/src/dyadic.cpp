#include "haarfact/dyadic.hpp"

#include <map>
#include <numeric>

namespace haarfact {

std::string DyadicInterval::literal() const {
    return std::to_string(level) + ":" + std::to_string(k);
}

DyadicInterval DyadicInterval::from_literal(const std::string& s) {
    auto pos = s.find(':');
    if (pos == std::string::npos) throw DomainError("bad interval literal: " + s);
    int level = std::stoi(s.substr(0, pos));
    long long k = std::stoll(s.substr(pos + 1));
    return DyadicInterval(level, k);
}

long long canonical_index(const DyadicInterval& I) {
    return (1LL << I.level) + I.k - 1;
}

DyadicInterval interval_from_canonical_index(long long j) {
    if (j < 1) throw DomainError("canonical index must be >= 1");
    int level = 0;
    while ((2LL << level) <= j) ++level;
    return DyadicInterval(level, j - (1LL << level) + 1);
}

IntervalFamily::IntervalFamily(std::vector<DyadicInterval> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

bool IntervalFamily::contains(const DyadicInterval& I) const {
    return std::binary_search(members_.begin(), members_.end(), I);
}

int IntervalFamily::max_level() const {
    int m = 0;
    for (const auto& I : members_) m = std::max(m, I.level);
    return m;
}

DyadicRational IntervalFamily::total_measure() const {
    DyadicRational t{0, 0};
    for (const auto& I : members_) t = t + I.measure();
    return t;
}

bool IntervalFamily::pairwise_disjoint() const {
    // Sorted order puts ancestors right before their leftmost descendants,
    // but containment can also hold against earlier members; check each member
    // against all of its dyadic ancestors instead of all pairs.
    for (const auto& I : members_) {
        DyadicInterval a = I;
        while (a.level > 0) {
            a = a.parent();
            if (contains(a)) return false;
        }
    }
    return true;
}

IntervalFamily IntervalFamily::maximal_members() const {
    std::vector<DyadicInterval> out;
    for (const auto& I : members_) {
        bool dominated = false;
        DyadicInterval a = I;
        while (a.level > 0) {
            a = a.parent();
            if (contains(a)) {
                dominated = true;
                break;
            }
        }
        if (!dominated) out.push_back(I);
    }
    return IntervalFamily(std::move(out));
}

bool IntervalFamily::covers(const DyadicInterval& J) const {
    for (const auto& I : members_)
        if (J.contained_in(I)) return true;
    // J may still be a union of finer members.
    DyadicRational inside{0, 0};
    for (const auto& I : members_)
        if (I.contained_in(J)) inside = inside + I.measure();
    return inside == J.measure();
}

bool IntervalFamily::union_contains(const IntervalFamily& other) const {
    for (const auto& J : other.members_)
        if (!covers(J)) return false;
    return true;
}

bool IntervalFamily::union_disjoint_from(const IntervalFamily& other) const {
    for (const auto& I : members_)
        for (const auto& J : other.members_)
            if (!I.disjoint_from(J)) return false;
    return true;
}

void IntervalFamily::insert(const DyadicInterval& I) {
    auto it = std::lower_bound(members_.begin(), members_.end(), I);
    if (it == members_.end() || *it != I) members_.insert(it, I);
}

IntervalFamily enumerate_dn(int n) {
    if (n < 0) throw DomainError("enumerate_dn: n must be >= 0");
    if (n > max_level()) throw ResourceLimitError("enumerate_dn: n exceeds MAX_LEVEL");
    std::vector<DyadicInterval> out;
    out.reserve(std::size_t((2LL << n) - 1));
    for (int level = 0; level <= n; ++level)
        for (long long k = 1; k <= (1LL << level); ++k) out.emplace_back(level, k);
    return IntervalFamily(std::move(out));
}

Rational carleson_constant(const IntervalFamily& F) {
    if (F.empty()) throw DomainError("carleson_constant: empty family");
    const auto& m = F.members();
    // mass[i] = sum of |J| over members J contained in member i.  Processing
    // deepest-first, each member pushes its accumulated mass to its nearest
    // strict ancestor inside F.
    std::vector<std::size_t> order(m.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return m[a].level > m[b].level; });
    std::map<DyadicInterval, std::size_t> pos;
    for (std::size_t i = 0; i < m.size(); ++i) pos[m[i]] = i;
    std::vector<DyadicRational> mass(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) mass[i] = m[i].measure();
    for (std::size_t idx : order) {
        DyadicInterval a = m[idx];
        while (a.level > 0) {
            a = a.parent();
            auto it = pos.find(a);
            if (it != pos.end()) {
                mass[it->second] = mass[it->second] + mass[idx];
                break;
            }
        }
    }
    Rational best(0);
    for (std::size_t i = 0; i < m.size(); ++i)
        best = std::max(best, mass[i].to_rational() / m[i].measure().to_rational());
    return best;
}

Rational carleson_brute_force(const IntervalFamily& F) {
    if (F.empty()) throw DomainError("carleson_brute_force: empty family");
    const auto& m = F.members();
    Rational best(0);
    for (const auto& I : m) {
        DyadicRational s{0, 0};
        for (const auto& J : m)
            if (J.contained_in(I)) s = s + J.measure();
        best = std::max(best, s.to_rational() / I.measure().to_rational());
    }
    return best;
}

std::optional<TreeViolation> check_dyadic_tree(const DyadicTreeOfSets& T,
                                               bool check_gg_measure_bounds) {
    const std::size_t nodes = (std::size_t(2) << T.depth) - 1;
    if (T.sets.size() != nodes)
        return TreeViolation{DyadicInterval::unit(), "wrong number of node sets"};
    for (const auto& fam : T.sets)
        if (!fam.pairwise_disjoint())
            return TreeViolation{DyadicInterval::unit(), "node set not pairwise disjoint"};
    for (long long j = 1; j <= (long long)(nodes); ++j) {
        DyadicInterval I = interval_from_canonical_index(j);
        if (I.level >= T.depth) break;
        const auto& parent = T.sets[std::size_t(j - 1)];
        const auto& left = T.sets[std::size_t(2 * j - 1)];
        const auto& right = T.sets[std::size_t(2 * j)];
        if (!parent.union_contains(left) || !parent.union_contains(right))
            return TreeViolation{I, "child set escapes parent set"};
        if (!left.union_disjoint_from(right))
            return TreeViolation{I, "children sets intersect"};
    }
    if (check_gg_measure_bounds) {
        Rational root = T.sets[0].total_measure().to_rational();
        if (root == Rational(0))
            return TreeViolation{DyadicInterval::unit(), "empty root set"};
        for (long long j = 1; j <= (long long)(nodes); ++j) {
            DyadicInterval I = interval_from_canonical_index(j);
            Rational ratio = T.sets[std::size_t(j - 1)].total_measure().to_rational() / root;
            Rational mI = I.measure().to_rational();
            if (ratio < mI / 2 || ratio > mI)
                return TreeViolation{I, "normalized measure outside [|I|/2, |I|]"};
        }
    }
    return std::nullopt;
}

Rational carleson_constant(const DyadicTreeOfSets& T) {
    std::vector<std::pair<DyadicInterval, DyadicRational>> nodes;
    for (long long j = 1; j <= (long long)(T.sets.size()); ++j)
        nodes.emplace_back(interval_from_canonical_index(j),
                           T.sets[std::size_t(j - 1)].total_measure());
    return carleson_constant_weighted(nodes);
}

Rational carleson_constant_weighted(
    const std::vector<std::pair<DyadicInterval, DyadicRational>>& nodes) {
    if (nodes.empty()) throw DomainError("carleson_constant_weighted: empty family");
    Rational best(0);
    for (const auto& [I, mI] : nodes) {
        if (mI.num == 0) throw DomainError("carleson_constant_weighted: zero-measure node");
        Rational s(0);
        for (const auto& [J, mJ] : nodes)
            if (J.contained_in(I)) s += mJ.to_rational();
        best = std::max(best, s / mI.to_rational());
    }
    return best;
}

std::size_t partition_pigeonhole(const IntervalFamily& F,
                                 const std::vector<IntervalFamily>& parts) {
    std::size_t total = 0;
    for (const auto& p : parts) {
        total += p.size();
        for (const auto& I : p.members())
            if (!F.contains(I)) throw DomainError("partition_pigeonhole: part escapes family");
    }
    if (total != F.size()) throw DomainError("partition_pigeonhole: parts do not partition family");
    for (std::size_t a = 0; a < parts.size(); ++a)
        for (std::size_t b = a + 1; b < parts.size(); ++b)
            for (const auto& I : parts[a].members())
                if (parts[b].contains(I))
                    throw DomainError("partition_pigeonhole: overlapping parts");
    std::size_t best = 0;
    Rational best_val(-1);
    for (std::size_t l = 0; l < parts.size(); ++l) {
        if (parts[l].empty()) continue;
        Rational v = carleson_constant(parts[l]);
        if (v > best_val) {
            best_val = v;
            best = l;
        }
    }
    if (best_val < Rational(0)) throw DomainError("partition_pigeonhole: all parts empty");
    return best;
}

}  // namespace haarfact
