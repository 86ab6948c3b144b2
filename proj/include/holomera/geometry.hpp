#pragma once

// Causal-cone geometry of the modified binary MERA, done purely on site
// index sets. The direct support simulation below walks the actual layer
// connectivity (u on (4k+1, 4k+2), blocks (2j, 2j+1), coarse j -> local j+1)
// and is the authority for cone shapes; the closed-form width recursion
// l' = max(2, floor(l/2) + 1) is kept as the documented approximation.

#include <algorithm>
#include <set>
#include <vector>

#include "holomera/tensor.hpp"

namespace holomera {

/// One layer of support flow: u's spread partially covered pairs, then each
/// occupied pre-site lands in its block, and the coarse lattice is re-indexed
/// by +1 so the canonical cell stays at {1,2}.
inline std::set<index_t> coarse_support(const std::set<index_t>& sites) {
    std::set<index_t> spread = sites;
    for (index_t p : sites) {
        index_t m = ((p % 4) + 4) % 4;
        if (m == 1) spread.insert(p + 1);  // u on (p, p+1)
        if (m == 2) spread.insert(p - 1);  // u on (p-1, p)
    }
    std::set<index_t> coarse;
    for (index_t p : spread) {
        index_t j = (p >= 0) ? p / 2 : -((-p + 1) / 2);  // floor division
        coarse.insert(j + 1);
    }
    return coarse;
}

/// Contiguous region [a, b] inclusive.
inline std::set<index_t> region_sites(index_t a, index_t b) {
    std::set<index_t> s;
    for (index_t p = a; p <= b; ++p) s.insert(p);
    return s;
}

/// Canonical cell-aligned region of even width l0: {1, .., l0}, so width 2
/// gives the cell {1,2} itself.
inline std::set<index_t> aligned_region(index_t l0) {
    detail::require(l0 >= 2 && l0 % 2 == 0, "aligned_region: even width >= 2 required");
    return region_sites(1, l0);
}

struct ConeProfile {
    index_t l0 = 0;
    std::vector<index_t> widths;  // widths[s] = enclosed effective sites at depth s
    index_t crossover = 0;        // first depth with width 2
};

/// Width profile of the causal cone of the canonical region of width l0,
/// from the direct support simulation.
inline ConeProfile cone_profile(index_t l0, index_t s_max) {
    detail::require(l0 >= 2, "cone_profile: l0 >= 2 required");
    detail::require(l0 % 2 == 0, "cone_profile: region must align to the two-site cell");
    ConeProfile prof;
    prof.l0 = l0;
    std::set<index_t> supp = aligned_region(l0);
    prof.widths.push_back(static_cast<index_t>(supp.size()));
    for (index_t s = 1; s <= s_max; ++s) {
        supp = coarse_support(supp);
        prof.widths.push_back(static_cast<index_t>(supp.size()));
    }
    prof.crossover = s_max;
    for (size_t s = 0; s < prof.widths.size(); ++s) {
        if (prof.widths[s] == 2) {
            prof.crossover = static_cast<index_t>(s);
            break;
        }
    }
    return prof;
}

/// The asymptotic width rule: spread by one site per end, then block.
inline index_t cone_width_recursion(index_t l) {
    return std::max<index_t>(2, l / 2 + 1);
}

/// First depth at which the cones of the canonical cell and of the cell
/// displaced by offset_r sites overlap. Exact, by support simulation.
inline index_t intersection_scale(index_t offset_r, index_t s_cap = 64) {
    detail::require(offset_r % 2 == 0, "intersection_scale: offset must be cell-aligned (even)");
    index_t r = std::abs(offset_r);
    if (r == 0) return 0;
    std::set<index_t> a = region_sites(1, 2);
    std::set<index_t> b = region_sites(1 + offset_r, 2 + offset_r);
    for (index_t s = 1; s <= s_cap; ++s) {
        a = coarse_support(a);
        b = coarse_support(b);
        std::vector<index_t> common;
        std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
        if (!common.empty()) return s;
    }
    return s_cap;
}

struct ShellPartition {
    std::vector<index_t> radii;  // radii[s] = r_s, s >= 1
    index_t s_max = 0;

    /// Inclusive site interval [r_s, r_{s+1}] of shell s, one side of the region.
    std::pair<index_t, index_t> shell(index_t s) const {
        detail::require(s >= 1 && s + 1 < static_cast<index_t>(radii.size()), "shell: s out of range");
        return {radii[static_cast<size_t>(s)], radii[static_cast<size_t>(s + 1)]};
    }

    /// Distance-bond indices of shell s: bonds [j, j+1] for j in [r_s, r_{s+1}).
    std::vector<index_t> shell_bonds(index_t s) const {
        auto [lo, hi] = shell(s);
        std::vector<index_t> bonds;
        for (index_t j = lo; j < hi; ++j) bonds.push_back(j);
        return bonds;
    }
};

/// r_s = (2^{s+1} - 1)/3 for odd s, (2^{s+1} - 2)/3 for even s.
inline index_t shell_radius(index_t s) {
    detail::require(s >= 1, "shell_radius: s >= 1");
    index_t p = index_t{1} << (s + 1);
    return (s % 2 == 1) ? (p - 1) / 3 : (p - 2) / 3;
}

inline ShellPartition shell_partition(index_t s_max) {
    detail::require(s_max >= 1, "shell_partition: s_max >= 1");
    ShellPartition sp;
    sp.s_max = s_max;
    sp.radii.push_back(0);  // placeholder for s = 0
    for (index_t s = 1; s <= s_max + 1; ++s) sp.radii.push_back(shell_radius(s));
    return sp;
}

/// Sites of a finite ring whose causal cones intersect the cone of the
/// central cell within s_max layers (the region S of a finitely correlated
/// state outside which a cone modification cannot be seen).
inline std::set<index_t> dependent_sites_ring(index_t n_sites, index_t s_max) {
    detail::require(n_sites % 2 == 0 && n_sites >= 4, "dependent_sites_ring: even ring size");
    auto coarse_ring = [](const std::set<index_t>& sites, index_t n) {
        std::set<index_t> spread = sites;
        for (index_t p : sites) {
            index_t m = ((p % 4) + 4) % 4;
            if (m == 1) spread.insert((p + 1) % n);
            if (m == 2) spread.insert(((p - 1) % n + n) % n);
        }
        std::set<index_t> coarse;
        for (index_t p : spread) coarse.insert((p / 2 + 1) % (n / 2));
        return coarse;
    };
    std::set<index_t> target = {1 % n_sites, 2 % n_sites};
    std::set<index_t> out;
    for (index_t site = 0; site < n_sites; ++site) {
        std::set<index_t> supp = {site};
        std::set<index_t> tgt = target;
        index_t n = n_sites;
        bool hits = false;
        for (index_t s = 0; s <= s_max && !hits; ++s) {
            std::vector<index_t> common;
            std::set_intersection(supp.begin(), supp.end(), tgt.begin(), tgt.end(),
                                  std::back_inserter(common));
            hits = !common.empty();
            if (hits || n <= 2) break;
            supp = coarse_ring(supp, n);
            tgt = coarse_ring(tgt, n);
            n /= 2;
        }
        if (hits) out.insert(site);
    }
    return out;
}

}  // namespace holomera
