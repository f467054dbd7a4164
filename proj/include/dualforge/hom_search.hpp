#pragma once

#include "dualforge/hom.hpp"
#include "dualforge/structure.hpp"

#include <vector>

namespace dualforge {

enum class VarOrder { ConstraintDegreeDesc, Index };
enum class SearchMode { All, Injective, Automorphism };

struct HomSearchConfig {
    VarOrder var_order = VarOrder::ConstraintDegreeDesc;
    long long budget = 10'000'000; // search nodes (assignments tried)
    bool parallel = false;
    int threads = 0; // 0 = hardware concurrency
};

/// The complete hom-set hom(dom, cod) with maps in lexicographic order.
/// Identical content regardless of parallelism.
struct HomSet {
    StructurePtr dom;
    StructurePtr cod;
    std::vector<std::vector<int>> maps;
    long long nodes = 0;

    size_t size() const { return maps.size(); }
};

/// All homomorphisms dom -> cod by propagating backtracking search.
/// Candidate sets are bitsets over the codomain; op tables propagate forced
/// values after each assignment; binary relations prune forward; wider
/// relations are checked once all participants are assigned.
HomSet enumerate_homs(const StructurePtr& dom, const StructurePtr& cod,
                      const HomSearchConfig& cfg = {});

/// enumerate_homs restricted to injective maps.
HomSet enumerate_embeddings(const StructurePtr& dom, const StructurePtr& cod,
                            const HomSearchConfig& cfg = {});

/// Bijective self-homs with hom inverse (the inverse of a bijective self-hom
/// of a finite structure is automatic; it is still verified).
HomSet enumerate_automorphisms(const StructurePtr& s, const HomSearchConfig& cfg = {});

} // namespace dualforge
