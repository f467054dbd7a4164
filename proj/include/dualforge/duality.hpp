#pragma once

#include "dualforge/hom_search.hpp"
#include "dualforge/structure.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dualforge {

struct CompatIssue {
    std::string what;
};

struct CompatReport {
    std::vector<CompatIssue> issues;
    bool ok() const { return issues.empty(); }
    std::string summary() const;
};

/// Verifies that m2 is compatible with m1: every operation of m2 is a
/// homomorphism from the appropriate power of m1 to m1, and every relation of
/// m2 is a subuniverse of the appropriate power of m1 (closed under the
/// coordinatewise operations, constants included). Reports every failure.
CompatReport check_compatible(const Structure& m1, const Structure& m2,
                              const SizeCaps& caps = {});

/// check_compatible(m1,m2).ok == check_compatible(m2,m1).ok. For total
/// structures this is a theorem; the operation exists as a property-test hook.
bool compatibility_symmetric(const Structure& m1, const Structure& m2,
                             const SizeCaps& caps = {});

/// Two compatible structures on the same carrier, with the verified
/// certificate. When lazy_rel_arity > 0 the alter ego additionally carries
/// every compatible relation of arity <= lazy_rel_arity; those relations are
/// never materialized — preservation is decided through the generated
/// relations r_F.
struct AlterEgoPair {
    StructurePtr m1;
    StructurePtr m2;
    CompatReport certificate;
    int lazy_rel_arity = 0;
};

/// Builds and certifies a pair; throws NotCompatible with the report summary
/// when the certificate fails.
AlterEgoPair make_alter_ego_pair(StructurePtr m1, StructurePtr m2, const SizeCaps& caps = {});

/// Exchanges the roles of m1 and m2, re-certifying. Involutive.
AlterEgoPair swap_pair(const AlterEgoPair& pair, const SizeCaps& caps = {});

/// The hom-functor D applied to a: carrier hom(a, m1) in lexicographic map
/// order, with the m2-signature structure induced pointwise.
struct DualObject {
    StructurePtr base;
    HomSet homs;      // the carrier of D(a)
    StructurePtr dual; // m2-signature structure on that carrier
};

struct PrevarietyCheck {
    bool member = false;
    std::string why;
};

/// Membership of a raw structure in ISP(m1): the canonical evaluation into
/// M1^{hom(a,m1)} must be injective and must reflect every relation.
PrevarietyCheck in_prevariety(const Structure& a, const HomSet& homs);

DualObject dualize(const StructurePtr& a, const AlterEgoPair& pair,
                   const HomSearchConfig& cfg = {}, const SizeCaps& caps = {});

/// One pass computing D(a), E(D(a)) with its m1-structure, and the evaluation
/// map; the cheaper views below are projections of this.
struct DualityAnalysis {
    DualObject d;
    std::vector<Tuple> second_carrier; // maps hom(a,m1) -> M, sorted
    StructurePtr second;               // m1-signature structure on the carrier
    std::vector<int> eval;             // a-element -> index into second_carrier
    bool eval_injective = false;
};

DualityAnalysis analyze_duality(const StructurePtr& a, const AlterEgoPair& pair,
                                const HomSearchConfig& cfg = {}, const SizeCaps& caps = {});

StructurePtr second_dual(const StructurePtr& a, const AlterEgoPair& pair,
                         const HomSearchConfig& cfg = {}, const SizeCaps& caps = {});

/// e_A(a)(x) = x(a), verified to be an injective Hom into the second dual.
Hom evaluation(const StructurePtr& a, const AlterEgoPair& pair,
               const HomSearchConfig& cfg = {}, const SizeCaps& caps = {});

/// Exactly one of iso / ghost is present. The ghost, when duality fails by
/// non-surjectivity, is the lexicographically least element of E(D(a))
/// outside the image of the evaluation map.
struct DualityVerdict {
    bool holds = false;
    std::optional<std::vector<int>> iso; // evaluation as a bijection
    std::optional<Tuple> ghost;
    std::string note;
};

DualityVerdict check_duality_at(const StructurePtr& a, const AlterEgoPair& pair,
                                const HomSearchConfig& cfg = {}, const SizeCaps& caps = {});

/// Verdict on the evaluation X -> D(E(X)); implemented via the swapped pair.
DualityVerdict full_duality_check_at(const StructurePtr& x, const AlterEgoPair& pair,
                                     const HomSearchConfig& cfg = {},
                                     const SizeCaps& caps = {});

struct ScanEntry {
    int power = 1;
    std::vector<int> carrier; // inside m1^power
    int size = 0;
    bool holds = false;
    std::string witness;
};

struct ScanReport {
    int bound = 0;
    long long structures_seen = 0;
    std::vector<ScanEntry> classes; // one per iso-class, deterministic order
    bool all_hold = true;
    std::string note;
};

/// Enumerates the substructures of m1^k for k <= bound up to isomorphism and
/// runs check_duality_at on each class representative. The bound is recorded
/// in the report: every finite member of ISP(m1) with g generators embeds in
/// m1^(|M1|^g), so bounded scans are principled approximations, not proofs.
ScanReport finite_level_scan(const AlterEgoPair& pair, int bound, const SizeCaps& caps = {},
                             bool parallel = false, long long max_subuniverses = 200'000);

/// Alter ego (join, meet, all compatible relations of arity <= 2|M|) for a
/// structure with a pair of binary homomorphisms forming a lattice. The
/// relation family is handled lazily via lazy_rel_arity.
AlterEgoPair lattice_based_alter_ego(const StructurePtr& m1, const std::vector<int>& join_table,
                                     const std::vector<int>& meet_table,
                                     const SizeCaps& caps = {});

} // namespace dualforge
