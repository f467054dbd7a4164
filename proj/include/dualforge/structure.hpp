#pragma once

#include "dualforge/signature.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dualforge {

using Tuple = std::vector<int>;

/// Resource limits for combinatorial constructions. Exceeding one throws;
/// nothing is ever silently truncated.
struct SizeCaps {
    long long max_carrier = 4096;        // carrier size of any materialized structure
    long long max_table_cells = 10'000'000; // total op-table cells of a materialized structure
    long long map_budget = 10'000'000;   // node budget for map enumeration
};

struct ValidationIssue {
    std::string what;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
    std::string summary() const;
};

/// A finite total structure: carrier {0..n-1}, one total table per operation
/// symbol, one tuple set per relation symbol. Immutable after construction;
/// share freely across threads.
///
/// Table layout for an op of arity k is row-major over the argument tuple,
/// i.e. entry for (a1,..,ak) sits at a1*n^(k-1) + a2*n^(k-2) + ... + ak.
/// A nullary op stores a single designated element. Relation tuple lists are
/// kept sorted; all "first witness" answers downstream inherit this order.
class Structure {
public:
    Structure(std::string name, SignaturePtr sig, int size,
              std::vector<std::vector<int>> tables,
              std::vector<std::vector<Tuple>> relsets);

    const std::string& name() const { return name_; }
    const SignaturePtr& sig() const { return sig_; }
    int size() const { return size_; }

    const std::vector<int>& table(int op) const { return tables_[op]; }
    const std::vector<Tuple>& relset(int rel) const { return relsets_[rel]; }

    /// Applies op `op` to `args` (size must equal the op arity).
    int apply(int op, const Tuple& args) const;
    bool rel_holds(int rel, const Tuple& tup) const;

    /// Lists every invariant violation; empty report iff well-formed.
    ValidationReport validate() const;

    bool same_content(const Structure& other) const;

private:
    std::string name_;
    SignaturePtr sig_;
    int size_;
    std::vector<std::vector<int>> tables_;
    std::vector<std::vector<Tuple>> relsets_;
};

using StructurePtr = std::shared_ptr<const Structure>;

StructurePtr make_structure(std::string name, SignaturePtr sig, int size,
                            std::vector<std::vector<int>> tables,
                            std::vector<std::vector<Tuple>> relsets);

// ---------------------------------------------------------------------------
// Powers and tuple carriers

long long ipow_checked(long long base, int exp, long long cap);

/// Index of a tuple in the lexicographic enumeration of {0..n-1}^k.
long long tuple_index(const Tuple& t, int n);
Tuple tuple_of_index(long long idx, int n, int k);

/// M^k with carrier {0..|M|^k - 1} in lexicographic tuple order, operations
/// coordinatewise, and (t1..tj) in r iff membership holds at every coordinate.
StructurePtr power(const Structure& m, int k, const SizeCaps& caps = {});

/// Closure of `gens` (tuples in M^k) under the coordinatewise operations of M
/// and all constants, without materializing M^k. Returns the sorted carrier.
std::vector<Tuple> closure_in_power(const Structure& m, int k,
                                    const std::vector<Tuple>& gens,
                                    const SizeCaps& caps = {});

/// Same closure, but additionally records one derivation per element so a
/// generator assignment can be pushed through the closure later. Derivation i
/// is either a generator (op < 0, args = {generator index}) or an op applied
/// to earlier elements.
struct Derivation {
    int op;          // -1 for generator, otherwise op index
    std::vector<int> args; // element ids (or the generator id when op == -1)
};
struct ClosureWithDerivations {
    std::vector<Tuple> carrier;          // sorted
    std::vector<Derivation> derivations; // parallel to carrier
    std::vector<int> eval_order;         // process in this order; args always precede
};
ClosureWithDerivations closure_in_power_derived(const Structure& m, int k,
                                                const std::vector<Tuple>& gens,
                                                const SizeCaps& caps = {});

/// Builds the induced structure on a sorted set of tuples inside M^k.
/// Every op application must stay inside the set (throws otherwise);
/// relations hold pointwise at every coordinate.
StructurePtr structure_on_tuples(const Structure& m, int k,
                                 const std::vector<Tuple>& carrier,
                                 std::string name, const SizeCaps& caps = {});

// ---------------------------------------------------------------------------
// Substructures

struct SubstructureResult {
    StructurePtr sub;
    std::vector<int> inclusion; // sub element i -> parent element inclusion[i], ascending
};

/// Least subset of `s` containing `gens` and all constants, closed under the
/// op tables, with induced relations. Fails with EmptyGeneration when the
/// closure is empty and empty structures are disallowed.
SubstructureResult generated_substructure(const Structure& s, const std::vector<int>& gens,
                                          bool allow_empty = false, const SizeCaps& caps = {});

/// Every subuniverse of `s` (as sorted carriers, ordered by size then lex).
/// The empty subuniverse is included only in empty mode and only when the
/// signature has no constants.
std::vector<std::vector<int>> all_subuniverses(const Structure& s, bool allow_empty = false,
                                               long long max_count = 1'000'000);

// ---------------------------------------------------------------------------
// Isomorphism

/// First bijective hom a -> b (in lexicographic map order) whose inverse is
/// also a hom, or nullopt. Forward preservation alone is not enough for
/// relational signatures, so the inverse is checked explicitly.
std::optional<std::vector<int>> isomorphic(const Structure& a, const Structure& b,
                                           const SizeCaps& caps = {});

/// Cheap iso-invariant fingerprint; equal fingerprints are necessary but not
/// sufficient for isomorphism. Used to bucket candidates before search.
uint64_t iso_fingerprint(const Structure& s);

/// Deduplicates structures up to isomorphism, preserving first-seen order of
/// class representatives. Returns indices of the representatives and, for
/// each input, the representative it belongs to.
struct IsoClasses {
    std::vector<int> reps;       // indices into the input
    std::vector<int> class_of;   // input index -> position in reps
};
IsoClasses iso_classify(const std::vector<StructurePtr>& items, const SizeCaps& caps = {});

} // namespace dualforge
