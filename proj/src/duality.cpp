#include "dualforge/duality.hpp"

#include "dualforge/errors.hpp"

#include <algorithm>
#include <future>
#include <set>
#include <sstream>

namespace dualforge {

namespace {

std::string render_tuple(const Tuple& t) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < t.size(); ++i) {
        if (i) os << ",";
        os << t[i];
    }
    os << ")";
    return os.str();
}

// Is `table` (a total map M^k -> M, row-major) a homomorphism m1^k -> m1?
// Direct iteration; powers are never materialized here.
void check_op_is_hom(const Structure& m1, const std::string& sym, const std::vector<int>& table,
                     int k, CompatReport& rep) {
    const int n = m1.size();
    const auto& ops = m1.sig()->ops();
    auto at = [&](const Tuple& args) {
        long long idx = 0;
        for (int a : args) idx = idx * n + a;
        return table[static_cast<size_t>(idx)];
    };

    for (size_t oi = 0; oi < ops.size(); ++oi) {
        const int j = ops[oi].arity;
        if (j == 0) {
            // g applied to the constant tuple must give the constant
            int c = m1.table(static_cast<int>(oi))[0];
            Tuple args(k, c);
            if (at(args) != c)
                rep.issues.push_back({"op '" + sym + "' does not fix the constant '" +
                                      ops[oi].name + "'"});
            continue;
        }
        // rows: j argument tuples in M^k, i.e. a j*k matrix over M
        long long total = 1;
        for (int i = 0; i < j * k; ++i) total *= n;
        Tuple flat(static_cast<size_t>(j * k), 0);
        for (long long it = 0; it < total; ++it) {
            // decode row-major matrix: entry (r, c) = flat[r*k + c]
            Tuple lhs_args(j);
            for (int r = 0; r < j; ++r) {
                Tuple row(k);
                for (int c = 0; c < k; ++c) row[c] = flat[r * k + c];
                lhs_args[r] = at(row);
            }
            int lhs = m1.apply(static_cast<int>(oi), lhs_args);
            Tuple col_result(k);
            for (int c = 0; c < k; ++c) {
                Tuple col(j);
                for (int r = 0; r < j; ++r) col[r] = flat[r * k + c];
                col_result[c] = m1.apply(static_cast<int>(oi), col);
            }
            int rhs = at(col_result);
            if (lhs != rhs) {
                rep.issues.push_back({"op '" + sym + "' fails to commute with '" +
                                      ops[oi].name + "'"});
                return;
            }
            // odometer
            int pos = j * k - 1;
            while (pos >= 0) {
                if (++flat[pos] < n) break;
                flat[pos] = 0;
                --pos;
            }
            if (pos < 0) break;
        }
    }
    for (size_t ri = 0; ri < m1.sig()->rels().size(); ++ri) {
        const auto& rel = m1.sig()->rels()[ri];
        const int j = rel.arity;
        // j tuples in M^k whose k columns each lie in r must map into r
        const auto& rs = m1.relset(static_cast<int>(ri));
        // iterate over k-tuples of members of r: rows of the matrix transposed
        if (rs.empty()) continue;
        std::vector<size_t> pick(static_cast<size_t>(k), 0);
        while (true) {
            // column c is rs[pick[c]] (a j-tuple); row r of the matrix is then
            // (rs[pick[0]][r], ..., rs[pick[k-1]][r]) in M^k
            Tuple img(j);
            for (int r = 0; r < j; ++r) {
                Tuple row(k);
                for (int c = 0; c < k; ++c) row[c] = rs[pick[c]][r];
                img[r] = at(row);
            }
            if (!m1.rel_holds(static_cast<int>(ri), img)) {
                rep.issues.push_back({"op '" + sym + "' does not preserve relation '" +
                                      rel.name + "': image " + render_tuple(img) +
                                      " missing"});
                return;
            }
            int pos = k - 1;
            while (pos >= 0) {
                if (++pick[pos] < rs.size()) break;
                pick[pos] = 0;
                --pos;
            }
            if (pos < 0) break;
        }
    }
}

} // namespace

std::string CompatReport::summary() const {
    if (ok()) return "compatible";
    std::ostringstream os;
    for (size_t i = 0; i < issues.size(); ++i) {
        if (i) os << "; ";
        os << issues[i].what;
    }
    return os.str();
}

CompatReport check_compatible(const Structure& m1, const Structure& m2, const SizeCaps& caps) {
    if (m1.size() != m2.size())
        throw CarrierMismatch("alter ego must live on a carrier of equal size");
    CompatReport rep;
    const int n = m1.size();

    const auto& ops2 = m2.sig()->ops();
    for (size_t oi = 0; oi < ops2.size(); ++oi) {
        const int k = ops2[oi].arity;
        const auto& tab = m2.table(static_cast<int>(oi));
        if (k == 0) {
            // a constant c is compatible iff {c} supports a one-element total
            // substructure: idempotent under every op, constant tuple in every
            // relation
            int c = tab[0];
            for (size_t fi = 0; fi < m1.sig()->ops().size(); ++fi) {
                Tuple args(m1.sig()->ops()[fi].arity, c);
                if (m1.apply(static_cast<int>(fi), args) != c) {
                    rep.issues.push_back({"constant '" + ops2[oi].name + "' = " +
                                          std::to_string(c) + " is not idempotent under '" +
                                          m1.sig()->ops()[fi].name + "'"});
                }
            }
            for (size_t ri = 0; ri < m1.sig()->rels().size(); ++ri) {
                Tuple t(m1.sig()->rels()[ri].arity, c);
                if (!m1.rel_holds(static_cast<int>(ri), t)) {
                    rep.issues.push_back({"constant tuple " + render_tuple(t) +
                                          " missing from relation '" +
                                          m1.sig()->rels()[ri].name + "'"});
                }
            }
            continue;
        }
        long long cells = 1;
        for (int i = 0; i < k; ++i) cells *= n;
        if (static_cast<long long>(tab.size()) != cells) {
            rep.issues.push_back({"op '" + ops2[oi].name + "' has a malformed table"});
            continue;
        }
        check_op_is_hom(m1, ops2[oi].name, tab, k, rep);
    }

    const auto& rels2 = m2.sig()->rels();
    for (size_t ri = 0; ri < rels2.size(); ++ri) {
        const int k = rels2[ri].arity;
        const auto& rs = m2.relset(static_cast<int>(ri));
        // subuniverse test: the closure of the tuple set under the
        // coordinatewise m1-operations (constants included) must be the set
        std::vector<Tuple> closed = closure_in_power(m1, k, rs, caps);
        std::vector<Tuple> sorted = rs;
        for (const auto& t : closed) {
            if (!std::binary_search(sorted.begin(), sorted.end(), t))
                rep.issues.push_back({"relation '" + rels2[ri].name + "' is not a subuniverse: tuple " +
                                      render_tuple(t) + " missing"});
        }
    }
    return rep;
}

bool compatibility_symmetric(const Structure& m1, const Structure& m2, const SizeCaps& caps) {
    return check_compatible(m1, m2, caps).ok() == check_compatible(m2, m1, caps).ok();
}

AlterEgoPair make_alter_ego_pair(StructurePtr m1, StructurePtr m2, const SizeCaps& caps) {
    AlterEgoPair pair;
    pair.m1 = std::move(m1);
    pair.m2 = std::move(m2);
    pair.certificate = check_compatible(*pair.m1, *pair.m2, caps);
    if (!pair.certificate.ok())
        throw NotCompatible("alter ego certificate failed: " + pair.certificate.summary());
    return pair;
}

AlterEgoPair swap_pair(const AlterEgoPair& pair, const SizeCaps& caps) {
    if (pair.lazy_rel_arity > 0)
        throw ValidationFailed("cannot swap a pair with lazily represented relations");
    return make_alter_ego_pair(pair.m2, pair.m1, caps);
}

PrevarietyCheck in_prevariety(const Structure& a, const HomSet& homs) {
    PrevarietyCheck out;
    const int n = a.size();
    // injectivity: homs jointly separate points
    for (int x = 0; x < n; ++x)
        for (int y = x + 1; y < n; ++y) {
            bool sep = false;
            for (const auto& h : homs.maps)
                if (h[x] != h[y]) {
                    sep = true;
                    break;
                }
            if (!sep) {
                out.member = false;
                out.why = "homs into the generator do not separate " + std::to_string(x) +
                          " and " + std::to_string(y);
                return out;
            }
        }
    // reflection: for every non-member tuple some hom must exhibit it
    const auto& rels = a.sig()->rels();
    const Structure& m = *homs.cod;
    for (size_t ri = 0; ri < rels.size(); ++ri) {
        const int ar = rels[ri].arity;
        if (n == 0) continue;
        Tuple t(ar, 0);
        while (true) {
            if (!a.rel_holds(static_cast<int>(ri), t)) {
                bool refuted = false;
                for (const auto& h : homs.maps) {
                    Tuple img(ar);
                    for (int j = 0; j < ar; ++j) img[j] = h[t[j]];
                    if (!m.rel_holds(static_cast<int>(ri), img)) {
                        refuted = true;
                        break;
                    }
                }
                if (!refuted) {
                    out.member = false;
                    out.why = "relation '" + rels[ri].name + "' is not reflected at " +
                              render_tuple(t);
                    return out;
                }
            }
            int pos = ar - 1;
            while (pos >= 0) {
                if (++t[pos] < n) break;
                t[pos] = 0;
                --pos;
            }
            if (pos < 0) break;
        }
    }
    out.member = true;
    return out;
}

DualObject dualize(const StructurePtr& a, const AlterEgoPair& pair, const HomSearchConfig& cfg,
                   const SizeCaps& caps) {
    if (!(*a->sig() == *pair.m1->sig()))
        throw SignatureMismatch("dualize: structure signature differs from m1");
    DualObject d;
    d.base = a;
    d.homs = enumerate_homs(a, pair.m1, cfg);
    auto pv = in_prevariety(*a, d.homs);
    if (!pv.member) throw NotInPrevariety("dualize: " + pv.why);
    try {
        d.dual = structure_on_tuples(*pair.m2, a->size(), d.homs.maps,
                                     "D(" + a->name() + ")", caps);
    } catch (const ValidationFailed& e) {
        // a passing certificate guarantees pointwise ops stay inside the
        // hom-set; reaching this means the compatibility check is broken
        throw InternalInvariantViolation(std::string("pointwise alter-ego operation left "
                                                     "the hom-set: ") +
                                         e.what());
    }
    return d;
}

namespace {

// All subsets of {0..n-1} with 1 <= size <= maxk, each sorted ascending.
void for_each_subset(int n, int maxk, const std::function<void(const std::vector<int>&)>& f) {
    std::vector<int> cur;
    std::function<void(int)> rec = [&](int start) {
        if (!cur.empty()) f(cur);
        if (static_cast<int>(cur.size()) == maxk) return;
        for (int i = start; i < n; ++i) {
            cur.push_back(i);
            rec(i + 1);
            cur.pop_back();
        }
    };
    rec(0);
}

} // namespace

DualityAnalysis analyze_duality(const StructurePtr& a, const AlterEgoPair& pair,
                                const HomSearchConfig& cfg, const SizeCaps& caps) {
    DualityAnalysis an;
    an.d = dualize(a, pair, cfg, caps);
    const auto& X = an.d.homs.maps;

    HomSet eset = enumerate_homs(an.d.dual, pair.m2, cfg);
    std::vector<Tuple> carrier = eset.maps;

    if (pair.lazy_rel_arity > 0 && !X.empty()) {
        // membership in every compatible relation of arity <= lazy_rel_arity,
        // decided through the generated relations r_F: a map passes for the
        // relation generated by a tuple of homs iff it passes for the
        // underlying set, so subsets of the hom-set suffice
        const int nx = static_cast<int>(X.size());
        std::vector<std::pair<std::vector<int>, std::set<Tuple>>> rfs;
        for_each_subset(nx, pair.lazy_rel_arity, [&](const std::vector<int>& F) {
            std::set<Tuple> rf;
            for (int e = 0; e < a->size(); ++e) {
                Tuple t(F.size());
                for (size_t j = 0; j < F.size(); ++j) t[j] = X[F[j]][e];
                rf.insert(std::move(t));
            }
            rfs.emplace_back(F, std::move(rf));
        });
        std::vector<Tuple> kept;
        for (const auto& b : carrier) {
            bool ok = true;
            for (const auto& [F, rf] : rfs) {
                Tuple t(F.size());
                for (size_t j = 0; j < F.size(); ++j) t[j] = b[F[j]];
                if (!rf.count(t)) {
                    ok = false;
                    break;
                }
            }
            if (ok) kept.push_back(b);
        }
        carrier = std::move(kept);
    }

    an.second_carrier = std::move(carrier); // already sorted (hom order)
    try {
        an.second = structure_on_tuples(*pair.m1, static_cast<int>(X.size()),
                                        an.second_carrier, "ED(" + a->name() + ")", caps);
    } catch (const ValidationFailed& e) {
        throw InternalInvariantViolation(std::string("second dual carrier not closed under "
                                                     "pointwise operations: ") +
                                         e.what());
    }

    // evaluation map
    an.eval.resize(static_cast<size_t>(a->size()));
    for (int e = 0; e < a->size(); ++e) {
        Tuple t(X.size());
        for (size_t x = 0; x < X.size(); ++x) t[x] = X[x][e];
        auto it = std::lower_bound(an.second_carrier.begin(), an.second_carrier.end(), t);
        if (it == an.second_carrier.end() || *it != t)
            throw InternalInvariantViolation("evaluation image missing from second dual");
        an.eval[e] = static_cast<int>(it - an.second_carrier.begin());
    }
    std::set<int> img(an.eval.begin(), an.eval.end());
    an.eval_injective = img.size() == an.eval.size();
    if (!an.eval_injective)
        throw InternalInvariantViolation(
            "evaluation is not injective although membership in the prevariety was verified");
    return an;
}

StructurePtr second_dual(const StructurePtr& a, const AlterEgoPair& pair,
                         const HomSearchConfig& cfg, const SizeCaps& caps) {
    return analyze_duality(a, pair, cfg, caps).second;
}

Hom evaluation(const StructurePtr& a, const AlterEgoPair& pair, const HomSearchConfig& cfg,
               const SizeCaps& caps) {
    auto an = analyze_duality(a, pair, cfg, caps);
    Hom e;
    e.dom = a;
    e.cod = an.second;
    e.map = an.eval;
    if (auto viol = check_hom(e.map, *a, *an.second))
        throw InternalInvariantViolation("evaluation is not a homomorphism: " + viol->what);
    return e;
}

DualityVerdict check_duality_at(const StructurePtr& a, const AlterEgoPair& pair,
                                const HomSearchConfig& cfg, const SizeCaps& caps) {
    auto an = analyze_duality(a, pair, cfg, caps);
    DualityVerdict v;

    if (an.second_carrier.size() != static_cast<size_t>(a->size())) {
        // evaluation injective but not surjective: report the least ghost
        std::vector<char> hit(an.second_carrier.size(), 0);
        for (int ix : an.eval) hit[ix] = 1;
        for (size_t i = 0; i < an.second_carrier.size(); ++i) {
            if (!hit[i]) {
                v.holds = false;
                v.ghost = an.second_carrier[i];
                v.note = "ghost: map outside the image of evaluation";
                return v;
            }
        }
        throw InternalInvariantViolation("cardinality mismatch without a ghost");
    }

    if (auto viol = check_hom(an.eval, *a, *an.second)) {
        v.holds = false;
        v.note = "evaluation not a homomorphism: " + viol->what;
        return v;
    }
    std::vector<int> inv(an.eval.size());
    for (size_t i = 0; i < an.eval.size(); ++i) inv[an.eval[i]] = static_cast<int>(i);
    if (auto viol = check_hom(inv, *an.second, *a)) {
        v.holds = false;
        v.note = "evaluation does not reflect structure: " + viol->what;
        return v;
    }
    v.holds = true;
    v.iso = an.eval;
    return v;
}

DualityVerdict full_duality_check_at(const StructurePtr& x, const AlterEgoPair& pair,
                                     const HomSearchConfig& cfg, const SizeCaps& caps) {
    AlterEgoPair swapped = swap_pair(pair, caps);
    if (!(*x->sig() == *swapped.m1->sig()))
        throw SignatureMismatch("full_duality_check_at: structure signature differs from m2");
    return check_duality_at(x, swapped, cfg, caps);
}

ScanReport finite_level_scan(const AlterEgoPair& pair, int bound, const SizeCaps& caps,
                             bool parallel, long long max_subuniverses) {
    if (bound < 1) throw ValidationFailed("scan bound must be >= 1");
    ScanReport rep;
    rep.bound = bound;
    rep.note = "bounded scan over substructures of m1^k, k <= " + std::to_string(bound) +
               "; finite instances only";

    std::vector<StructurePtr> structs;
    std::vector<std::pair<int, std::vector<int>>> origin; // (k, carrier)
    for (int k = 1; k <= bound; ++k) {
        StructurePtr pk = power(*pair.m1, k, caps);
        auto subs = all_subuniverses(*pk, /*allow_empty=*/false, max_subuniverses);
        for (auto& carrier : subs) {
            auto sub = generated_substructure(*pk, carrier, false, caps);
            structs.push_back(sub.sub);
            origin.emplace_back(k, carrier);
        }
    }
    rep.structures_seen = static_cast<long long>(structs.size());

    IsoClasses classes = iso_classify(structs, caps);

    std::vector<ScanEntry> entries(classes.reps.size());
    auto run_one = [&](size_t ci) {
        int idx = classes.reps[ci];
        ScanEntry e;
        e.power = origin[idx].first;
        e.carrier = origin[idx].second;
        e.size = structs[idx]->size();
        DualityVerdict v = check_duality_at(structs[idx], pair, {}, caps);
        e.holds = v.holds;
        if (!v.holds)
            e.witness = v.ghost ? ("ghost " + render_tuple(*v.ghost)) : v.note;
        entries[ci] = std::move(e);
    };

    if (parallel && classes.reps.size() > 1) {
        std::vector<std::future<void>> futs;
        std::atomic<size_t> next{0};
        unsigned nt = std::max(1u, std::thread::hardware_concurrency());
        for (unsigned t = 0; t < nt; ++t)
            futs.push_back(std::async(std::launch::async, [&]() {
                while (true) {
                    size_t i = next.fetch_add(1);
                    if (i >= entries.size()) return;
                    run_one(i);
                }
            }));
        for (auto& f : futs) f.get();
    } else {
        for (size_t ci = 0; ci < classes.reps.size(); ++ci) run_one(ci);
    }

    rep.classes = std::move(entries);
    for (const auto& e : rep.classes)
        if (!e.holds) rep.all_hold = false;
    return rep;
}

AlterEgoPair lattice_based_alter_ego(const StructurePtr& m1, const std::vector<int>& join_table,
                                     const std::vector<int>& meet_table, const SizeCaps& caps) {
    const int n = m1->size();
    const size_t want = static_cast<size_t>(n) * static_cast<size_t>(n);
    if (join_table.size() != want || meet_table.size() != want)
        throw ValidationFailed("lattice tables must be n*n");
    for (int v : join_table)
        if (v < 0 || v >= n) throw ValidationFailed("join table value out of range");
    for (int v : meet_table)
        if (v < 0 || v >= n) throw ValidationFailed("meet table value out of range");

    // both tables must be homomorphisms m1^2 -> m1
    CompatReport homrep;
    check_op_is_hom(*m1, "join", join_table, 2, homrep);
    check_op_is_hom(*m1, "meet", meet_table, 2, homrep);
    if (!homrep.ok())
        throw NotCompatible("candidate lattice operations are not homomorphisms: " +
                            homrep.summary());

    // lattice axioms, exhaustively
    auto jn = [&](int x, int y) { return join_table[static_cast<size_t>(x) * n + y]; };
    auto mt = [&](int x, int y) { return meet_table[static_cast<size_t>(x) * n + y]; };
    for (int x = 0; x < n; ++x) {
        if (jn(x, x) != x || mt(x, x) != x) throw NotALattice("idempotence fails");
        for (int y = 0; y < n; ++y) {
            if (jn(x, y) != jn(y, x) || mt(x, y) != mt(y, x))
                throw NotALattice("commutativity fails");
            if (jn(x, mt(x, y)) != x || mt(x, jn(x, y)) != x)
                throw NotALattice("absorption fails");
            for (int z = 0; z < n; ++z) {
                if (jn(jn(x, y), z) != jn(x, jn(y, z))) throw NotALattice("join associativity fails");
                if (mt(mt(x, y), z) != mt(x, mt(y, z))) throw NotALattice("meet associativity fails");
            }
        }
    }

    auto sig = make_signature({{"join", 2}, {"meet", 2}}, {});
    auto m2 = make_structure(m1->name() + "-lattice-ego", sig, n,
                             {join_table, meet_table}, {});
    AlterEgoPair pair = make_alter_ego_pair(m1, m2, caps);
    pair.lazy_rel_arity = 2 * n;
    return pair;
}

} // namespace dualforge
