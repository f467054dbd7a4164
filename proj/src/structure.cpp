#include "dualforge/structure.hpp"

#include "dualforge/errors.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace dualforge {

std::string ValidationReport::summary() const {
    if (ok()) return "valid";
    std::ostringstream os;
    for (size_t i = 0; i < issues.size(); ++i) {
        if (i) os << "; ";
        os << issues[i].what;
    }
    return os.str();
}

static std::string tuple_str(const Tuple& t) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < t.size(); ++i) {
        if (i) os << ",";
        os << t[i];
    }
    os << ")";
    return os.str();
}

Structure::Structure(std::string name, SignaturePtr sig, int size,
                     std::vector<std::vector<int>> tables,
                     std::vector<std::vector<Tuple>> relsets)
    : name_(std::move(name)), sig_(std::move(sig)), size_(size),
      tables_(std::move(tables)), relsets_(std::move(relsets)) {
    if (!sig_) throw ValidationFailed("structure requires a signature");
    if (size_ < 0) throw ValidationFailed("negative carrier size");
    if (tables_.size() != sig_->ops().size())
        throw ValidationFailed("table count does not match signature");
    if (relsets_.size() != sig_->rels().size())
        throw ValidationFailed("relation set count does not match signature");
    for (auto& rs : relsets_) {
        std::sort(rs.begin(), rs.end());
        rs.erase(std::unique(rs.begin(), rs.end()), rs.end());
    }
}

int Structure::apply(int op, const Tuple& args) const {
    const auto& tab = tables_[op];
    long long idx = 0;
    for (int a : args) idx = idx * size_ + a;
    return tab[static_cast<size_t>(idx)];
}

bool Structure::rel_holds(int rel, const Tuple& tup) const {
    const auto& rs = relsets_[rel];
    return std::binary_search(rs.begin(), rs.end(), tup);
}

ValidationReport Structure::validate() const {
    ValidationReport rep;
    auto issue = [&](std::string w) { rep.issues.push_back({std::move(w)}); };

    for (size_t i = 0; i < sig_->ops().size(); ++i) {
        const auto& op = sig_->ops()[i];
        long long want = 1;
        for (int j = 0; j < op.arity; ++j) {
            want *= size_;
            if (want > (1LL << 40)) break;
        }
        if (size_ == 0 && op.arity == 0) {
            issue("empty carrier with constant '" + op.name + "'");
            continue;
        }
        if (size_ == 0) continue; // no rows to fill, vacuous
        if (static_cast<long long>(tables_[i].size()) != want) {
            issue("table for '" + op.name + "' has wrong length");
            continue;
        }
        for (int v : tables_[i]) {
            if (v < 0 || v >= size_) {
                issue("table value out of range for '" + op.name + "'");
                break;
            }
        }
    }
    for (size_t i = 0; i < sig_->rels().size(); ++i) {
        const auto& rel = sig_->rels()[i];
        for (const auto& t : relsets_[i]) {
            if (static_cast<int>(t.size()) != rel.arity) {
                issue("tuple of wrong arity in relation '" + rel.name + "'");
                break;
            }
            bool bad = false;
            for (int v : t)
                if (v < 0 || v >= size_) bad = true;
            if (bad) {
                issue("tuple component out of range in relation '" + rel.name + "' at " +
                      tuple_str(t));
                break;
            }
        }
    }
    return rep;
}

bool Structure::same_content(const Structure& other) const {
    return size_ == other.size_ && *sig_ == *other.sig_ && tables_ == other.tables_ &&
           relsets_ == other.relsets_;
}

StructurePtr make_structure(std::string name, SignaturePtr sig, int size,
                            std::vector<std::vector<int>> tables,
                            std::vector<std::vector<Tuple>> relsets) {
    return std::make_shared<const Structure>(std::move(name), std::move(sig), size,
                                             std::move(tables), std::move(relsets));
}

// ---------------------------------------------------------------------------

long long ipow_checked(long long base, int exp, long long cap) {
    long long r = 1;
    for (int i = 0; i < exp; ++i) {
        if (base != 0 && r > cap / base)
            throw SizeCapExceeded("power size exceeds cap");
        r *= base;
    }
    return r;
}

long long tuple_index(const Tuple& t, int n) {
    long long idx = 0;
    for (int a : t) idx = idx * n + a;
    return idx;
}

Tuple tuple_of_index(long long idx, int n, int k) {
    Tuple t(k, 0);
    for (int i = k - 1; i >= 0; --i) {
        t[i] = static_cast<int>(idx % n);
        idx /= n;
    }
    return t;
}

namespace {

// Odometer over {0..n-1}^k in lexicographic order. Returns false past the end.
bool next_tuple(Tuple& t, int n) {
    for (int i = static_cast<int>(t.size()) - 1; i >= 0; --i) {
        if (++t[i] < n) return true;
        t[i] = 0;
    }
    return false;
}

} // namespace

StructurePtr power(const Structure& m, int k, const SizeCaps& caps) {
    if (k < 1) throw ValidationFailed("power exponent must be >= 1");
    const int n = m.size();
    long long pn = ipow_checked(n, k, caps.max_carrier);
    if (pn > caps.max_carrier)
        throw SizeCapExceeded("power carrier " + std::to_string(pn) + " exceeds cap " +
                              std::to_string(caps.max_carrier));

    const auto& sig = m.sig();
    long long cells = 0;
    for (const auto& op : sig->ops()) {
        long long c = 1;
        for (int i = 0; i < op.arity; ++i) {
            c *= pn;
            if (c > caps.max_table_cells)
                throw SizeCapExceeded("power op tables exceed cell cap");
        }
        cells += c;
        if (cells > caps.max_table_cells)
            throw SizeCapExceeded("power op tables exceed cell cap");
    }

    std::vector<std::vector<int>> tables;
    for (size_t oi = 0; oi < sig->ops().size(); ++oi) {
        const int ar = sig->ops()[oi].arity;
        if (ar == 0) {
            Tuple c(k, m.table(static_cast<int>(oi))[0]);
            tables.push_back({static_cast<int>(tuple_index(c, n))});
            continue;
        }
        long long rows = 1;
        for (int i = 0; i < ar; ++i) rows *= pn;
        std::vector<int> tab(static_cast<size_t>(rows));
        Tuple args(ar, 0); // element indices in the power
        std::vector<Tuple> arg_tuples(ar, Tuple(k, 0));
        long long row = 0;
        while (true) {
            Tuple res(k);
            Tuple pointwise(ar);
            for (int c = 0; c < k; ++c) {
                for (int j = 0; j < ar; ++j) pointwise[j] = arg_tuples[j][c];
                res[c] = m.apply(static_cast<int>(oi), pointwise);
            }
            tab[static_cast<size_t>(row)] = static_cast<int>(tuple_index(res, n));
            ++row;
            // advance the odometer of argument element indices
            int pos = ar - 1;
            while (pos >= 0) {
                if (++args[pos] < pn) {
                    arg_tuples[pos] = tuple_of_index(args[pos], n, k);
                    break;
                }
                args[pos] = 0;
                arg_tuples[pos] = Tuple(k, 0);
                --pos;
            }
            if (pos < 0) break;
        }
        tables.push_back(std::move(tab));
    }

    std::vector<std::vector<Tuple>> relsets;
    for (size_t ri = 0; ri < sig->rels().size(); ++ri) {
        const int ar = sig->rels()[ri].arity;
        long long combos = 1;
        for (int i = 0; i < ar; ++i) {
            combos *= pn;
            if (combos > caps.max_table_cells)
                throw SizeCapExceeded("power relation enumeration exceeds cap");
        }
        std::vector<Tuple> rs;
        Tuple elems(ar, 0);
        std::vector<Tuple> elem_tuples(ar, Tuple(k, 0));
        while (true) {
            bool in = true;
            Tuple pointwise(ar);
            for (int c = 0; c < k && in; ++c) {
                for (int j = 0; j < ar; ++j) pointwise[j] = elem_tuples[j][c];
                in = m.rel_holds(static_cast<int>(ri), pointwise);
            }
            if (in) rs.push_back(elems);
            int pos = ar - 1;
            while (pos >= 0) {
                if (++elems[pos] < pn) {
                    elem_tuples[pos] = tuple_of_index(elems[pos], n, k);
                    break;
                }
                elems[pos] = 0;
                elem_tuples[pos] = Tuple(k, 0);
                --pos;
            }
            if (pos < 0) break;
        }
        relsets.push_back(std::move(rs));
    }

    return make_structure(m.name() + "^" + std::to_string(k), sig, static_cast<int>(pn),
                          std::move(tables), std::move(relsets));
}

// ---------------------------------------------------------------------------
// Closure in a power, optionally with derivations.

namespace {

struct ClosureState {
    std::vector<Tuple> elems;           // insertion order
    std::map<Tuple, int> index;         // tuple -> id
    std::vector<Derivation> derivs;

    int add(const Tuple& t, Derivation d) {
        auto it = index.find(t);
        if (it != index.end()) return it->second;
        int id = static_cast<int>(elems.size());
        elems.push_back(t);
        index.emplace(t, id);
        derivs.push_back(std::move(d));
        return id;
    }
    bool contains(const Tuple& t) const { return index.count(t) != 0; }
};

ClosureState close_tuples(const Structure& m, int k, const std::vector<Tuple>& gens,
                          const SizeCaps& caps) {
    for (const auto& g : gens) {
        if (static_cast<int>(g.size()) != k)
            throw ValidationFailed("generator tuple has wrong length");
        for (int v : g)
            if (v < 0 || v >= m.size())
                throw ValidationFailed("generator tuple component out of range");
    }
    ClosureState st;
    for (size_t i = 0; i < gens.size(); ++i)
        st.add(gens[i], Derivation{-1, {static_cast<int>(i)}});
    const auto& ops = m.sig()->ops();
    for (size_t oi = 0; oi < ops.size(); ++oi) {
        if (ops[oi].arity == 0) {
            Tuple c(k, m.table(static_cast<int>(oi))[0]);
            st.add(c, Derivation{static_cast<int>(oi), {}});
        }
    }

    // Frontier loop: combine each new element with everything present.
    for (size_t next = 0; next < st.elems.size(); ++next) {
        if (static_cast<long long>(st.elems.size()) > caps.max_carrier)
            throw SizeCapExceeded("closure in power exceeds carrier cap");
        for (size_t oi = 0; oi < ops.size(); ++oi) {
            const int ar = ops[oi].arity;
            if (ar == 0) continue;
            // every argument tuple using element `next` at least once, other
            // slots ranging over elements already known (ids 0..limit)
            const int limit = static_cast<int>(next);
            Tuple slot(ar, 0);
            while (true) {
                bool uses_next = false;
                for (int j = 0; j < ar; ++j)
                    if (slot[j] == limit) uses_next = true;
                if (uses_next) {
                    Tuple res(k);
                    Tuple pointwise(ar);
                    for (int c = 0; c < k; ++c) {
                        for (int j = 0; j < ar; ++j) pointwise[j] = st.elems[slot[j]][c];
                        res[c] = m.apply(static_cast<int>(oi), pointwise);
                    }
                    Tuple args(slot.begin(), slot.end());
                    st.add(res, Derivation{static_cast<int>(oi), args});
                }
                int pos = ar - 1;
                while (pos >= 0) {
                    if (++slot[pos] <= limit) break;
                    slot[pos] = 0;
                    --pos;
                }
                if (pos < 0) break;
            }
        }
    }
    if (static_cast<long long>(st.elems.size()) > caps.max_carrier)
        throw SizeCapExceeded("closure in power exceeds carrier cap");
    return st;
}

} // namespace

std::vector<Tuple> closure_in_power(const Structure& m, int k, const std::vector<Tuple>& gens,
                                    const SizeCaps& caps) {
    auto st = close_tuples(m, k, gens, caps);
    std::vector<Tuple> out = st.elems;
    std::sort(out.begin(), out.end());
    return out;
}

ClosureWithDerivations closure_in_power_derived(const Structure& m, int k,
                                                const std::vector<Tuple>& gens,
                                                const SizeCaps& caps) {
    auto st = close_tuples(m, k, gens, caps);
    // sort carrier, remap derivations
    std::vector<int> order(st.elems.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return st.elems[a] < st.elems[b]; });
    std::vector<int> rank(order.size());
    for (size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);

    ClosureWithDerivations out;
    out.carrier.resize(order.size());
    out.derivations.resize(order.size());
    for (size_t i = 0; i < order.size(); ++i) {
        out.carrier[i] = st.elems[order[i]];
        Derivation d = st.derivs[order[i]];
        if (d.op >= 0)
            for (int& a : d.args) a = rank[a];
        out.derivations[i] = std::move(d);
    }
    // Derivation args now use sorted ids, so evaluation must follow the
    // original insertion order (argument elements were inserted earlier).
    out.eval_order.resize(order.size());
    for (size_t i = 0; i < order.size(); ++i) out.eval_order[i] = rank[i];
    return out;
}

StructurePtr structure_on_tuples(const Structure& m, int k, const std::vector<Tuple>& carrier,
                                 std::string name, const SizeCaps& caps) {
    if (!std::is_sorted(carrier.begin(), carrier.end()))
        throw ValidationFailed("carrier tuples must be sorted");
    const int sz = static_cast<int>(carrier.size());
    auto find_id = [&](const Tuple& t) -> int {
        auto it = std::lower_bound(carrier.begin(), carrier.end(), t);
        if (it == carrier.end() || *it != t) return -1;
        return static_cast<int>(it - carrier.begin());
    };

    const auto& sig = m.sig();
    std::vector<std::vector<int>> tables;
    long long cells = 0;
    for (size_t oi = 0; oi < sig->ops().size(); ++oi) {
        const int ar = sig->ops()[oi].arity;
        if (sz == 0) {
            if (ar == 0) throw ValidationFailed("empty carrier with constant");
            tables.push_back({});
            continue;
        }
        long long rows = 1;
        for (int i = 0; i < ar; ++i) {
            rows *= sz;
            if (rows > caps.max_table_cells)
                throw SizeCapExceeded("induced op table exceeds cell cap");
        }
        cells += rows;
        if (cells > caps.max_table_cells)
            throw SizeCapExceeded("induced op tables exceed cell cap");
        std::vector<int> tab(static_cast<size_t>(rows));
        Tuple slot(ar, 0);
        long long row = 0;
        while (true) {
            Tuple res(k);
            Tuple pointwise(ar);
            for (int c = 0; c < k; ++c) {
                for (int j = 0; j < ar; ++j) pointwise[j] = carrier[slot[j]][c];
                res[c] = m.apply(static_cast<int>(oi), pointwise);
            }
            int id = find_id(res);
            if (id < 0)
                throw ValidationFailed("carrier not closed under '" + sig->ops()[oi].name +
                                       "' at " + tuple_str(res));
            tab[static_cast<size_t>(row)] = id;
            ++row;
            if (ar == 0) break;
            int pos = ar - 1;
            while (pos >= 0) {
                if (++slot[pos] < sz) break;
                slot[pos] = 0;
                --pos;
            }
            if (pos < 0) break;
        }
        tables.push_back(std::move(tab));
    }

    std::vector<std::vector<Tuple>> relsets;
    for (size_t ri = 0; ri < sig->rels().size(); ++ri) {
        const int ar = sig->rels()[ri].arity;
        std::vector<Tuple> rs;
        if (sz > 0) {
            long long combos = 1;
            for (int i = 0; i < ar; ++i) {
                combos *= sz;
                if (combos > caps.max_table_cells)
                    throw SizeCapExceeded("induced relation enumeration exceeds cap");
            }
            Tuple slot(ar, 0);
            while (true) {
                bool in = true;
                Tuple pointwise(ar);
                for (int c = 0; c < k && in; ++c) {
                    for (int j = 0; j < ar; ++j) pointwise[j] = carrier[slot[j]][c];
                    in = m.rel_holds(static_cast<int>(ri), pointwise);
                }
                if (in) rs.push_back(slot);
                int pos = ar - 1;
                while (pos >= 0) {
                    if (++slot[pos] < sz) break;
                    slot[pos] = 0;
                    --pos;
                }
                if (pos < 0) break;
            }
        }
        relsets.push_back(std::move(rs));
    }
    return make_structure(std::move(name), sig, sz, std::move(tables), std::move(relsets));
}

// ---------------------------------------------------------------------------

SubstructureResult generated_substructure(const Structure& s, const std::vector<int>& gens,
                                          bool allow_empty, const SizeCaps& caps) {
    for (int g : gens)
        if (g < 0 || g >= s.size()) throw ValidationFailed("generator out of range");

    std::vector<char> in(static_cast<size_t>(std::max(s.size(), 1)), 0);
    std::vector<int> elems;
    auto add = [&](int e) {
        if (!in[e]) {
            in[e] = 1;
            elems.push_back(e);
        }
    };
    for (int g : gens) add(g);
    const auto& ops = s.sig()->ops();
    for (size_t oi = 0; oi < ops.size(); ++oi)
        if (ops[oi].arity == 0) add(s.table(static_cast<int>(oi))[0]);

    for (size_t next = 0; next < elems.size(); ++next) {
        for (size_t oi = 0; oi < ops.size(); ++oi) {
            const int ar = ops[oi].arity;
            if (ar == 0) continue;
            const int limit = static_cast<int>(next);
            Tuple slot(ar, 0);
            while (true) {
                bool uses_next = false;
                for (int j = 0; j < ar; ++j)
                    if (slot[j] == limit) uses_next = true;
                if (uses_next) {
                    Tuple args(ar);
                    for (int j = 0; j < ar; ++j) args[j] = elems[slot[j]];
                    add(s.apply(static_cast<int>(oi), args));
                }
                int pos = ar - 1;
                while (pos >= 0) {
                    if (++slot[pos] <= limit) break;
                    slot[pos] = 0;
                    --pos;
                }
                if (pos < 0) break;
            }
        }
    }

    if (elems.empty() && !allow_empty)
        throw EmptyGeneration("generated substructure is empty (no generators, no constants)");

    std::sort(elems.begin(), elems.end());
    const int sz = static_cast<int>(elems.size());
    auto local_of = [&](int parent) {
        return static_cast<int>(std::lower_bound(elems.begin(), elems.end(), parent) -
                                elems.begin());
    };

    std::vector<std::vector<int>> tables;
    for (size_t oi = 0; oi < ops.size(); ++oi) {
        const int ar = ops[oi].arity;
        if (sz == 0) {
            tables.push_back({});
            continue;
        }
        long long rows = 1;
        for (int i = 0; i < ar; ++i) rows *= sz;
        std::vector<int> tab(static_cast<size_t>(rows));
        Tuple slot(ar, 0);
        long long row = 0;
        while (true) {
            Tuple args(ar);
            for (int j = 0; j < ar; ++j) args[j] = elems[slot[j]];
            tab[static_cast<size_t>(row)] = local_of(s.apply(static_cast<int>(oi), args));
            ++row;
            if (ar == 0) break;
            int pos = ar - 1;
            while (pos >= 0) {
                if (++slot[pos] < sz) break;
                slot[pos] = 0;
                --pos;
            }
            if (pos < 0) break;
        }
        tables.push_back(std::move(tab));
    }

    std::vector<std::vector<Tuple>> relsets;
    const auto& rels = s.sig()->rels();
    for (size_t ri = 0; ri < rels.size(); ++ri) {
        std::vector<Tuple> rs;
        for (const auto& t : s.relset(static_cast<int>(ri))) {
            bool inside = true;
            for (int v : t)
                if (!in[v]) inside = false;
            if (!inside) continue;
            Tuple loc(t.size());
            for (size_t j = 0; j < t.size(); ++j) loc[j] = local_of(t[j]);
            rs.push_back(std::move(loc));
        }
        relsets.push_back(std::move(rs));
    }

    SubstructureResult out;
    out.sub = make_structure(s.name() + "|sub", s.sig(), sz, std::move(tables),
                             std::move(relsets));
    out.inclusion = elems;
    return out;
}

std::vector<std::vector<int>> all_subuniverses(const Structure& s, bool allow_empty,
                                               long long max_count) {
    std::set<std::vector<int>> seen;
    std::vector<std::vector<int>> work;

    auto closure_of = [&](const std::vector<int>& gens) {
        auto r = generated_substructure(s, gens, /*allow_empty=*/true);
        return r.inclusion;
    };

    const bool has_consts = s.sig()->has_nullary_op();
    if (has_consts) {
        auto base = closure_of({});
        seen.insert(base);
        work.push_back(base);
    } else {
        if (allow_empty) {
            seen.insert({});
            work.push_back({});
        }
        for (int x = 0; x < s.size(); ++x) {
            auto c = closure_of({x});
            if (seen.insert(c).second) work.push_back(c);
        }
    }

    for (size_t next = 0; next < work.size(); ++next) {
        if (static_cast<long long>(seen.size()) > max_count)
            throw SizeCapExceeded("subuniverse enumeration exceeds count cap");
        std::vector<int> base = work[next];
        std::vector<char> in(static_cast<size_t>(std::max(s.size(), 1)), 0);
        for (int e : base) in[e] = 1;
        for (int x = 0; x < s.size(); ++x) {
            if (in[x]) continue;
            auto ext = base;
            ext.push_back(x);
            auto c = closure_of(ext);
            if (seen.insert(c).second) work.push_back(c);
        }
    }

    std::vector<std::vector<int>> out(seen.begin(), seen.end());
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    if (!allow_empty) {
        out.erase(std::remove_if(out.begin(), out.end(),
                                 [](const auto& v) { return v.empty(); }),
                  out.end());
    }
    return out;
}

uint64_t iso_fingerprint(const Structure& s) {
    // Multiset of per-element local profiles; invariant under carrier
    // relabeling. Collisions only cost extra isomorphism searches.
    const int n = s.size();
    std::vector<uint64_t> profile(static_cast<size_t>(std::max(n, 1)), 0xcbf29ce484222325ULL);
    auto mix = [](uint64_t h, uint64_t v) {
        h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
        return h;
    };
    const auto& ops = s.sig()->ops();
    for (size_t oi = 0; oi < ops.size(); ++oi) {
        const int ar = ops[oi].arity;
        if (n == 0) break;
        if (ar == 0) {
            profile[s.table(static_cast<int>(oi))[0]] =
                mix(profile[s.table(static_cast<int>(oi))[0]], 101 + oi);
            continue;
        }
        std::vector<int> out_count(n, 0), diag(n, 0);
        const auto& tab = s.table(static_cast<int>(oi));
        for (int v : tab) out_count[v]++;
        // diagonal behaviour f(x,..,x)
        for (int x = 0; x < n; ++x) {
            long long idx = 0;
            for (int j = 0; j < ar; ++j) idx = idx * n + x;
            diag[x] = (tab[static_cast<size_t>(idx)] == x) ? 1 : 0;
        }
        for (int x = 0; x < n; ++x) {
            profile[x] = mix(profile[x], 7919 * (oi + 1) + out_count[x]);
            profile[x] = mix(profile[x], 104729 * (oi + 1) + diag[x]);
        }
    }
    const auto& rels = s.sig()->rels();
    for (size_t ri = 0; ri < rels.size(); ++ri) {
        const int ar = rels[ri].arity;
        std::vector<std::vector<int>> pos_count(static_cast<size_t>(ar),
                                                std::vector<int>(std::max(n, 1), 0));
        for (const auto& t : s.relset(static_cast<int>(ri)))
            for (int j = 0; j < ar; ++j) pos_count[j][t[j]]++;
        for (int x = 0; x < n; ++x)
            for (int j = 0; j < ar; ++j)
                profile[x] = mix(profile[x], 1299709 * (ri + 1) + 31 * j + pos_count[j][x]);
    }
    std::sort(profile.begin(), profile.begin() + std::max(n, 1));
    uint64_t h = 1469598103934665603ULL;
    h = mix(h, static_cast<uint64_t>(n));
    for (size_t ri = 0; ri < rels.size(); ++ri)
        h = mix(h, s.relset(static_cast<int>(ri)).size());
    if (n > 0)
        for (int x = 0; x < n; ++x) h = mix(h, profile[x]);
    return h;
}

} // namespace dualforge
