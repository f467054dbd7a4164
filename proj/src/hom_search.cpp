#include "dualforge/hom_search.hpp"

#include "dualforge/errors.hpp"

#include <algorithm>
#include <atomic>
#include <future>
#include <map>
#include <thread>

namespace dualforge {

namespace {

// Plain dynamic bitset; widths here are the codomain size (tiny in practice,
// capped at the carrier cap).
struct Bits {
    std::vector<uint64_t> w;
    void init_full(int n) {
        w.assign(static_cast<size_t>((n + 63) / 64), ~0ULL);
        int rem = n % 64;
        if (rem) w.back() = (1ULL << rem) - 1;
    }
    bool test(int i) const { return (w[i >> 6] >> (i & 63)) & 1; }
    void clear(int i) { w[i >> 6] &= ~(1ULL << (i & 63)); }
    void and_with(const Bits& o) {
        for (size_t i = 0; i < w.size(); ++i) w[i] &= o.w[i];
    }
    bool empty() const {
        for (uint64_t x : w)
            if (x) return false;
        return true;
    }
    int count() const {
        int c = 0;
        for (uint64_t x : w) c += __builtin_popcountll(x);
        return c;
    }
};

struct BinRelEdge {
    int rel;
    int partner;
    bool forward; // true: (me, partner) in rel; false: (partner, me)
};

struct WideRelOcc {
    int rel;
    int tuple;
};

struct Model {
    const Structure* A;
    const Structure* B;
    int n, m;
    SearchMode mode;

    std::vector<int> order;                      // variable order
    std::vector<std::vector<BinRelEdge>> edges;  // per dom element
    std::vector<std::vector<WideRelOcc>> wide;   // per dom element, arity != 2 tuples
    std::vector<std::vector<Bits>> fwd, bwd;     // per binary rel: value -> allowed partners
    std::vector<const std::vector<Tuple>*> wide_tuples; // per rel id (arity != 2 only used)
};

struct State {
    std::vector<int> assign;   // -1 unassigned
    std::vector<Bits> cand;
    std::vector<char> used;    // injective modes
    int unassigned = 0;
};

class Searcher {
public:
    Searcher(const Model& model, long long budget, std::atomic<long long>& nodes)
        : md(model), budget_(budget), nodes_(nodes) {}

    std::vector<std::vector<int>> run(State st) {
        results_.clear();
        dfs(st);
        return std::move(results_);
    }

    // Assign + propagate; false on dead end. Exposed for the root split.
    static bool assign_value(const Model& md, State& st, int var, int val) {
        std::vector<std::pair<int, int>> queue;
        queue.emplace_back(var, val);
        size_t qi = 0;
        while (qi < queue.size()) {
            auto [x, v] = queue[qi++];
            if (st.assign[x] != -1) {
                if (st.assign[x] != v) return false;
                continue;
            }
            if (!st.cand[x].test(v)) return false;
            if (md.mode != SearchMode::All) {
                if (st.used[v]) return false;
                st.used[v] = 1;
            }
            st.assign[x] = v;
            st.unassigned--;

            // forced values from op tables: any row whose arguments are all
            // assigned and mention x pins the image of the result element
            const auto& ops = md.A->sig()->ops();
            for (size_t oi = 0; oi < ops.size(); ++oi) {
                const int ar = ops[oi].arity;
                if (ar == 0) continue;
                if (ar == 1) {
                    int res = md.A->table(static_cast<int>(oi))[x];
                    int fv = md.B->table(static_cast<int>(oi))[v];
                    queue.emplace_back(res, fv);
                    continue;
                }
                if (ar == 2) {
                    const auto& ta = md.A->table(static_cast<int>(oi));
                    const auto& tb = md.B->table(static_cast<int>(oi));
                    const int n = md.n, m = md.m;
                    for (int y = 0; y < n; ++y) {
                        int hy = st.assign[y];
                        if (hy == -1) continue;
                        queue.emplace_back(ta[static_cast<size_t>(x) * n + y],
                                           tb[static_cast<size_t>(v) * m + hy]);
                        queue.emplace_back(ta[static_cast<size_t>(y) * n + x],
                                           tb[static_cast<size_t>(hy) * m + v]);
                    }
                    continue;
                }
                // general arity: walk rows containing x with all args assigned
                Tuple args(ar, 0);
                while (true) {
                    bool uses = false, all = true;
                    for (int j = 0; j < ar; ++j) {
                        if (args[j] == x) uses = true;
                        else if (st.assign[args[j]] == -1) all = false;
                    }
                    if (uses && all) {
                        Tuple imgs(ar);
                        for (int j = 0; j < ar; ++j)
                            imgs[j] = (args[j] == x) ? v : st.assign[args[j]];
                        queue.emplace_back(md.A->apply(static_cast<int>(oi), args),
                                           md.B->apply(static_cast<int>(oi), imgs));
                    }
                    int pos = ar - 1;
                    while (pos >= 0) {
                        if (++args[pos] < md.n) break;
                        args[pos] = 0;
                        --pos;
                    }
                    if (pos < 0) break;
                }
            }

            // binary relation edges: check or prune the partner
            for (const auto& e : md.edges[x]) {
                const Bits& allowed = e.forward ? md.fwd[e.rel][v] : md.bwd[e.rel][v];
                int p = e.partner;
                if (st.assign[p] != -1) {
                    if (!allowed.test(st.assign[p])) return false;
                } else {
                    st.cand[p].and_with(allowed);
                    if (st.cand[p].empty()) return false;
                }
            }

            // wider (and unary) relation tuples: verify once complete
            for (const auto& occ : md.wide[x]) {
                const Tuple& t = (*md.wide_tuples[occ.rel])[occ.tuple];
                bool all = true;
                for (int e : t)
                    if (st.assign[e] == -1) all = false;
                if (!all) continue;
                Tuple imgs(t.size());
                for (size_t j = 0; j < t.size(); ++j) imgs[j] = st.assign[t[j]];
                if (!md.B->rel_holds(occ.rel, imgs)) return false;
            }

            // injective modes: strip v from other candidate sets
            if (md.mode != SearchMode::All) {
                for (int y = 0; y < md.n; ++y)
                    if (st.assign[y] == -1 && st.cand[y].test(v)) {
                        st.cand[y].clear(v);
                        if (st.cand[y].empty()) return false;
                    }
            }
        }
        return true;
    }

private:
    void dfs(State& st) {
        if (st.unassigned == 0) {
            results_.push_back(st.assign);
            return;
        }
        int var = -1;
        for (int cand_var : md.order)
            if (st.assign[cand_var] == -1) {
                var = cand_var;
                break;
            }
        for (int v = 0; v < md.m; ++v) {
            if (!st.cand[var].test(v)) continue;
            if (md.mode != SearchMode::All && st.used[v]) continue;
            long long seen = nodes_.fetch_add(1, std::memory_order_relaxed) + 1;
            if (seen > budget_)
                throw BudgetExceeded("hom search exceeded node budget",
                                     static_cast<long long>(results_.size()));
            State child = st; // candidate sets are small; copy per branch
            if (assign_value(md, child, var, v)) dfs(child);
        }
    }

    const Model& md;
    long long budget_;
    std::atomic<long long>& nodes_;
    std::vector<std::vector<int>> results_;
};

Model build_model(const Structure& A, const Structure& B, SearchMode mode) {
    Model md;
    md.A = &A;
    md.B = &B;
    md.n = A.size();
    md.m = B.size();
    md.mode = mode;

    const auto& rels = A.sig()->rels();
    md.edges.resize(static_cast<size_t>(std::max(md.n, 1)));
    md.wide.resize(static_cast<size_t>(std::max(md.n, 1)));
    md.fwd.resize(rels.size());
    md.bwd.resize(rels.size());
    md.wide_tuples.resize(rels.size());

    for (size_t ri = 0; ri < rels.size(); ++ri) {
        md.wide_tuples[ri] = &B.relset(static_cast<int>(ri)); // placeholder; fixed below
        if (rels[ri].arity == 2) {
            md.fwd[ri].resize(static_cast<size_t>(std::max(md.m, 1)));
            md.bwd[ri].resize(static_cast<size_t>(std::max(md.m, 1)));
            for (int v = 0; v < md.m; ++v) {
                md.fwd[ri][v].w.assign(static_cast<size_t>((md.m + 63) / 64), 0);
                md.bwd[ri][v].w.assign(static_cast<size_t>((md.m + 63) / 64), 0);
            }
            for (const auto& t : B.relset(static_cast<int>(ri))) {
                md.fwd[ri][t[0]].w[t[1] >> 6] |= 1ULL << (t[1] & 63);
                md.bwd[ri][t[1]].w[t[0] >> 6] |= 1ULL << (t[0] & 63);
            }
            for (const auto& t : A.relset(static_cast<int>(ri))) {
                md.edges[t[0]].push_back({static_cast<int>(ri), t[1], true});
                if (t[1] != t[0])
                    md.edges[t[1]].push_back({static_cast<int>(ri), t[0], false});
                else
                    md.edges[t[0]].push_back({static_cast<int>(ri), t[0], false});
            }
        } else {
            md.wide_tuples[ri] = &A.relset(static_cast<int>(ri));
            const auto& ts = A.relset(static_cast<int>(ri));
            for (size_t ti = 0; ti < ts.size(); ++ti) {
                std::vector<char> seen(static_cast<size_t>(std::max(md.n, 1)), 0);
                for (int e : ts[ti]) {
                    if (!seen[e]) {
                        seen[e] = 1;
                        md.wide[e].push_back({static_cast<int>(ri), static_cast<int>(ti)});
                    }
                }
            }
        }
    }

    // variable order: descending constraint degree (table cells + relation
    // occurrences touching the element), ties by index
    std::vector<long long> degree(static_cast<size_t>(std::max(md.n, 1)), 0);
    const auto& ops = A.sig()->ops();
    for (size_t oi = 0; oi < ops.size(); ++oi) {
        const int ar = ops[oi].arity;
        if (ar == 0 || md.n == 0) continue;
        const auto& tab = A.table(static_cast<int>(oi));
        long long rows = static_cast<long long>(tab.size());
        // every element appears in ar * n^(ar-1) argument slots; results add too
        long long per = ar * (rows / std::max(md.n, 1));
        for (int x = 0; x < md.n; ++x) degree[x] += per;
        for (int v : tab) degree[v] += 1;
    }
    for (size_t ri = 0; ri < rels.size(); ++ri)
        for (const auto& t : A.relset(static_cast<int>(ri)))
            for (int e : t) degree[e] += 4;

    md.order.resize(static_cast<size_t>(md.n));
    for (int i = 0; i < md.n; ++i) md.order[i] = i;
    std::stable_sort(md.order.begin(), md.order.end(),
                     [&](int a, int b) { return degree[a] > degree[b]; });
    return md;
}

State initial_state(const Model& md) {
    State st;
    st.assign.assign(static_cast<size_t>(std::max(md.n, 1)), -1);
    st.unassigned = md.n;
    st.cand.resize(static_cast<size_t>(std::max(md.n, 1)));
    for (int i = 0; i < md.n; ++i) st.cand[i].init_full(md.m);
    st.used.assign(static_cast<size_t>(std::max(md.m, 1)), 0);
    return st;
}

HomSet search(const StructurePtr& dom, const StructurePtr& cod, SearchMode mode,
              const HomSearchConfig& cfg) {
    if (!(*dom->sig() == *cod->sig()))
        throw SignatureMismatch("hom search requires equal signatures");
    if (mode == SearchMode::Automorphism && !dom->same_content(*cod))
        throw ValidationFailed("automorphism search requires dom == cod");

    HomSet out;
    out.dom = dom;
    out.cod = cod;

    if (dom->size() == 0) {
        out.maps.push_back({}); // the empty map
        return out;
    }
    if (cod->size() == 0) return out;
    if (mode != SearchMode::All && dom->size() > cod->size()) return out;
    if (mode == SearchMode::Automorphism && dom->size() != cod->size()) return out;

    Model md = build_model(*dom, *cod, mode);
    State root = initial_state(md);

    std::atomic<long long> nodes{0};

    // nullary ops pre-assign their images (forced)
    const auto& ops = dom->sig()->ops();
    for (size_t oi = 0; oi < ops.size(); ++oi) {
        if (ops[oi].arity != 0) continue;
        int ca = dom->table(static_cast<int>(oi))[0];
        int cb = cod->table(static_cast<int>(oi))[0];
        if (!Searcher::assign_value(md, root, ca, cb)) return out; // no homs at all
    }

    std::vector<std::vector<int>> found;
    if (!cfg.parallel || md.n == 0) {
        Searcher s(md, cfg.budget, nodes);
        found = s.run(root);
    } else {
        // branch on the first unassigned variable; each task owns a block of
        // its candidate values (disjoint lexicographic intervals)
        int var = -1;
        for (int cand_var : md.order)
            if (root.assign[cand_var] == -1) {
                var = cand_var;
                break;
            }
        if (var == -1) {
            Searcher s(md, cfg.budget, nodes);
            found = s.run(root);
        } else {
            std::vector<int> vals;
            for (int v = 0; v < md.m; ++v)
                if (root.cand[var].test(v)) vals.push_back(v);
            unsigned nt = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
            nt = std::min<unsigned>(nt, static_cast<unsigned>(std::max<size_t>(vals.size(), 1)));
            std::vector<std::future<std::vector<std::vector<int>>>> futs;
            for (unsigned t = 0; t < nt; ++t) {
                futs.push_back(std::async(std::launch::async, [&, t]() {
                    std::vector<std::vector<int>> local;
                    for (size_t i = t; i < vals.size(); i += nt) {
                        long long seen = nodes.fetch_add(1, std::memory_order_relaxed) + 1;
                        if (seen > cfg.budget)
                            throw BudgetExceeded("hom search exceeded node budget", 0);
                        State child = root;
                        if (Searcher::assign_value(md, child, var, vals[i])) {
                            Searcher s(md, cfg.budget, nodes);
                            auto part = s.run(child);
                            local.insert(local.end(), part.begin(), part.end());
                        }
                    }
                    return local;
                }));
            }
            for (auto& f : futs) {
                auto part = f.get();
                found.insert(found.end(), part.begin(), part.end());
            }
        }
    }

    if (mode == SearchMode::Automorphism) {
        // the inverse of a bijective self-hom of a finite structure is again a
        // hom; verify anyway so a regression here cannot pass silently
        for (const auto& h : found) {
            std::vector<int> inv(h.size());
            for (size_t i = 0; i < h.size(); ++i) inv[h[i]] = static_cast<int>(i);
            if (!is_homomorphism(inv, *cod, *dom))
                throw InternalInvariantViolation("bijective self-hom with non-hom inverse");
        }
    }

    std::sort(found.begin(), found.end());
    out.maps = std::move(found);
    out.nodes = nodes.load();
    return out;
}

} // namespace

HomSet enumerate_homs(const StructurePtr& dom, const StructurePtr& cod,
                      const HomSearchConfig& cfg) {
    return search(dom, cod, SearchMode::All, cfg);
}

HomSet enumerate_embeddings(const StructurePtr& dom, const StructurePtr& cod,
                            const HomSearchConfig& cfg) {
    return search(dom, cod, SearchMode::Injective, cfg);
}

HomSet enumerate_automorphisms(const StructurePtr& s, const HomSearchConfig& cfg) {
    return search(s, s, SearchMode::Automorphism, cfg);
}

// ---------------------------------------------------------------------------
// Isomorphism (declared in structure.hpp; needs the search engine)

std::optional<std::vector<int>> isomorphic(const Structure& a, const Structure& b,
                                           const SizeCaps& caps) {
    if (!(*a.sig() == *b.sig()))
        throw SignatureMismatch("isomorphic requires equal signatures");
    if (a.size() != b.size()) return std::nullopt;
    if (a.size() == 0) return std::vector<int>{};
    for (size_t ri = 0; ri < a.sig()->rels().size(); ++ri)
        if (a.relset(static_cast<int>(ri)).size() != b.relset(static_cast<int>(ri)).size())
            return std::nullopt;

    auto ap = std::make_shared<const Structure>(a);
    auto bp = std::make_shared<const Structure>(b);
    HomSearchConfig cfg;
    cfg.budget = caps.map_budget;
    HomSet bij = enumerate_embeddings(ap, bp, cfg);
    for (const auto& h : bij.maps) {
        std::vector<int> inv(h.size());
        for (size_t i = 0; i < h.size(); ++i) inv[h[i]] = static_cast<int>(i);
        if (is_homomorphism(inv, b, a)) return h;
    }
    return std::nullopt;
}

IsoClasses iso_classify(const std::vector<StructurePtr>& items, const SizeCaps& caps) {
    IsoClasses out;
    out.class_of.assign(items.size(), -1);
    std::vector<uint64_t> fp(items.size());
    for (size_t i = 0; i < items.size(); ++i) fp[i] = iso_fingerprint(*items[i]);
    for (size_t i = 0; i < items.size(); ++i) {
        int found = -1;
        for (size_t r = 0; r < out.reps.size(); ++r) {
            size_t rep = static_cast<size_t>(out.reps[r]);
            if (fp[rep] != fp[i]) continue;
            if (items[rep]->size() != items[i]->size()) continue;
            if (isomorphic(*items[rep], *items[i], caps)) {
                found = static_cast<int>(r);
                break;
            }
        }
        if (found == -1) {
            out.reps.push_back(static_cast<int>(i));
            found = static_cast<int>(out.reps.size()) - 1;
        }
        out.class_of[i] = found;
    }
    return out;
}

} // namespace dualforge
