#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <unordered_map>
#include <vector>

#include "eikorec/geometry.hpp"

namespace eikorec {
namespace {

// ---------------------------------------------------------------------------
// Geometric predicates (long double gives enough slack for unit-square
// inputs; no adaptive arithmetic needed at these scales).

double orient2d(Vec2 a, Vec2 b, Vec2 c) {
    long double v = (static_cast<long double>(b.x) - a.x) * (static_cast<long double>(c.y) - a.y) -
                    (static_cast<long double>(b.y) - a.y) * (static_cast<long double>(c.x) - a.x);
    return static_cast<double>(v);
}

// > 0 iff p strictly inside the circumcircle of CCW (a, b, c).
double in_circle(Vec2 a, Vec2 b, Vec2 c, Vec2 p) {
    long double ax = a.x - p.x, ay = a.y - p.y;
    long double bx = b.x - p.x, by = b.y - p.y;
    long double cx = c.x - p.x, cy = c.y - p.y;
    long double a2 = ax * ax + ay * ay;
    long double b2 = bx * bx + by * by;
    long double c2 = cx * cx + cy * cy;
    long double det = ax * (by * c2 - b2 * cy) - ay * (bx * c2 - b2 * cx) + a2 * (bx * cy - by * cx);
    return static_cast<double>(det);
}

Vec2 circumcenter(Vec2 a, Vec2 b, Vec2 c) {
    double bx = b.x - a.x, by = b.y - a.y;
    double cx = c.x - a.x, cy = c.y - a.y;
    double d = 2.0 * (bx * cy - by * cx);
    double b2 = bx * bx + by * by;
    double c2 = cx * cx + cy * cy;
    double ux = (cy * b2 - by * c2) / d;
    double uy = (bx * c2 - cx * b2) / d;
    return {a.x + ux, a.y + uy};
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

constexpr double kOnEdgeEps = 1e-13;
constexpr int kOutsideRegion = -1;

std::uint64_t edge_key(index_t a, index_t b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
           static_cast<std::uint32_t>(b);
}

struct Tri {
    index_t v[3];
    index_t adj[3]; // adj[j] across edge (v[j+1], v[j+2]); -1 on hull
    int region = kOutsideRegion;
    bool alive = true;
};

// Incremental Delaunay triangulation with constrained edges, vertex split /
// edge split insertion and recursive legalization.
class Triangulator {
  public:
    std::vector<Vec2> pts;
    std::vector<int> point_tag; // kUntagged / kOuterTag / hole id
    std::vector<Tri> tris;
    std::vector<index_t> vert_tri; // one alive triangle per vertex
    std::unordered_map<std::uint64_t, int> constraints; // key -> tag
    index_t hint = 0;

    Triangulator() {
        // Super-triangle generously containing the unit square.
        pts = {{-40.0, -40.0}, {80.0, -40.0}, {0.5, 90.0}};
        point_tag = {kUntagged, kUntagged, kUntagged};
        tris.push_back({{0, 1, 2}, {-1, -1, -1}, kOutsideRegion, true});
        vert_tri = {0, 0, 0};
    }

    index_t add_point(Vec2 p, int tag) {
        pts.push_back(p);
        point_tag.push_back(tag);
        vert_tri.push_back(-1);
        return static_cast<index_t>(pts.size() - 1);
    }

    bool is_constrained(index_t a, index_t b) const {
        return constraints.count(edge_key(a, b)) != 0;
    }

    // Walks from triangle `start` to the triangle containing p.
    // If respect_constraints and the straight path crosses a constrained
    // edge, stops and reports that edge instead.
    struct LocateResult {
        index_t tri = -1;
        int on_edge = -1;      // local edge index if p lies on an edge
        bool blocked = false;  // stopped at a constrained edge
        index_t block_a = -1, block_b = -1;
    };

    LocateResult locate(Vec2 p, index_t start, bool respect_constraints) const {
        LocateResult res;
        index_t t = start;
        if (t < 0 || !tris[t].alive) {
            for (index_t k = static_cast<index_t>(tris.size()) - 1; k >= 0; --k)
                if (tris[k].alive) { t = k; break; }
        }
        int steps = 0;
        const int max_steps = static_cast<int>(tris.size()) * 4 + 64;
        index_t prev = -1;
        while (steps++ < max_steps) {
            const Tri& tr = tris[t];
            double o[3];
            for (int j = 0; j < 3; ++j)
                o[j] = orient2d(pts[tr.v[(j + 1) % 3]], pts[tr.v[(j + 2) % 3]], p);
            int neg = -1;
            double most_neg = -kOnEdgeEps;
            for (int j = 0; j < 3; ++j) {
                if (o[j] < most_neg && tr.adj[j] != prev) {
                    most_neg = o[j];
                    neg = j;
                }
            }
            if (neg < 0) {
                // allow stepping back if that is the only way out
                for (int j = 0; j < 3; ++j)
                    if (o[j] < -kOnEdgeEps) { neg = j; break; }
            }
            if (neg < 0) {
                res.tri = t;
                for (int j = 0; j < 3; ++j)
                    if (std::abs(o[j]) <= kOnEdgeEps) res.on_edge = j;
                return res;
            }
            index_t a = tr.v[(neg + 1) % 3], b = tr.v[(neg + 2) % 3];
            if (respect_constraints && is_constrained(a, b)) {
                res.blocked = true;
                res.tri = t;
                res.block_a = a;
                res.block_b = b;
                return res;
            }
            index_t next = tr.adj[neg];
            if (next < 0) { // outside hull; should not happen for interior points
                res.tri = t;
                return res;
            }
            prev = t;
            t = next;
        }
        throw MeshError("mesh generation: point location failed to terminate");
    }

    int local_index(index_t t, index_t v) const {
        for (int j = 0; j < 3; ++j)
            if (tris[t].v[j] == v) return j;
        return -1;
    }

    int adj_index(index_t t, index_t n) const {
        for (int j = 0; j < 3; ++j)
            if (tris[t].adj[j] == n) return j;
        return -1;
    }

    void set_adj(index_t t, index_t old_n, index_t new_n) {
        if (t < 0) return;
        for (int j = 0; j < 3; ++j)
            if (tris[t].adj[j] == old_n) { tris[t].adj[j] = new_n; return; }
    }

    // Legalizes edge j of triangle t (the edge opposite vertex t.v[j],
    // which must be the freshly inserted point).
    void legalize(index_t t, int j, std::vector<index_t>& touched) {
        index_t n = tris[t].adj[j];
        if (n < 0) return;
        index_t a = tris[t].v[(j + 1) % 3];
        index_t b = tris[t].v[(j + 2) % 3];
        if (is_constrained(a, b)) return;
        index_t p = tris[t].v[j];
        int jn = adj_index(n, t);
        index_t q = tris[n].v[jn];
        if (in_circle(pts[tris[t].v[0]], pts[tris[t].v[1]], pts[tris[t].v[2]], pts[q]) <= 0.0)
            return;
        // Flip: (p,a,b) + (q,b,a) -> (p,a,q) + (p,q,b).
        // n = (q, b, a) up to rotation: v[jn] = q, v[jn+1] = b, v[jn+2] = a.
        index_t ta = tris[t].adj[(j + 2) % 3];        // across (p, a)
        index_t tb = tris[t].adj[(j + 1) % 3];        // across (b, p)
        index_t across_aq = tris[n].adj[(jn + 1) % 3]; // across (a, q)
        index_t across_qb = tris[n].adj[(jn + 2) % 3]; // across (q, b)

        Tri t_new;
        t_new.v[0] = p; t_new.v[1] = a; t_new.v[2] = q;
        Tri n_new;
        n_new.v[0] = p; n_new.v[1] = q; n_new.v[2] = b;
        int region = tris[t].region;
        t_new.region = region;
        n_new.region = region;
        t_new.alive = n_new.alive = true;
        // t_new edges: opp p = (a,q) -> across_aq; opp a = (q,p) -> n (new n); opp q = (p,a) -> ta
        t_new.adj[0] = across_aq;
        t_new.adj[1] = n;
        t_new.adj[2] = ta;
        // n_new edges: opp p = (q,b) -> across_qb; opp q = (b,p) -> tb; opp b = (p,q) -> t
        n_new.adj[0] = across_qb;
        n_new.adj[1] = tb;
        n_new.adj[2] = t;
        tris[t] = t_new;
        tris[n] = n_new;
        set_adj(across_aq, n, t);
        set_adj(across_qb, n, n);
        set_adj(ta, t, t);
        set_adj(tb, t, n);
        vert_tri[p] = t;
        vert_tri[a] = t;
        vert_tri[q] = t;
        vert_tri[b] = n;
        touched.push_back(t);
        touched.push_back(n);
        legalize(t, 0, touched);
        legalize(n, 0, touched);
    }

    // Inserts point pi known to lie strictly inside triangle t.
    void split_triangle(index_t t, index_t pi, std::vector<index_t>& touched) {
        Tri old = tris[t];
        index_t t1 = static_cast<index_t>(tris.size());
        index_t t2 = t1 + 1;
        Tri a, b, c;
        a.v[0] = pi; a.v[1] = old.v[0]; a.v[2] = old.v[1];
        b.v[0] = pi; b.v[1] = old.v[1]; b.v[2] = old.v[2];
        c.v[0] = pi; c.v[1] = old.v[2]; c.v[2] = old.v[0];
        a.region = b.region = c.region = old.region;
        a.alive = b.alive = c.alive = true;
        // a edges: opp pi = (v0,v1) -> old.adj[2]; opp v0 = (v1,pi) -> b; opp v1 = (pi,v0) -> c
        a.adj[0] = old.adj[2]; a.adj[1] = t1; a.adj[2] = t2;
        b.adj[0] = old.adj[0]; b.adj[1] = t2; b.adj[2] = t;
        c.adj[0] = old.adj[1]; c.adj[1] = t;  c.adj[2] = t1;
        tris[t] = a;
        tris.push_back(b);
        tris.push_back(c);
        set_adj(old.adj[0], t, t1);
        set_adj(old.adj[1], t, t2);
        // old.adj[2] keeps pointing at t
        vert_tri[pi] = t;
        vert_tri[old.v[0]] = t;
        vert_tri[old.v[1]] = t;
        vert_tri[old.v[2]] = t1;
        touched.push_back(t);
        touched.push_back(t1);
        touched.push_back(t2);
        legalize(t, 0, touched);
        legalize(t1, 0, touched);
        legalize(t2, 0, touched);
    }

    // Inserts point pi lying on edge j of triangle t (2 -> 4 split).
    void split_edge(index_t t, int j, index_t pi, std::vector<index_t>& touched) {
        index_t n = tris[t].adj[j];
        if (n < 0)
            throw MeshError("mesh generation: point on hull edge");
        index_t a = tris[t].v[(j + 1) % 3];
        index_t b = tris[t].v[(j + 2) % 3];
        index_t p = tris[t].v[j];
        int jn = adj_index(n, t);
        index_t q = tris[n].v[jn]; // n = (q, b, a) orientation-wise
        int rt = tris[t].region, rn = tris[n].region;

        index_t t2 = static_cast<index_t>(tris.size());
        index_t t3 = t2 + 1;
        // Replace t with (p, a, pi) and add (p, pi, b); replace n with
        // (q, pi, a)... careful with orientation: t = (p, a, b) CCW.
        Tri ta_; // (p, a, pi)
        ta_.v[0] = p; ta_.v[1] = a; ta_.v[2] = pi;
        Tri tb_; // (p, pi, b)
        tb_.v[0] = p; tb_.v[1] = pi; tb_.v[2] = b;
        Tri na_; // (q, pi, a)   [n = (q, b, a): edge (b,a) split at pi]
        na_.v[0] = q; na_.v[1] = pi; na_.v[2] = a;
        Tri nb_; // (q, b, pi)
        nb_.v[0] = q; nb_.v[1] = b; nb_.v[2] = pi;
        ta_.region = tb_.region = rt;
        na_.region = nb_.region = rn;
        ta_.alive = tb_.alive = na_.alive = nb_.alive = true;

        index_t t_pa = tris[t].adj[(j + 2) % 3]; // across (p,a)
        index_t t_bp = tris[t].adj[(j + 1) % 3]; // across (b,p)
        index_t n_qb = tris[n].adj[(jn + 2) % 3]; // across (q,b)
        index_t n_aq = tris[n].adj[(jn + 1) % 3]; // across (a,q)

        // ta_: edges opp p=(a,pi)->na slot; opp a=(pi,p)->tb slot; opp pi=(p,a)->t_pa
        ta_.adj[0] = t3;  // na_ index will be t3
        ta_.adj[1] = t2;  // tb_ index will be t2
        ta_.adj[2] = t_pa;
        // tb_: opp p=(pi,b)->nb (= n); opp pi=(b,p)->t_bp; opp b=(p,pi)->ta (= t)
        tb_.adj[0] = n;
        tb_.adj[1] = t_bp;
        tb_.adj[2] = t;
        // na_: opp q=(pi,a)->ta (= t); opp pi=(a,q)->n_aq; opp a=(q,pi)->nb (= n)
        na_.adj[0] = t;
        na_.adj[1] = n_aq;
        na_.adj[2] = n;
        // nb_: opp q=(b,pi)->tb (= t2); opp b=(pi,q)->na (= t3); opp pi=(q,b)->n_qb
        nb_.adj[0] = t2;
        nb_.adj[1] = t3;
        nb_.adj[2] = n_qb;

        tris[t] = ta_;
        tris[n] = nb_;
        tris.push_back(tb_); // t2
        tris.push_back(na_); // t3
        set_adj(t_bp, t, t2);
        set_adj(n_aq, n, t3);
        // t_pa still points at t; n_qb still points at n.

        vert_tri[pi] = t;
        vert_tri[p] = t;
        vert_tri[a] = t;
        vert_tri[b] = t2;
        vert_tri[q] = n;

        // If (a,b) was constrained, replace it by the two halves.
        auto it = constraints.find(edge_key(a, b));
        if (it != constraints.end()) {
            int tag = it->second;
            constraints.erase(it);
            constraints.emplace(edge_key(a, pi), tag);
            constraints.emplace(edge_key(pi, b), tag);
        }

        touched.push_back(t);
        touched.push_back(n);
        touched.push_back(t2);
        touched.push_back(t3);
        // Legalize the four edges not incident to pi.
        legalize(t, 2, touched);  // ta_ = (p, a, pi): edge (p, a)
        legalize(t2, 1, touched); // tb_ = (p, pi, b): edge (b, p)
        legalize(t3, 1, touched); // na_ = (q, pi, a): edge (a, q)
        legalize(n, 2, touched);  // nb_ = (q, b, pi): edge (q, b)
    }

    // Inserts the point with index pi (already in pts) into the
    // triangulation. Returns false if it coincides with an existing vertex.
    bool insert(index_t pi, std::vector<index_t>* touched_out = nullptr) {
        Vec2 p = pts[pi];
        LocateResult loc = locate(p, hint, false);
        const Tri& tr = tris[loc.tri];
        for (int j = 0; j < 3; ++j) {
            if ((pts[tr.v[j]] - p).norm() <= kOnEdgeEps) return false;
        }
        std::vector<index_t> scratch;
        std::vector<index_t>& touched = touched_out ? *touched_out : scratch;
        if (loc.on_edge >= 0)
            split_edge(loc.tri, loc.on_edge, pi, touched);
        else
            split_triangle(loc.tri, pi, touched);
        hint = vert_tri[pi];
        return true;
    }

    bool edge_exists(index_t a, index_t b) const {
        for (index_t t : triangles_around(a)) {
            for (int j = 0; j < 3; ++j)
                if (tris[t].v[j] == b) return true;
        }
        return false;
    }

    std::vector<index_t> triangles_around(index_t v) const {
        std::vector<index_t> out;
        index_t start = vert_tri[v];
        if (start < 0 || !tris[start].alive) {
            for (index_t t = 0; t < static_cast<index_t>(tris.size()); ++t)
                if (tris[t].alive && local_index(t, v) >= 0) { start = t; break; }
        }
        // BFS over triangles sharing v.
        std::vector<index_t> stack = {start};
        while (!stack.empty()) {
            index_t t = stack.back();
            stack.pop_back();
            if (std::find(out.begin(), out.end(), t) != out.end()) continue;
            out.push_back(t);
            int i = local_index(t, v);
            for (int d = 1; d <= 2; ++d) {
                index_t n = tris[t].adj[(i + d) % 3];
                if (n >= 0 && tris[n].alive && local_index(n, v) >= 0 &&
                    std::find(out.begin(), out.end(), n) == out.end())
                    stack.push_back(n);
            }
        }
        return out;
    }

    // Generic flip of edge j of triangle t (no incircle test); returns
    // false if the surrounding quad is not strictly convex.
    bool try_flip(index_t t, int j, index_t& out_t, index_t& out_n) {
        index_t n = tris[t].adj[j];
        if (n < 0) return false;
        index_t p = tris[t].v[j];
        index_t a = tris[t].v[(j + 1) % 3];
        index_t b = tris[t].v[(j + 2) % 3];
        int jn = adj_index(n, t);
        index_t q = tris[n].v[jn];
        if (orient2d(pts[p], pts[a], pts[q]) <= kOnEdgeEps) return false;
        if (orient2d(pts[q], pts[b], pts[p]) <= kOnEdgeEps) return false;
        index_t ta = tris[t].adj[(j + 2) % 3];
        index_t tb = tris[t].adj[(j + 1) % 3];
        index_t across_aq = tris[n].adj[(jn + 1) % 3];
        index_t across_qb = tris[n].adj[(jn + 2) % 3];
        int region = tris[t].region;
        Tri t_new{{p, a, q}, {across_aq, n, ta}, region, true};
        Tri n_new{{p, q, b}, {across_qb, tb, t}, region, true};
        tris[t] = t_new;
        tris[n] = n_new;
        set_adj(across_aq, n, t);
        set_adj(ta, t, t);
        set_adj(tb, t, n);
        vert_tri[p] = t;
        vert_tri[a] = t;
        vert_tri[q] = t;
        vert_tri[b] = n;
        out_t = t;
        out_n = n;
        return true;
    }

    // Segment (a, b) must become an edge; restores it by flipping edges
    // that cross it. Crossings are rare (boundary samples are each other's
    // nearest neighbours), so a rescan per flip is affordable.
    void recover_segment(index_t a, index_t b) {
        Vec2 pa = pts[a], pb = pts[b];
        auto proper_cross = [&](index_t u, index_t w) {
            double o1 = orient2d(pa, pb, pts[u]);
            double o2 = orient2d(pa, pb, pts[w]);
            if (!((o1 > kOnEdgeEps && o2 < -kOnEdgeEps) || (o1 < -kOnEdgeEps && o2 > kOnEdgeEps)))
                return false;
            double o3 = orient2d(pts[u], pts[w], pa);
            double o4 = orient2d(pts[u], pts[w], pb);
            return (o3 > kOnEdgeEps && o4 < -kOnEdgeEps) || (o3 < -kOnEdgeEps && o4 > kOnEdgeEps);
        };
        for (int pass = 0; pass < 100000; ++pass) {
            if (edge_exists(a, b)) return;
            bool flipped = false;
            for (index_t t = 0; t < static_cast<index_t>(tris.size()) && !flipped; ++t) {
                for (int j = 0; j < 3 && !flipped; ++j) {
                    index_t u = tris[t].v[(j + 1) % 3];
                    index_t w = tris[t].v[(j + 2) % 3];
                    if (u > w) continue; // visit each undirected edge once
                    if (is_constrained(u, w)) continue;
                    if (!proper_cross(u, w)) continue;
                    index_t ot, on;
                    if (try_flip(t, j, ot, on)) flipped = true;
                }
            }
            if (!flipped)
                throw MeshError("mesh generation: segment recovery stalled");
        }
        throw MeshError("mesh generation: segment recovery failed");
    }
};

// ---------------------------------------------------------------------------
// Ruppert-style refinement on top of the triangulator.

class Refiner {
  public:
    Triangulator& T;
    double target_h;
    double max_edge;
    double min_seg_len;
    // min angle 20deg <=> circumradius / shortest edge <= 1 / (2 sin 20deg)
    static constexpr double kRadiusEdgeBound = 1.4619022000815433;

    std::deque<std::uint64_t> seg_queue;
    std::deque<index_t> tri_queue;
    index_t max_vertices;

    Refiner(Triangulator& t, double h)
        : T(t), target_h(h), max_edge(1.5 * h), min_seg_len(0.02 * h) {
        max_vertices = static_cast<index_t>(60.0 / (h * h) + 200000);
    }

    bool segment_encroached(index_t a, index_t b) const {
        Vec2 m = (T.pts[a] + T.pts[b]) * 0.5;
        double r2 = (T.pts[a] - m).norm2();
        for (index_t t : T.triangles_around(a)) {
            int i = T.local_index(t, a);
            index_t u = T.tris[t].v[(i + 1) % 3];
            index_t w = T.tris[t].v[(i + 2) % 3];
            index_t apex = -1;
            if (u == b) apex = w;
            if (w == b) apex = u;
            if (apex < 0) continue;
            if ((T.pts[apex] - m).norm2() < r2 * (1.0 - 1e-9)) return true;
        }
        return false;
    }

    bool triangle_bad(index_t t) const {
        const Tri& tr = T.tris[t];
        if (!tr.alive || tr.region < 0) return false;
        Vec2 a = T.pts[tr.v[0]], b = T.pts[tr.v[1]], c = T.pts[tr.v[2]];
        double lab = (b - a).norm(), lbc = (c - b).norm(), lca = (a - c).norm();
        double lmax = std::max({lab, lbc, lca});
        if (lmax > max_edge) return true;
        double lmin = std::min({lab, lbc, lca});
        double area = 0.5 * std::abs(orient2d(a, b, c));
        if (area <= 0.0) return true;
        double circumradius = lab * lbc * lca / (4.0 * area);
        return circumradius / lmin > kRadiusEdgeBound;
    }

    void queue_around(const std::vector<index_t>& touched) {
        for (index_t t : touched) {
            if (t < 0 || !T.tris[t].alive) continue;
            if (triangle_bad(t)) tri_queue.push_back(t);
            const Tri& tr = T.tris[t];
            for (int j = 0; j < 3; ++j) {
                index_t a = tr.v[(j + 1) % 3], b = tr.v[(j + 2) % 3];
                std::uint64_t key = edge_key(a, b);
                if (T.constraints.count(key) && segment_encroached(a, b))
                    seg_queue.push_back(key);
            }
        }
    }

    void split_segment(index_t a, index_t b) {
        Vec2 m = (T.pts[a] + T.pts[b]) * 0.5;
        if ((T.pts[a] - T.pts[b]).norm() < min_seg_len) return;
        int tag = T.constraints.at(edge_key(a, b));
        index_t pi = T.add_point(m, tag);
        std::vector<index_t> touched;
        // the midpoint lies on edge (a,b): locate gives the on-edge case
        if (!T.insert(pi, &touched)) return;
        queue_around(touched);
    }

    void run() {
        // seed queues
        for (const auto& kv : T.constraints) {
            index_t a = static_cast<index_t>(kv.first >> 32);
            index_t b = static_cast<index_t>(kv.first & 0xffffffffu);
            if (segment_encroached(a, b)) seg_queue.push_back(kv.first);
        }
        // deterministic order: seed sorted
        std::sort(seg_queue.begin(), seg_queue.end());
        for (index_t t = 0; t < static_cast<index_t>(T.tris.size()); ++t)
            if (triangle_bad(t)) tri_queue.push_back(t);

        int stalls = 0;
        while (!seg_queue.empty() || !tri_queue.empty()) {
            if (static_cast<index_t>(T.pts.size()) > max_vertices)
                throw MeshError("mesh refinement did not terminate (vertex cap reached)");
            if (!seg_queue.empty()) {
                std::uint64_t key = seg_queue.front();
                seg_queue.pop_front();
                if (!T.constraints.count(key)) continue;
                index_t a = static_cast<index_t>(key >> 32);
                index_t b = static_cast<index_t>(key & 0xffffffffu);
                if (!segment_encroached(a, b)) continue;
                split_segment(a, b);
                continue;
            }
            index_t t = tri_queue.front();
            tri_queue.pop_front();
            if (t < 0 || !T.tris[t].alive || !triangle_bad(t)) continue;
            const Tri& tr = T.tris[t];
            Vec2 c = circumcenter(T.pts[tr.v[0]], T.pts[tr.v[1]], T.pts[tr.v[2]]);
            if (!std::isfinite(c.x) || !std::isfinite(c.y)) continue;
            Triangulator::LocateResult loc = T.locate(c, t, true);
            if (loc.blocked) {
                // circumcenter hides behind a segment: split that segment
                if ((T.pts[loc.block_a] - T.pts[loc.block_b]).norm() >= min_seg_len) {
                    split_segment(loc.block_a, loc.block_b);
                    tri_queue.push_back(t);
                } else if (++stalls > 10000) {
                    throw MeshError("mesh refinement stalled on short segments");
                }
                continue;
            }
            if (T.tris[loc.tri].region != tr.region) {
                // numerically landed in a different region; treat as stall
                if (++stalls > 10000) throw MeshError("mesh refinement stalled (region mismatch)");
                continue;
            }
            if (loc.on_edge >= 0) {
                index_t ea = T.tris[loc.tri].v[(loc.on_edge + 1) % 3];
                index_t eb = T.tris[loc.tri].v[(loc.on_edge + 2) % 3];
                if (T.is_constrained(ea, eb)) {
                    if ((T.pts[ea] - T.pts[eb]).norm() >= min_seg_len) {
                        split_segment(ea, eb);
                        tri_queue.push_back(t);
                    }
                    continue;
                }
            }
            index_t pi = T.add_point(c, kUntagged);
            std::vector<index_t> touched;
            if (!T.insert(pi, &touched)) {
                T.pts.pop_back();
                T.point_tag.pop_back();
                T.vert_tri.pop_back();
                continue;
            }
            queue_around(touched);
        }
    }
};

// ---------------------------------------------------------------------------

void flood_region(Triangulator& T, index_t seed, int region) {
    std::vector<index_t> stack = {seed};
    while (!stack.empty()) {
        index_t t = stack.back();
        stack.pop_back();
        if (t < 0 || !T.tris[t].alive || T.tris[t].region != kOutsideRegion - 1) continue;
        T.tris[t].region = region;
        for (int j = 0; j < 3; ++j) {
            index_t a = T.tris[t].v[(j + 1) % 3];
            index_t b = T.tris[t].v[(j + 2) % 3];
            if (T.is_constrained(a, b)) continue;
            stack.push_back(T.tris[t].adj[j]);
        }
    }
}

} // namespace

void validate_holes(const std::vector<HoleSpec>& holes) {
    for (std::size_t i = 0; i < holes.size(); ++i) {
        const HoleSpec& h = holes[i];
        if (!(h.radius > 0.0))
            throw GeometryError("hole radius must be positive");
        double clearance = 0.5 * h.radius;
        double lo = h.radius + clearance;
        if (h.center.x < lo || h.center.x > 1.0 - lo || h.center.y < lo || h.center.y > 1.0 - lo)
            throw GeometryError("hole " + std::to_string(i) + " too close to the outer boundary");
        for (std::size_t j = 0; j < i; ++j) {
            double gap = (holes[i].center - holes[j].center).norm() - holes[i].radius - holes[j].radius;
            if (gap < std::min(holes[i].radius, holes[j].radius))
                throw GeometryError("holes " + std::to_string(j) + " and " + std::to_string(i) + " too close");
        }
    }
}

bool holes_feasible(const std::vector<HoleSpec>& holes) {
    try {
        validate_holes(holes);
        return true;
    } catch (const GeometryError&) {
        return false;
    }
}

Mesh generate_mesh(const std::vector<HoleSpec>& holes, double target_h, DomainKind kind,
                   std::uint64_t variant) {
    validate_holes(holes);
    if (!(target_h > 0.0) || target_h > 1.0)
        throw GeometryError("target_h must lie in (0, 1]");

    Triangulator T;

    // Square boundary samples (corners first), sides CCW from (0,0).
    const int m = std::max(2, static_cast<int>(std::ceil(1.0 / target_h)));
    std::vector<index_t> side[4]; // bottom, right, top, left, each including corners
    index_t corner[4];
    corner[0] = T.add_point({0.0, 0.0}, kOuterTag);
    corner[1] = T.add_point({1.0, 0.0}, kOuterTag);
    corner[2] = T.add_point({1.0, 1.0}, kOuterTag);
    corner[3] = T.add_point({0.0, 1.0}, kOuterTag);
    for (int s = 0; s < 4; ++s) side[s].push_back(corner[s]);
    for (int s = 0; s < 4; ++s) {
        Vec2 from = T.pts[corner[s]];
        Vec2 to = T.pts[corner[(s + 1) % 4]];
        for (int k = 1; k < m; ++k) {
            double t = static_cast<double>(k) / m;
            Vec2 p = from + (to - from) * t;
            side[s].push_back(T.add_point(p, kOuterTag));
        }
        side[s].push_back(corner[(s + 1) % 4]);
    }

    // Circle samples: inscribed polygons with arc spacing <= target_h.
    std::vector<std::vector<index_t>> circle(holes.size());
    for (std::size_t i = 0; i < holes.size(); ++i) {
        int n = std::max(8, static_cast<int>(std::ceil(2.0 * M_PI * holes[i].radius / target_h)));
        if (n % 2 == 1) ++n;
        for (int k = 0; k < n; ++k) {
            double th = 2.0 * M_PI * k / n;
            Vec2 p = holes[i].center + Vec2{holes[i].radius * std::cos(th), holes[i].radius * std::sin(th)};
            circle[i].push_back(T.add_point(p, static_cast<int>(i)));
        }
    }

    // Interior grid with a small deterministic jitter (breaks the exact
    // cocircularity of grid quads); points near a constraint are dropped.
    const double g = 1.0 / m;
    for (int i = 1; i < m; ++i) {
        for (int j = 1; j < m; ++j) {
            std::uint64_t r = splitmix64(variant * 0x9E3779B97F4A7C15ull +
                                         static_cast<std::uint64_t>(i) * 1000003u + j);
            double jx = ((r & 0xffff) / 65535.0 - 0.5) * 0.2 * g;
            double jy = (((r >> 16) & 0xffff) / 65535.0 - 0.5) * 0.2 * g;
            Vec2 p{i * g + jx, j * g + jy};
            bool keep = true;
            for (const HoleSpec& h : holes) {
                if (std::abs((p - h.center).norm() - h.radius) < 0.75 * g) { keep = false; break; }
            }
            if (keep) T.add_point(p, kUntagged);
        }
    }

    // Insert everything, then register and recover the constraints.
    for (index_t pi = 3; pi < static_cast<index_t>(T.pts.size()); ++pi)
        T.insert(pi);
    auto add_chain = [&T](const std::vector<index_t>& chain, bool closed, int tag) {
        std::size_t n = chain.size();
        for (std::size_t k = 0; k + 1 < n; ++k)
            T.constraints.emplace(edge_key(chain[k], chain[k + 1]), tag);
        if (closed) T.constraints.emplace(edge_key(chain[n - 1], chain[0]), tag);
    };
    for (int s = 0; s < 4; ++s) add_chain(side[s], false, kOuterTag);
    for (std::size_t i = 0; i < holes.size(); ++i) add_chain(circle[i], true, static_cast<int>(i));
    {
        // Recover in deterministic order.
        std::vector<std::uint64_t> keys;
        keys.reserve(T.constraints.size());
        for (const auto& kv : T.constraints) keys.push_back(kv.first);
        std::sort(keys.begin(), keys.end());
        for (std::uint64_t key : keys)
            T.recover_segment(static_cast<index_t>(key >> 32), static_cast<index_t>(key & 0xffffffffu));
    }

    // Region classification: -2 = unvisited, -1 = outside, 0 = Omega, i+1 = hole i.
    for (Tri& t : T.tris)
        if (t.alive) t.region = kOutsideRegion - 1;
    for (index_t t = 0; t < static_cast<index_t>(T.tris.size()); ++t) {
        if (!T.tris[t].alive) continue;
        for (int j = 0; j < 3; ++j)
            if (T.tris[t].v[j] < 3) { flood_region(T, t, kOutsideRegion); break; }
    }
    for (std::size_t i = 0; i < holes.size(); ++i) {
        auto loc = T.locate(holes[i].center, T.hint, false);
        if (T.tris[loc.tri].region != kOutsideRegion - 1)
            throw MeshError("mesh generation: hole region classification failed");
        flood_region(T, loc.tri, static_cast<int>(i) + 1);
    }
    for (Tri& t : T.tris)
        if (t.alive && t.region == kOutsideRegion - 1) t.region = 0;

    Refiner R(T, target_h);
    R.run();

    // Emit the FULL mesh (everything inside the square).
    Mesh full;
    full.domain_kind = DomainKind::FULL;
    full.hole_specs = holes;
    std::vector<index_t> remap(T.pts.size(), -1);
    for (index_t t = 0; t < static_cast<index_t>(T.tris.size()); ++t) {
        const Tri& tr = T.tris[t];
        if (!tr.alive || tr.region < 0) continue;
        for (int j = 0; j < 3; ++j) remap[tr.v[j]] = 0;
    }
    for (index_t p = 0, next = 0; p < static_cast<index_t>(T.pts.size()); ++p) {
        if (remap[p] == 0) {
            remap[p] = next++;
            full.vertices.push_back(T.pts[p]);
        } else {
            remap[p] = -1;
        }
    }
    for (index_t t = 0; t < static_cast<index_t>(T.tris.size()); ++t) {
        const Tri& tr = T.tris[t];
        if (!tr.alive || tr.region < 0) continue;
        std::array<index_t, 3> v = {remap[tr.v[0]], remap[tr.v[1]], remap[tr.v[2]]};
        if (orient2d(full.vertices[v[0]], full.vertices[v[1]], full.vertices[v[2]]) <= 0.0)
            throw MeshError("mesh generation produced a non-CCW triangle");
        full.triangles.push_back(v);
        full.triangle_region.push_back(tr.region);
    }
    std::vector<BoundaryEdge> bedges;
    for (const auto& kv : T.constraints) {
        index_t a = static_cast<index_t>(kv.first >> 32);
        index_t b = static_cast<index_t>(kv.first & 0xffffffffu);
        if (remap[a] < 0 || remap[b] < 0) continue;
        index_t ra = remap[a], rb = remap[b];
        if (ra > rb) std::swap(ra, rb);
        bedges.push_back({ra, rb, kv.second});
    }
    std::sort(bedges.begin(), bedges.end(), [](const BoundaryEdge& x, const BoundaryEdge& y) {
        if (x.tag != y.tag) return x.tag < y.tag;
        if (x.a != y.a) return x.a < y.a;
        return x.b < y.b;
    });
    full.boundary_edges = std::move(bedges);
    full.finalize();

    if (kind == DomainKind::FULL) return full;
    return extract_submesh(full).mesh;
}

SubmeshResult extract_submesh(const Mesh& full) {
    if (full.domain_kind != DomainKind::FULL)
        throw MeshError("extract_submesh expects a FULL mesh");
    if (full.triangle_region.size() != full.triangles.size())
        throw MeshError("extract_submesh: missing region labels");

    SubmeshResult out;
    Mesh& sub = out.mesh;
    sub.domain_kind = DomainKind::HOLED;
    sub.hole_specs = full.hole_specs;

    std::vector<index_t> remap(full.vertices.size(), -1);
    for (index_t t = 0; t < full.triangle_count(); ++t) {
        if (full.triangle_region[t] != 0) continue;
        for (index_t v : full.triangles[t]) remap[v] = 0;
    }
    out.vertex_map.clear();
    for (index_t p = 0, next = 0; p < full.vertex_count(); ++p) {
        if (remap[p] == 0) {
            remap[p] = next++;
            sub.vertices.push_back(full.vertices[p]);
            out.vertex_map.push_back(p);
        } else {
            remap[p] = -1;
        }
    }
    for (index_t t = 0; t < full.triangle_count(); ++t) {
        if (full.triangle_region[t] != 0) continue;
        const auto& tr = full.triangles[t];
        sub.triangles.push_back({remap[tr[0]], remap[tr[1]], remap[tr[2]]});
        sub.triangle_region.push_back(0);
    }
    for (const BoundaryEdge& e : full.boundary_edges) {
        if (remap[e.a] < 0 || remap[e.b] < 0)
            throw MeshError("extract_submesh: hole interface not edge-resolved");
        sub.boundary_edges.push_back({remap[e.a], remap[e.b], e.tag});
    }
    sub.finalize();
    return out;
}

} // namespace eikorec
