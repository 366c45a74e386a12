#include "gcflow/front.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

#include "gcflow/envelope_table.hpp"
#include "gcflow/errors.hpp"

namespace gcflow {
namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double dist_vec(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (int i = 0; i < a.n; ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

double tri_area(const Vec& a, const Vec& b, const Vec& c) {
    const double u0 = b[0] - a[0], u1 = b[1] - a[1], u2 = b[2] - a[2];
    const double v0 = c[0] - a[0], v1 = c[1] - a[1], v2 = c[2] - a[2];
    const double w0 = u1 * v2 - u2 * v1;
    const double w1 = u2 * v0 - u0 * v2;
    const double w2 = u0 * v1 - u1 * v0;
    return 0.5 * std::sqrt(w0 * w0 + w1 * w1 + w2 * w2);
}

double shape_distance(const Shape& s, const Vec& x) {
    switch (s.kind) {
    case Shape::Kind::circle:
    case Shape::Kind::ball:
        return norm2(x) - s.radius;
    case Shape::Kind::ellipse:
        return ellipse_signed_distance(x[0], x[1], s.a, s.b);
    case Shape::Kind::ball_union: {
        double best = std::numeric_limits<double>::infinity();
        for (const Ball& b : s.balls) {
            double q = 0.0;
            for (int i = 0; i < x.n; ++i) {
                const double d = x[i] - b.center[i];
                q += d * d;
            }
            best = std::min(best, std::sqrt(q) - b.radius);
        }
        return best;
    }
    }
    return 0.0; // unreachable
}

// Unique crossing vertices, one per lattice edge with a sign change.
class VertexPool {
public:
    VertexPool(const ScalarField& f, double level) : f_(f), level_(level) {
        stride_[0] = 1;
        stride_[1] = f.spec.shape[0];
        stride_[2] = static_cast<long>(f.spec.shape[0]) * f.spec.shape[1];
    }

    long get(long base, int axis, FrontSet& out) {
        const long key = 3 * base + axis;
        const auto it = map_.find(key);
        if (it != map_.end()) return it->second;
        const double u0 = f_.values[static_cast<std::size_t>(base)];
        const double u1 = f_.values[static_cast<std::size_t>(base + stride_[axis])];
        const double t = (level_ - u0) / (u1 - u0);
        Vec p = f_.cell_center(base);
        p[axis] += t * f_.spec.h;
        const long id = static_cast<long>(out.vertices.size());
        out.vertices.push_back(p);
        map_.emplace(key, id);
        return id;
    }

private:
    const ScalarField& f_;
    double level_;
    long stride_[3];
    std::unordered_map<long, long> map_;
};

struct Crossing {
    long vertex = -1;
    bool exits = false; // walk leaves {u < level} at this crossing
};

// Pair the crossings of one square (or cube face) walked in cycle order and
// record each directed contour link.  Four crossings are ambiguous; whether
// the below-level corners join is decided by the corner average, and both
// elements sharing the face see the same average, so the mesh stays
// consistent.
void link_crossings(const Crossing* cr, int m, double avg, double level,
                    std::map<long, long>& next) {
    if (m == 2) {
        const int ex = cr[0].exits ? 0 : 1;
        next[cr[ex].vertex] = cr[1 - ex].vertex;
        return;
    }
    const bool below_joins = avg < level;
    for (int p = 0; p < 4; ++p) {
        if (!cr[p].exits) continue;
        const int partner = below_joins ? (p + 1) % 4 : (p + 3) % 4;
        next[cr[p].vertex] = cr[partner].vertex;
    }
}

// Follow directed links, consuming them; returns loops in ascending order of
// their smallest remaining start vertex.  Chains that fail to close (a level
// set leaving the grid) are dropped.
template <typename Emit>
void walk_loops(std::map<long, long>& next, Emit&& emit) {
    while (!next.empty()) {
        const long start = next.begin()->first;
        std::vector<long> poly;
        long cur = start;
        bool closed = false;
        while (true) {
            poly.push_back(cur);
            const auto it = next.find(cur);
            if (it == next.end()) break;
            const long to = it->second;
            next.erase(it);
            if (to == start) {
                closed = true;
                break;
            }
            cur = to;
        }
        if (closed) emit(poly);
    }
}

FrontSet extract2d(const ScalarField& f, double level) {
    FrontSet out;
    out.dims = 2;
    VertexPool pool(f, level);
    std::map<long, long> next;
    const int nx = f.spec.shape[0], ny = f.spec.shape[1];
    for (int j = 0; j + 1 < ny; ++j) {
        for (int i = 0; i + 1 < nx; ++i) {
            const long c00 = f.idx(i, j), c10 = f.idx(i + 1, j);
            const long c11 = f.idx(i + 1, j + 1), c01 = f.idx(i, j + 1);
            // corners and edges in counterclockwise walk order
            const double u[4] = {f.values[static_cast<std::size_t>(c00)],
                                 f.values[static_cast<std::size_t>(c10)],
                                 f.values[static_cast<std::size_t>(c11)],
                                 f.values[static_cast<std::size_t>(c01)]};
            const bool in[4] = {u[0] < level, u[1] < level, u[2] < level,
                                u[3] < level};
            if (in[0] == in[1] && in[1] == in[2] && in[2] == in[3]) continue;
            const long base[4] = {c00, c10, c01, c00};
            const int axis[4] = {0, 1, 0, 1};
            Crossing cr[4];
            int m = 0;
            for (int e = 0; e < 4; ++e) {
                const int a = e, b = (e + 1) % 4;
                if (in[a] == in[b]) continue;
                cr[m].vertex = pool.get(base[e], axis[e], out);
                cr[m].exits = in[a];
                ++m;
            }
            link_crossings(cr, m, 0.25 * (u[0] + u[1] + u[2] + u[3]), level, next);
        }
    }
    walk_loops(next, [&out](std::vector<long>& poly) {
        poly.push_back(poly.front());
        out.loops.push_back(std::move(poly));
    });
    return out;
}

// Corner codes di | dj<<1 | dk<<2 of each cube face, cycled counterclockwise
// as seen from outside the cube, so every face applies the same pairing rule
// its neighbor sees.
const std::array<std::array<int, 4>, 6>& face_cycles() {
    static const std::array<std::array<int, 4>, 6> table = [] {
        std::array<std::array<int, 4>, 6> t{};
        const int B[3] = {1, 2, 0}, C[3] = {2, 0, 1};
        const int inner[2][4][2] = {
            {{0, 0}, {0, 1}, {1, 1}, {1, 0}}, // side 0: outward -axis
            {{0, 0}, {1, 0}, {1, 1}, {0, 1}}, // side 1: outward +axis
        };
        int fi = 0;
        for (int a = 0; a < 3; ++a)
            for (int s = 0; s < 2; ++s, ++fi)
                for (int v = 0; v < 4; ++v)
                    t[static_cast<std::size_t>(fi)][static_cast<std::size_t>(v)] =
                        (s << a) | (inner[s][v][0] << B[a]) | (inner[s][v][1] << C[a]);
        return t;
    }();
    return table;
}

FrontSet extract3d(const ScalarField& f, double level) {
    FrontSet out;
    out.dims = 3;
    VertexPool pool(f, level);
    const auto& faces = face_cycles();
    const int nx = f.spec.shape[0], ny = f.spec.shape[1], nz = f.spec.shape[2];
    for (int k = 0; k + 1 < nz; ++k) {
        for (int j = 0; j + 1 < ny; ++j) {
            for (int i = 0; i + 1 < nx; ++i) {
                double u[8];
                bool in[8];
                int below = 0;
                for (int code = 0; code < 8; ++code) {
                    const long cell = f.idx(i + (code & 1), j + ((code >> 1) & 1),
                                            k + (code >> 2));
                    u[code] = f.values[static_cast<std::size_t>(cell)];
                    in[code] = u[code] < level;
                    below += in[code];
                }
                if (below == 0 || below == 8) continue;
                std::map<long, long> next;
                for (const auto& cyc : faces) {
                    Crossing cr[4];
                    int m = 0;
                    double avg = 0.0;
                    for (int e = 0; e < 4; ++e) {
                        avg += 0.25 * u[cyc[static_cast<std::size_t>(e)]];
                        const int a = cyc[static_cast<std::size_t>(e)];
                        const int b = cyc[static_cast<std::size_t>((e + 1) % 4)];
                        if (in[a] == in[b]) continue;
                        const int lo_code = a & b;     // differing bit cleared
                        const int bit = a ^ b;         // single differing bit
                        const int axis = bit == 1 ? 0 : bit == 2 ? 1 : 2;
                        const long cell =
                            f.idx(i + (lo_code & 1), j + ((lo_code >> 1) & 1),
                                  k + (lo_code >> 2));
                        cr[m].vertex = pool.get(cell, axis, out);
                        cr[m].exits = in[a];
                        ++m;
                    }
                    if (m > 0) link_crossings(cr, m, avg, level, next);
                }
                walk_loops(next, [&out](const std::vector<long>& poly) {
                    for (std::size_t t = 1; t + 1 < poly.size(); ++t)
                        out.triangles.push_back({poly[0], poly[t], poly[t + 1]});
                });
            }
        }
    }
    return out;
}

} // namespace

Shape Shape::circle(double r) {
    Shape s;
    s.kind = Kind::circle;
    s.radius = r;
    return s;
}

Shape Shape::ellipse(double a, double b) {
    Shape s;
    s.kind = Kind::ellipse;
    s.a = a;
    s.b = b;
    return s;
}

Shape Shape::ball(double r) {
    Shape s;
    s.kind = Kind::ball;
    s.radius = r;
    return s;
}

Shape Shape::ball_union(std::vector<Ball> members) {
    Shape s;
    s.kind = Kind::ball_union;
    s.balls = std::move(members);
    return s;
}

double ellipse_signed_distance(double x, double y, double a, double b) {
    if (!(a > 0.0) || !(b > 0.0))
        throw parameter_error("ellipse distance: semi-axes must be positive");
    double e0 = a, e1 = b, y0 = std::fabs(x), y1 = std::fabs(y);
    if (e0 < e1) {
        std::swap(e0, e1);
        std::swap(y0, y1);
    }
    const double r0 = y0 / e0, r1 = y1 / e1;
    const double inside = r0 * r0 + r1 * r1 - 1.0;
    if (y1 > 0.0) {
        if (y0 > 0.0) {
            // Closest-point parameter is the unique root of the decreasing
            // function F(t) = (e0 y0/(t+e0^2))^2 + (e1 y1/(t+e1^2))^2 - 1;
            // the bracket below has F >= 0 at lo and F <= 0 at hi.
            const double z0 = e0 * y0, z1 = e1 * y1;
            double lo = -e1 * e1 + z1;
            double hi = -e1 * e1 + std::sqrt(z0 * z0 + z1 * z1);
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (lo + hi);
                if (mid == lo || mid == hi) break;
                const double f0 = z0 / (mid + e0 * e0);
                const double f1 = z1 / (mid + e1 * e1);
                (f0 * f0 + f1 * f1 > 1.0 ? lo : hi) = mid;
            }
            const double t = 0.5 * (lo + hi);
            const double qx = e0 * e0 * y0 / (t + e0 * e0);
            const double qy = e1 * e1 * y1 / (t + e1 * e1);
            const double d = std::hypot(y0 - qx, y1 - qy);
            return inside < 0.0 ? -d : d;
        }
        return y1 - e1; // minor axis: the co-vertex is closest
    }
    const double crit = (e0 * e0 - e1 * e1) / e0;
    if (y0 < crit) {
        // between the evolute cusps the footpoint leaves the axis and the
        // query is strictly inside
        const double qx = e0 * e0 * y0 / (e0 * e0 - e1 * e1);
        const double s = 1.0 - (qx / e0) * (qx / e0);
        const double qy = e1 * std::sqrt(std::max(0.0, s));
        return -std::hypot(y0 - qx, qy);
    }
    return y0 - e0; // beyond the cusp the vertex is closest
}

ScalarField init_signed_distance(const Shape& shape, const GridSpec& g,
                                 double clamp) {
    if (!(clamp > 0.0) || !std::isfinite(clamp))
        throw parameter_error("signed distance: clamp must be positive and finite");
    if (g.h <= 0.0)
        throw parameter_error("signed distance: grid spacing must be positive");
    double extent = 0.0;
    switch (shape.kind) {
    case Shape::Kind::circle:
    case Shape::Kind::ball: {
        const int want = shape.kind == Shape::Kind::circle ? 2 : 3;
        if (g.dims != want)
            throw parameter_error("signed distance: shape and grid dimensions differ");
        if (!(shape.radius > 0.0))
            throw parameter_error("signed distance: radius must be positive");
        extent = shape.radius;
        break;
    }
    case Shape::Kind::ellipse:
        if (g.dims != 2)
            throw parameter_error("signed distance: shape and grid dimensions differ");
        if (!(shape.a > 0.0) || !(shape.b > 0.0))
            throw parameter_error("signed distance: semi-axes must be positive");
        extent = std::max(shape.a, shape.b);
        break;
    case Shape::Kind::ball_union:
        if (shape.balls.empty())
            throw parameter_error("signed distance: empty ball union");
        for (const Ball& m : shape.balls) {
            if (m.center.n != g.dims)
                throw parameter_error("signed distance: shape and grid dimensions differ");
            if (!(m.radius > 0.0))
                throw parameter_error("signed distance: radius must be positive");
            extent = std::max(extent, norm2(m.center) + m.radius);
        }
        break;
    }
    if (!(extent < g.S))
        throw parameter_error("signed distance: shape reaches the truncation radius");

    ScalarField f = ScalarField::constant(g, clamp);
    const long n = f.size();
    for (long c = 0; c < n; ++c) {
        const double d = shape_distance(shape, f.cell_center(c));
        if (f.far_cell(c) && d < clamp)
            throw parameter_error(
                "signed distance: clamp band reaches the truncation shell");
        f.values[static_cast<std::size_t>(c)] = std::clamp(d, -clamp, clamp);
    }
    pin_far_cells(f);
    return f;
}

FrontSet extract_front(const ScalarField& f, double level) {
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (const double v : f.values) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    if (!(level > mn && level < mx)) {
        FrontSet empty;
        empty.dims = f.spec.dims;
        return empty;
    }
    return f.spec.dims == 2 ? extract2d(f, level) : extract3d(f, level);
}

double front_measure(const FrontSet& front) {
    double total = 0.0;
    if (front.dims == 2) {
        for (const auto& loop : front.loops)
            for (std::size_t i = 0; i + 1 < loop.size(); ++i)
                total += dist_vec(front.vertices[static_cast<std::size_t>(loop[i])],
                                  front.vertices[static_cast<std::size_t>(loop[i + 1])]);
    } else {
        for (const auto& t : front.triangles)
            total += tri_area(front.vertices[static_cast<std::size_t>(t[0])],
                              front.vertices[static_cast<std::size_t>(t[1])],
                              front.vertices[static_cast<std::size_t>(t[2])]);
    }
    return total;
}

double hausdorff_distance(const FrontSet& a, const FrontSet& b) {
    if (a.vertices.empty() || b.vertices.empty())
        throw parameter_error("hausdorff distance: empty front");
    const auto one_sided = [](const FrontSet& p, const FrontSet& q) {
        double worst = 0.0;
        for (const Vec& x : p.vertices) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vec& y : q.vertices) best = std::min(best, dist_vec(x, y));
            worst = std::max(worst, best);
        }
        return worst;
    };
    return std::max(one_sided(a, b), one_sided(b, a));
}

SampleSet front_samples(const ScalarField& f, const FrontSet& front,
                        const CurvatureSpec& cs, const RegularizationParams& rp) {
    validate(rp);
    if (cs.dim != f.spec.dims || front.dims != f.spec.dims)
        throw parameter_error("front sampling: dimension mismatch");

    const long nv = static_cast<long>(front.vertices.size());
    std::vector<double> weight(static_cast<std::size_t>(nv), 0.0);
    if (front.dims == 2) {
        for (const auto& loop : front.loops)
            for (std::size_t i = 0; i + 1 < loop.size(); ++i) {
                const auto va = static_cast<std::size_t>(loop[i]);
                const auto vb = static_cast<std::size_t>(loop[i + 1]);
                const double len = dist_vec(front.vertices[va], front.vertices[vb]);
                weight[va] += 0.5 * len;
                weight[vb] += 0.5 * len;
            }
    } else {
        for (const auto& t : front.triangles) {
            const double share =
                tri_area(front.vertices[static_cast<std::size_t>(t[0])],
                         front.vertices[static_cast<std::size_t>(t[1])],
                         front.vertices[static_cast<std::size_t>(t[2])]) /
                3.0;
            for (const long v : t) weight[static_cast<std::size_t>(v)] += share;
        }
    }

    const auto& table = detail::envelope_table(cs, ConeCut{rp.n_cut});
    const int dims = f.spec.dims;
    const double inv_h = 1.0 / f.spec.h;
    SampleSet out;
    for (long v = 0; v < nv; ++v) {
        const Vec& pos = front.vertices[static_cast<std::size_t>(v)];
        int base[3] = {0, 0, 0};
        double frac[3] = {0.0, 0.0, 0.0};
        bool fits = true;
        for (int a = 0; a < dims; ++a) {
            const double s = (pos[a] - f.spec.origin[static_cast<std::size_t>(a)]) * inv_h;
            const double fl = std::floor(s);
            const int i0 = static_cast<int>(fl);
            // every interpolation corner must admit a difference stencil
            if (i0 < 1 || i0 + 1 > f.spec.shape[static_cast<std::size_t>(a)] - 2) {
                fits = false;
                break;
            }
            base[a] = i0;
            frac[a] = s - fl;
        }
        if (!fits) {
            ++out.skipped;
            continue;
        }
        Vec grad;
        grad.n = dims;
        SymMat hess;
        hess.n = dims;
        const int corners = dims == 2 ? 4 : 8;
        for (int code = 0; code < corners; ++code) {
            const int di = code & 1, dj = (code >> 1) & 1, dk = code >> 2;
            double w = (di ? frac[0] : 1.0 - frac[0]) * (dj ? frac[1] : 1.0 - frac[1]);
            if (dims == 3) w *= dk ? frac[2] : 1.0 - frac[2];
            if (w == 0.0) continue;
            const long cell = f.idx(base[0] + di, base[1] + dj,
                                    dims == 3 ? base[2] + dk : 0);
            const Vec gc = gradient_at(f, cell);
            const SymMat hc = hessian_at(f, cell);
            for (int r = 0; r < dims; ++r) {
                grad[r] += w * gc[r];
                for (int c2 = 0; c2 < dims; ++c2) hess(r, c2) += w * hc(r, c2);
            }
        }
        const double pn = norm2(grad);
        if (!(pn >= 10.0 * rp.eps)) {
            ++out.skipped;
            continue;
        }
        Vec nhat = grad;
        for (int r = 0; r < dims; ++r) nhat[r] /= pn;
        SymMat proj = SymMat::identity(dims);
        for (int r = 0; r < dims; ++r)
            for (int c2 = 0; c2 < dims; ++c2) proj(r, c2) -= nhat[r] * nhat[c2];
        SymMat m = sandwich(proj, hess);
        for (int r = 0; r < dims; ++r)
            for (int c2 = 0; c2 < dims; ++c2) m(r, c2) /= pn;
        const Vec lam = eig_sym(m);

        FrontSample smp;
        smp.position = pos;
        smp.inward_normal = nhat;
        for (int r = 0; r < dims; ++r) smp.inward_normal[r] = -nhat[r];
        smp.speed = table.value(lam.v.data());
        smp.weight = weight[static_cast<std::size_t>(v)];
        out.samples.push_back(smp);
        out.vertex_index.push_back(v);
    }
    if (out.samples.empty())
        throw parameter_error("front sampling: degenerate front, every vertex skipped");
    return out;
}

void write_front_csv(const FrontSet& front, const SampleSet& samples,
                     const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw config_error("front csv: cannot open '" + path + "' for writing");
    const int dims = front.dims;
    out << (dims == 2 ? "x,y,nx,ny,F,weight\n" : "x,y,z,nx,ny,nz,F,weight\n");
    std::vector<long> row_of(front.vertices.size(), -1);
    for (std::size_t s = 0; s < samples.vertex_index.size(); ++s)
        row_of[static_cast<std::size_t>(samples.vertex_index[s])] =
            static_cast<long>(s);
    const auto put = [&](long s) {
        const FrontSample& smp = samples.samples[static_cast<std::size_t>(s)];
        for (int a = 0; a < dims; ++a) out << fmt(smp.position[a]) << ',';
        for (int a = 0; a < dims; ++a) out << fmt(smp.inward_normal[a]) << ',';
        out << fmt(smp.speed) << ',' << fmt(smp.weight) << '\n';
    };
    if (dims == 2) {
        bool first = true;
        for (const auto& loop : front.loops) {
            if (!first) out << '\n';
            first = false;
            for (const long v : loop) {
                const long row = row_of[static_cast<std::size_t>(v)];
                if (row >= 0) put(row);
            }
        }
    } else {
        for (std::size_t s = 0; s < samples.samples.size(); ++s)
            put(static_cast<long>(s));
    }
    if (!out) throw config_error("front csv: write failure on '" + path + "'");
}

} // namespace gcflow
