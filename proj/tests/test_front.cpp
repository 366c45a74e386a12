#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "gcflow/errors.hpp"
#include "gcflow/front.hpp"
#include "gcflow/grid.hpp"

using namespace gcflow;

namespace {

constexpr double kPi = 3.14159265358979323846;

GridSpec centered_grid(int dims, int n_side, double h, double S) {
    GridSpec g;
    g.dims = dims;
    g.h = h;
    g.S = S;
    for (int a = 0; a < dims; ++a) {
        g.shape[a] = n_side;
        g.origin[a] = -0.5 * h * (n_side - 1);
    }
    if (dims == 2) g.shape[2] = 1;
    return g;
}

double shoelace(const FrontSet& fr, const std::vector<long>& loop) {
    double twice = 0.0;
    for (std::size_t i = 0; i + 1 < loop.size(); ++i) {
        const Vec& p = fr.vertices[static_cast<std::size_t>(loop[i])];
        const Vec& q = fr.vertices[static_cast<std::size_t>(loop[i + 1])];
        twice += p[0] * q[1] - q[0] * p[1];
    }
    return 0.5 * twice;
}

// every vertex must sit on a lattice edge: at most one coordinate may be
// strictly between cell centers
bool on_lattice_edge(const ScalarField& f, const Vec& v) {
    int fractional = 0;
    for (int a = 0; a < f.spec.dims; ++a) {
        const double s = (v[a] - f.spec.origin[static_cast<std::size_t>(a)]) / f.spec.h;
        const double frac = std::fabs(s - std::round(s));
        if (frac > 1e-9) ++fractional;
    }
    return fractional <= 1;
}

} // namespace

TEST_CASE("signed distance seeds match hand geometry") {
    // centers span [-2.5, 2.5], so (2, 0) and the origin are exact centers
    const GridSpec g = centered_grid(2, 21, 0.25, 2.45);
    const ScalarField f = init_signed_distance(Shape::circle(1.0), g, 1.2);

    const long center = f.idx(10, 10);
    CHECK(f.values[static_cast<std::size_t>(center)] == -1.0);
    const long right = f.idx(18, 10); // (2, 0)
    CHECK(f.values[static_cast<std::size_t>(right)] == 1.0);
    const long inner = f.idx(13, 10); // (0.75, 0)
    CHECK(f.values[static_cast<std::size_t>(inner)] == -0.25);
    for (long c = 0; c < f.size(); ++c) {
        CHECK(std::fabs(f.values[static_cast<std::size_t>(c)]) <= 1.2);
        if (f.far_cell(c)) CHECK(f.values[static_cast<std::size_t>(c)] == 1.2);
        const double r = norm2(f.cell_center(c));
        if (r < 1.0) CHECK(f.values[static_cast<std::size_t>(c)] < 0.0);
        if (r > 1.0) CHECK(f.values[static_cast<std::size_t>(c)] > 0.0);
    }

    // tighter clamp truncates the same data
    const ScalarField fc = init_signed_distance(Shape::circle(1.0), g, 0.8);
    CHECK(fc.values[static_cast<std::size_t>(center)] == -0.8);
    CHECK(fc.values[static_cast<std::size_t>(right)] == 0.8);

    // the far shell must stay outside the clamp band
    CHECK_THROWS_AS(init_signed_distance(Shape::circle(1.0), g, 1.6), parameter_error);
    // shape reaching the truncation radius
    CHECK_THROWS_AS(init_signed_distance(Shape::circle(2.5), g, 0.2), parameter_error);
    // dimension mismatches and degenerate parameters
    CHECK_THROWS_AS(init_signed_distance(Shape::ball(1.0), g, 0.2), parameter_error);
    CHECK_THROWS_AS(init_signed_distance(Shape::circle(-1.0), g, 0.2), parameter_error);
    CHECK_THROWS_AS(init_signed_distance(Shape::circle(1.0), g, 0.0), parameter_error);
    CHECK_THROWS_AS(init_signed_distance(Shape::ball_union({}), g, 0.2), parameter_error);
}

TEST_CASE("the ellipse distance agrees with a dense boundary search") {
    const double a = 1.0, b = 0.5;
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(-2.2, 2.2);
    for (int trial = 0; trial < 60; ++trial) {
        const double x = U(rng), y = U(rng);
        const double d = ellipse_signed_distance(x, y, a, b);
        double best = std::numeric_limits<double>::infinity();
        const int N = 100001;
        for (int i = 0; i < N; ++i) {
            const double th = 2.0 * kPi * i / N;
            best = std::min(best, std::hypot(x - a * std::cos(th), y - b * std::sin(th)));
        }
        const double sgn =
            (x / a) * (x / a) + (y / b) * (y / b) < 1.0 ? -1.0 : 1.0;
        CHECK(d == doctest::Approx(sgn * best).epsilon(0.0).scale(1.0).epsilon(1e-6));
    }
    CHECK(ellipse_signed_distance(a + 2.0, 0.0, a, b) == 2.0);
    CHECK(ellipse_signed_distance(0.0, 0.0, a, b) == -b);
    CHECK(ellipse_signed_distance(0.0, b + 0.25, a, b) == doctest::Approx(0.25).epsilon(1e-12));
    const double on_curve =
        ellipse_signed_distance(a * std::cos(0.7), b * std::sin(0.7), a, b);
    CHECK(std::fabs(on_curve) <= 1e-12);
    // symmetry in both axes and under an axis swap
    const double d0 = ellipse_signed_distance(0.37, 0.22, a, b);
    CHECK(ellipse_signed_distance(-0.37, 0.22, a, b) == d0);
    CHECK(ellipse_signed_distance(0.37, -0.22, a, b) == d0);
    CHECK(ellipse_signed_distance(0.22, 0.37, b, a) == d0);
}

TEST_CASE("a union of balls seeds pairwise distance geometry") {
    Ball left, right;
    left.center.n = right.center.n = 2;
    left.center[0] = -2.0;
    right.center[0] = 2.0;
    left.radius = right.radius = 1.0;
    const GridSpec g = centered_grid(2, 167, 0.04, 3.25);
    const ScalarField f =
        init_signed_distance(Shape::ball_union({left, right}), g, 0.2);
    const long mid = f.idx(83, 83); // origin
    CHECK(f.values[static_cast<std::size_t>(mid)] == 0.2); // min(2 - 1, ...) clamped
    const long inside = f.idx(133, 83); // (2, 0)
    CHECK(f.values[static_cast<std::size_t>(inside)] == -0.2);
    const long gap = f.idx(103, 83); // (0.8, 0): 0.2 outside the right ball
    CHECK(f.values[static_cast<std::size_t>(gap)] ==
          doctest::Approx(0.2).epsilon(1e-12));
    const long shallow = f.idx(111, 83); // (1.12, 0): 0.12 inside the right ball
    CHECK(f.values[static_cast<std::size_t>(shallow)] ==
          doctest::Approx(-0.12).epsilon(1e-12));

    // both circles extract as separate closed loops
    const FrontSet fr = extract_front(f, 0.0);
    REQUIRE(fr.loops.size() == 2);
    double total = 0.0;
    for (const auto& loop : fr.loops) {
        CHECK(loop.front() == loop.back());
        CHECK(std::fabs(std::fabs(shoelace(fr, loop)) - kPi) < 0.05 * kPi);
        total += std::fabs(shoelace(fr, loop));
    }
    CHECK(front_measure(fr) == doctest::Approx(4.0 * kPi).epsilon(0.02));
    CHECK(total == doctest::Approx(2.0 * kPi).epsilon(0.05));
}

TEST_CASE("level line extraction traces the seeded circle") {
    const double h = 0.02;
    const GridSpec g = centered_grid(2, 147, h, 1.25);
    const ScalarField f = init_signed_distance(Shape::circle(1.0), g, 0.2);
    const FrontSet fr = extract_front(f, 0.0);

    REQUIRE(fr.dims == 2);
    REQUIRE(fr.loops.size() == 1);
    const auto& loop = fr.loops.front();
    CHECK(loop.front() == loop.back());
    CHECK(loop.size() == fr.vertices.size() + 1);
    for (const Vec& v : fr.vertices) {
        CHECK(std::fabs(norm2(v) - 1.0) <= h);
        CHECK(on_lattice_edge(f, v));
    }
    // counterclockwise around the disk, enclosing its area
    const double area = shoelace(fr, loop);
    CHECK(area > 0.0);
    CHECK(area == doctest::Approx(kPi).epsilon(0.02));
    CHECK(front_measure(fr) == doctest::Approx(2.0 * kPi).epsilon(0.01));

    // out-of-range levels give empty sets
    CHECK(extract_front(f, 10.0).vertices.empty());
    CHECK(extract_front(f, -10.0).vertices.empty());
    CHECK(extract_front(f, 0.2).vertices.empty());  // equals the field max
    CHECK(extract_front(f, -0.2).vertices.empty()); // equals the field min
}

TEST_CASE("ambiguous squares follow the corner average rule") {
    // a sea of -1 with two diagonally adjacent +1 islands: the square between
    // the islands has alternating corners, and the side of the level the
    // corner average falls on decides whether the loops merge
    GridSpec g = centered_grid(2, 4, 1.0, 50.0);
    ScalarField f = ScalarField::constant(g, -1.0);
    f.values[static_cast<std::size_t>(f.idx(1, 1))] = 1.0;
    f.values[static_cast<std::size_t>(f.idx(2, 2))] = 1.0;

    // average 0 >= level: the above-level islands stay joined -> one loop
    const FrontSet merged = extract_front(f, -0.1);
    CHECK(merged.vertices.size() == 8);
    REQUIRE(merged.loops.size() == 1);
    CHECK(merged.loops.front().size() == 9);
    CHECK(merged.loops.front().front() == merged.loops.front().back());
    // the sea below the level lies outside this loop, so it runs clockwise
    CHECK(shoelace(merged, merged.loops.front()) < 0.0);

    // average 0 < level: the below-level sea joins across the saddle -> the
    // islands are enclosed separately
    const FrontSet split = extract_front(f, 0.1);
    CHECK(split.vertices.size() == 8);
    REQUIRE(split.loops.size() == 2);
    for (const auto& loop : split.loops) {
        CHECK(loop.size() == 5);
        CHECK(loop.front() == loop.back());
        CHECK(shoelace(split, loop) < 0.0);
    }
}

TEST_CASE("sphere extraction is a consistent watertight soup") {
    const double h = 0.05;
    const GridSpec g = centered_grid(3, 49, h, 1.18);
    const ScalarField f = init_signed_distance(Shape::ball(1.0), g, 0.14);
    const FrontSet fr = extract_front(f, 0.0);

    REQUIRE(fr.dims == 3);
    REQUIRE(!fr.triangles.empty());
    CHECK(fr.loops.empty());
    std::vector<int> degree(fr.vertices.size(), 0);
    for (const auto& t : fr.triangles)
        for (const long v : t) {
            REQUIRE(v >= 0);
            REQUIRE(v < static_cast<long>(fr.vertices.size()));
            ++degree[static_cast<std::size_t>(v)];
        }
    for (const int d : degree) CHECK(d > 0);
    for (const Vec& v : fr.vertices) {
        CHECK(std::fabs(norm2(v) - 1.0) <= h);
        CHECK(on_lattice_edge(f, v));
    }
    // closed genus-zero surface: V - E + F = 2 with E = 3F/2
    const long V = static_cast<long>(fr.vertices.size());
    const long F = static_cast<long>(fr.triangles.size());
    CHECK(2 * V - F == 4);
    CHECK(front_measure(fr) == doctest::Approx(4.0 * kPi).epsilon(0.03));

    CHECK(extract_front(f, 10.0).vertices.empty());
    CHECK(extract_front(f, -10.0).vertices.empty());
}

TEST_CASE("front refinement sharpens the extracted circle") {
    // linear interpolation of exact distance data converges quadratically, so
    // halving the spacing cuts the radial error to roughly a quarter
    double prev = 0.0;
    std::vector<double> errs;
    for (const double h : {0.08, 0.04, 0.02}) {
        const int n = 2 * static_cast<int>(std::ceil(1.45 / h)) + 1;
        const GridSpec g = centered_grid(2, n, h, 1.25);
        const ScalarField f = init_signed_distance(Shape::circle(1.0), g, 0.2);
        const FrontSet fr = extract_front(f, 0.0);
        double emax = 0.0;
        for (const Vec& v : fr.vertices)
            emax = std::max(emax, std::fabs(norm2(v) - 1.0));
        errs.push_back(emax);
        if (prev > 0.0) {
            const double ratio = emax / prev;
            CHECK(ratio >= 0.12);
            CHECK(ratio <= 0.55);
        }
        prev = emax;
    }
    CHECK(errs.back() <= 1e-4);
}

TEST_CASE("front sampling recovers circle normals, speeds and weights") {
    const double h = 0.01;
    const GridSpec g = centered_grid(2, 245, h, 1.2);
    const ScalarField f = init_signed_distance(Shape::circle(1.0), g, 0.15);
    const FrontSet fr = extract_front(f, 0.0);
    RegularizationParams rp;
    rp.eps = 1e-3;
    rp.n_cut = 2;
    rp.sigma = 0.0;
    const SampleSet ss = front_samples(f, fr, CurvatureSpec::sigma(1, 2), rp);

    CHECK(ss.skipped == 0);
    REQUIRE(ss.samples.size() == fr.vertices.size());
    REQUIRE(ss.vertex_index.size() == ss.samples.size());
    double wsum = 0.0;
    for (std::size_t i = 0; i < ss.samples.size(); ++i) {
        const FrontSample& s = ss.samples[i];
        CHECK(ss.vertex_index[i] == static_cast<long>(i));
        CHECK(std::fabs(norm2(s.inward_normal) - 1.0) <= 1e-10);
        const double r = norm2(s.position);
        double dp = 0.0;
        for (int a = 0; a < 2; ++a) dp += s.inward_normal[a] * s.position[a] / r;
        CHECK(std::fabs(dp + 1.0) <= 5e-2); // points at the center
        CHECK(s.speed == doctest::Approx(0.5).epsilon(0.05));
        CHECK(s.weight > 0.0);
        wsum += s.weight;
    }
    CHECK(wsum == doctest::Approx(front_measure(fr)).epsilon(1e-6));
}

TEST_CASE("a nearly flat front reports small speeds") {
    // fifty times the unit circle: curvature 0.02, speed f(1,0)/R = 0.01
    const double R = 50.0, h = 0.5;
    const GridSpec g = centered_grid(2, 245, h, 60.0);
    const ScalarField f = init_signed_distance(Shape::circle(R), g, 7.5);
    const FrontSet fr = extract_front(f, 0.0);
    RegularizationParams rp;
    rp.eps = 1e-3;
    rp.n_cut = 2;
    rp.sigma = 0.0;
    const SampleSet ss = front_samples(f, fr, CurvatureSpec::sigma(1, 2), rp);
    CHECK(ss.skipped == 0);
    for (const auto& s : ss.samples) CHECK(s.speed <= 0.02);
}

TEST_CASE("triangle soup sampling on the sphere") {
    const double h = 0.04;
    const GridSpec g = centered_grid(3, 61, h, 1.18);
    const ScalarField f = init_signed_distance(Shape::ball(1.0), g, 0.14);
    const FrontSet fr = extract_front(f, 0.0);
    RegularizationParams rp;
    rp.eps = 1e-3;
    rp.n_cut = 2;
    rp.sigma = 0.0;
    const SampleSet ss = front_samples(f, fr, CurvatureSpec::sigma(2, 3), rp);

    CHECK(ss.skipped == 0);
    REQUIRE(ss.samples.size() == fr.vertices.size());
    const double want = std::sqrt(1.0 / 3.0); // sigma_2 ratio at (1, 1, 0)
    double wsum = 0.0;
    for (const auto& s : ss.samples) {
        CHECK(std::fabs(norm2(s.inward_normal) - 1.0) <= 1e-10);
        const double r = norm2(s.position);
        double dp = 0.0;
        for (int a = 0; a < 3; ++a) dp += s.inward_normal[a] * s.position[a] / r;
        CHECK(std::fabs(dp + 1.0) <= 5e-2);
        CHECK(s.speed == doctest::Approx(want).epsilon(0.05));
        CHECK(s.weight > 0.0);
        wsum += s.weight;
    }
    CHECK(wsum == doctest::Approx(front_measure(fr)).epsilon(1e-6));
}

TEST_CASE("weak gradient vertices are skipped and counted") {
    const double h = 0.02;
    const GridSpec g = centered_grid(2, 147, h, 1.25);
    const ScalarField base = init_signed_distance(Shape::circle(1.0), g, 0.2);

    // a uniformly tiny slope leaves nothing to sample
    ScalarField tiny = base;
    for (double& v : tiny.values) v *= 0.005;
    tiny.far_value *= 0.005;
    const FrontSet fr_tiny = extract_front(tiny, 0.0);
    RegularizationParams rp;
    rp.eps = 1e-3;
    rp.n_cut = 2;
    rp.sigma = 0.0;
    REQUIRE(!fr_tiny.vertices.empty());
    CHECK_THROWS_AS(front_samples(tiny, fr_tiny, CurvatureSpec::sigma(1, 2), rp),
                    parameter_error);

    // a positive but locally weak slope factor skips only part of the front
    ScalarField faded = base;
    for (long c = 0; c < faded.size(); ++c) {
        const Vec x = faded.cell_center(c);
        const double s = x[0] + 1.0;
        faded.values[static_cast<std::size_t>(c)] *= 0.06 + 0.5 * s * s;
    }
    const FrontSet fr_faded = extract_front(faded, 0.0);
    RegularizationParams rp2;
    rp2.eps = 8e-3;
    rp2.n_cut = 2;
    rp2.sigma = 0.0;
    const SampleSet ss = front_samples(faded, fr_faded, CurvatureSpec::sigma(1, 2), rp2);
    CHECK(ss.skipped > 0);
    CHECK(!ss.samples.empty());
    CHECK(ss.skipped + static_cast<long>(ss.samples.size()) ==
          static_cast<long>(fr_faded.vertices.size()));
    for (const auto& s : ss.samples) {
        CHECK(std::isfinite(s.speed));
        CHECK(std::fabs(norm2(s.inward_normal) - 1.0) <= 1e-10);
    }
}

TEST_CASE("hausdorff distance matches hand values") {
    FrontSet a, b;
    a.dims = b.dims = 2;
    Vec p;
    p.n = 2;
    p[0] = 0.0;
    p[1] = 0.0;
    a.vertices.push_back(p);
    p[0] = 1.0;
    a.vertices.push_back(p);
    p[0] = 0.0;
    p[1] = 0.3;
    b.vertices.push_back(p);
    p[0] = 1.0;
    p[1] = 0.4;
    b.vertices.push_back(p);
    CHECK(hausdorff_distance(a, b) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(hausdorff_distance(b, a) == doctest::Approx(0.4).epsilon(1e-12));
    CHECK(hausdorff_distance(a, a) == 0.0);

    FrontSet empty;
    empty.dims = 2;
    CHECK_THROWS_AS(hausdorff_distance(a, empty), parameter_error);

    // concentric extracted circles sit a radius step apart
    const GridSpec g = centered_grid(2, 147, 0.02, 1.25);
    const ScalarField f1 = init_signed_distance(Shape::circle(1.0), g, 0.2);
    const ScalarField f2 = init_signed_distance(Shape::circle(0.9), g, 0.2);
    const double hd = hausdorff_distance(extract_front(f1, 0.0), extract_front(f2, 0.0));
    CHECK(hd == doctest::Approx(0.1).epsilon(0.2));
}

TEST_CASE("sample csv export follows the loop layout") {
    const double h = 0.05;
    const GridSpec g = centered_grid(2, 59, h, 1.4);
    const ScalarField f = init_signed_distance(Shape::circle(1.0), g, 0.25);
    const FrontSet fr = extract_front(f, 0.0);
    RegularizationParams rp;
    rp.eps = 1e-3;
    rp.n_cut = 2;
    rp.sigma = 0.0;
    const SampleSet ss = front_samples(f, fr, CurvatureSpec::sigma(1, 2), rp);
    REQUIRE(ss.skipped == 0);

    const std::string path = "front_export_test.csv";
    write_front_csv(fr, ss, path);
    std::ifstream in(path);
    REQUIRE(static_cast<bool>(in));
    std::string line;
    REQUIRE(static_cast<bool>(std::getline(in, line)));
    CHECK(line == "x,y,nx,ny,F,weight");
    long rows = 0, blanks = 0;
    while (std::getline(in, line)) {
        if (line.empty()) {
            ++blanks;
            continue;
        }
        ++rows;
        CHECK(std::count(line.begin(), line.end(), ',') == 5);
    }
    long want_rows = 0;
    for (const auto& loop : fr.loops) want_rows += static_cast<long>(loop.size());
    CHECK(rows == want_rows);
    CHECK(blanks == static_cast<long>(fr.loops.size()) - 1);
    std::remove(path.c_str());

    CHECK_THROWS_AS(write_front_csv(fr, ss, "no_such_dir/out.csv"), config_error);
}
