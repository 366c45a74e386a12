#pragma once
#include <array>
#include <string>
#include <vector>

#include "gcflow/grid.hpp"

namespace gcflow {

// One ball (disk in two dimensions) given by center and radius.
struct Ball {
    Vec center;
    double radius = 1.0;
};

// Seed geometry for signed-distance initialization.  Circles, ellipses and
// single balls sit centered at the origin and axis-aligned; unions may place
// their member balls freely.
struct Shape {
    enum class Kind { circle, ellipse, ball, ball_union };
    Kind kind = Kind::circle;
    double radius = 1.0;     // circle / ball
    double a = 1.0;          // ellipse semi-axis along x
    double b = 0.5;          // ellipse semi-axis along y
    std::vector<Ball> balls; // ball_union members

    static Shape circle(double r);
    static Shape ellipse(double a, double b);
    static Shape ball(double r);
    static Shape ball_union(std::vector<Ball> members);
};

// Signed distance from (x, y) to the axis-aligned ellipse with semi-axes
// (a, b), negative inside, resolved to roundoff by a closest-point solve.
double ellipse_signed_distance(double x, double y, double a, double b);

// Exact signed distance to the shape boundary (negative inside), clamped to
// [-clamp, clamp]; far cells hold +clamp.  Ball unions use the minimum of
// the members' signed distances, which is exact for disjoint members.  A
// shape that reaches the truncation radius, or whose clamp band does, raises
// parameter_error.
ScalarField init_signed_distance(const Shape& shape, const GridSpec& g,
                                 double clamp);

// Extracted level line (2d) or level surface (3d).  Vertices are unique
// points on lattice edges between adjacent cell centers.
//   2d: each loop is a closed index sequence whose last entry repeats the
//       first; traversal keeps {u < level} on the left, i.e. loops run
//       counterclockwise around the region below the level.  Only closed
//       loops are reported.
//   3d: triangles holds vertex-index triples sharing the vertex pool.
struct FrontSet {
    int dims = 2;
    std::vector<Vec> vertices;
    std::vector<std::vector<long>> loops;
    std::vector<std::array<long, 3>> triangles;
};

// Marching extraction with linear interpolation along lattice edges.  An
// ambiguous square (or cube face) is resolved by comparing its corner
// average against the level, which keeps neighboring elements consistent.
// A level not strictly between the field's min and max yields an empty set.
FrontSet extract_front(const ScalarField& f, double level);

// total polyline length (2d) or total triangle area (3d)
double front_measure(const FrontSet& front);

// Symmetric Hausdorff distance between the vertex sets of two fronts; either
// set empty -> parameter_error.
double hausdorff_distance(const FrontSet& a, const FrontSet& b);

// One audited front point.
struct FrontSample {
    Vec position;
    Vec inward_normal;   // -Du/|Du|, unit length within roundoff
    double speed = 0.0;  // curvature-function envelope on the eigenvalues of
                         // the scaled tangential Hessian P D2u P / |Du|
    double weight = 0.0; // arc-length (2d) / area (3d) share
};

// Sampling result: one entry per usable front vertex plus the number of
// vertices dropped because the interpolated gradient fell below 10*eps or
// their interpolation stencil left the grid interior.
struct SampleSet {
    std::vector<FrontSample> samples;
    std::vector<long> vertex_index; // front vertex behind each sample
    long skipped = 0;
};

// Evaluate normal, speed and weight at every front vertex.  Gradient and
// Hessian are interpolated bilinearly/trilinearly from cell-centered central
// differences; weights split each segment (triangle) evenly among its
// endpoints (corners) and sum to the front measure.  Every vertex skipped ->
// parameter_error ("degenerate front").
SampleSet front_samples(const ScalarField& f, const FrontSet& front,
                        const CurvatureSpec& cs, const RegularizationParams& rp);

// CSV rows `x,y[,z],nx,ny[,nz],F,weight` (17 significant digits) after a
// header line.  2d rows follow loop order, each loop closed by repeating its
// first usable row and separated from the next loop by a blank line; 3d rows
// follow vertex order.  Unwritable path -> config_error.
void write_front_csv(const FrontSet& front, const SampleSet& samples,
                     const std::string& path);

} // namespace gcflow
