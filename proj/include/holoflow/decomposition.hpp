#pragma once

#include <optional>
#include <string>
#include <vector>

#include "holoflow/trajectory.hpp"

namespace holoflow {

// Unresolved marks a component none of the four models fits, such as the
// punctured plane around a node.
enum class RegionKind { HalfPlane, Strip, HalfCylinder, Annulus, Unresolved };
std::string region_kind_name(RegionKind k);

struct Modulus {
    std::optional<double> height;  // strip
    std::optional<double> r;       // cylinder and annulus boundary length
    std::optional<double> R;       // annulus outer radius (inner radius 1)
};

struct RegionInstance {
    RegionKind kind = RegionKind::Unresolved;
    Modulus modulus;
    Complex seed;
    std::vector<int> boundary_refs;     // skeleton curve indices, sorted
    bool truncated = false;             // touches the window edge
    int cells = 0;
    Complex centroid;
    std::vector<double> levels;         // distinct Im Psi values of the boundary chains
    std::optional<int> center;          // vertex index of an enclosed center
    std::optional<PathSpec> transit;    // crosses from one boundary chain to the other
    std::optional<PathSpec> core_loop;  // closed orbit through the seed
    std::string note;
};

struct DecomposeOptions {
    double epsilon = 1e-3;      // skeleton fattening
    int grid = 400;             // raster cells per side
    double sliver = 2e-4;       // components below this area fraction are dropped
    double period_budget = 1e4;
    SkeletonOptions skeleton;
};

struct Decomposition {
    Window window;
    int grid = 0;
    Skeleton skeleton;
    std::vector<RegionInstance> regions;  // ordered by centroid
    std::vector<int> labels;              // per raster cell: region index, -1 tube, -2 dropped
    std::vector<std::string> warnings;

    int count(RegionKind k) const;
    int count(RegionKind k, bool truncated) const;
    // Region index at z, -1 on the fattened skeleton or outside.
    int label_at(Complex z) const;
};

Decomposition decompose(const FieldExpr& h, const Window& window, const DecomposeOptions& opt = {});
// Same, reusing a skeleton computed on the same window.
Decomposition decompose(const FieldExpr& h, Skeleton skeleton, const DecomposeOptions& opt = {});

// Fills the modulus from the transit path (strip, annulus width) and the core
// loop (cylinder and annulus boundary length).
RegionInstance region_modulus(const FieldExpr& h, RegionInstance region);

}  // namespace holoflow
