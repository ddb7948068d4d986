#pragma once

#include <string>
#include <vector>

#include "holoflow/decomposition.hpp"
#include "holoflow/surface.hpp"

namespace holoflow::svg {

struct PortraitOptions {
    int size = 720;           // pixels per side of the plot area
    int sample_grid = 7;      // sample trajectories per side
    double sample_tau = 4.0;  // each direction
    int max_cells = 160;      // region shading resolution per side
};

// Phase portrait of Re(h d/dz): shaded regions (when a decomposition is
// given), thin sample orbits, bold separatrices and red singular points.
std::string phase_portrait(const FieldExpr& h, const Skeleton& sk, const Decomposition* d = nullptr,
                           const std::vector<Trajectory>& extra = {}, const PortraitOptions& opt = {});

// Pieces side by side in their flow-box charts, boundary segments labelled
// and coloured by gluing state.
std::string gluing_net(const FlatSurface& s);

}  // namespace holoflow::svg
