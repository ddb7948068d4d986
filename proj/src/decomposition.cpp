#include "holoflow/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <numbers>
#include <set>

#include <boost/math/quadrature/gauss.hpp>

#include "holoflow/dictionary.hpp"

namespace holoflow {

std::string region_kind_name(RegionKind k) {
    switch (k) {
        case RegionKind::HalfPlane: return "half-plane";
        case RegionKind::Strip: return "strip";
        case RegionKind::HalfCylinder: return "half-cylinder";
        case RegionKind::Annulus: return "annulus";
        case RegionKind::Unresolved: return "unresolved";
    }
    return "?";
}

int Decomposition::count(RegionKind k) const {
    return static_cast<int>(std::count_if(regions.begin(), regions.end(), [k](const auto& r) { return r.kind == k; }));
}

int Decomposition::count(RegionKind k, bool truncated) const {
    return static_cast<int>(std::count_if(regions.begin(), regions.end(), [&](const auto& r) {
        return r.kind == k && r.truncated == truncated;
    }));
}

int Decomposition::label_at(Complex z) const {
    if (!window.contains(z) || grid == 0) return -1;
    int i = std::clamp(static_cast<int>((z.real() - window.x0) / window.width() * grid), 0, grid - 1);
    int j = std::clamp(static_cast<int>((z.imag() - window.y0) / window.height() * grid), 0, grid - 1);
    return std::max(-1, labels[j * grid + i]);
}

namespace {

constexpr double pi = std::numbers::pi;
constexpr int kFree = -1;

using Gauss = boost::math::quadrature::gauss<double, 10>;

// int dz/h along a short segment; the raster keeps segments away from zeros.
Complex hop(const FieldExpr& h, Complex a, Complex b) {
    const auto& x = Gauss::abscissa();
    const auto& w = Gauss::weights();
    Complex mid = 0.5 * (a + b), half = 0.5 * (b - a), sum{};
    for (std::size_t k = 0; k < x.size(); ++k) sum += w[k] * (1.0 / h(mid + x[k] * half) + 1.0 / h(mid - x[k] * half));
    return sum * half;
}

struct TubeCell {
    int curve = -1;
    double dist = std::numeric_limits<double>::infinity();
    Complex point, tangent;
    std::size_t step = 0;  // trajectory sample preceding the nearest point
};

struct BoundarySample {
    int cell;
    int curve;
    int side;
    Complex point;
    double level;
};

class Raster {
public:
    Raster(const Window& w, int n) : w_(w), n_(n), dx_(w.width() / n), dy_(w.height() / n) {}
    int n() const { return n_; }
    double cell_size() const { return std::max(dx_, dy_); }
    Complex center(int c) const { return {w_.x0 + (c % n_ + 0.5) * dx_, w_.y0 + (c / n_ + 0.5) * dy_}; }
    int col(double x) const { return static_cast<int>(std::floor((x - w_.x0) / dx_)); }
    int row(double y) const { return static_cast<int>(std::floor((y - w_.y0) / dy_)); }
    bool on_border(int c) const {
        int i = c % n_, j = c / n_;
        return i == 0 || j == 0 || i == n_ - 1 || j == n_ - 1;
    }
    template <class F>
    void neighbors(int c, F&& f) const {
        int i = c % n_, j = c / n_;
        if (i > 0) f(c - 1);
        if (i + 1 < n_) f(c + 1);
        if (j > 0) f(c - n_);
        if (j + 1 < n_) f(c + n_);
    }
    // Cells whose centers lie within r of the segment a-b.
    template <class F>
    void near_segment(Complex a, Complex b, double r, F&& f) const {
        int i0 = std::max(0, col(std::min(a.real(), b.real()) - r)), i1 = std::min(n_ - 1, col(std::max(a.real(), b.real()) + r));
        int j0 = std::max(0, row(std::min(a.imag(), b.imag()) - r)), j1 = std::min(n_ - 1, row(std::max(a.imag(), b.imag()) + r));
        for (int j = j0; j <= j1; ++j)
            for (int i = i0; i <= i1; ++i) {
                int c = j * n_ + i;
                Complex p = center(c), d = b - a;
                double t = std::norm(d) > 0 ? std::clamp(((p - a) * std::conj(d)).real() / std::norm(d), 0.0, 1.0) : 0.0;
                Complex q = a + t * d;
                double dist = std::abs(p - q);
                if (dist <= r) f(c, q, dist);
            }
    }

private:
    Window w_;
    int n_;
    double dx_, dy_;
};

struct Component {
    std::vector<int> cells;
    std::set<std::pair<int, int>> sides;  // (curve, side)
};

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

}  // namespace

RegionInstance region_modulus(const FieldExpr& h, RegionInstance region) {
    switch (region.kind) {
        case RegionKind::Strip:
            if (region.transit) region.modulus.height = std::abs(flow_box(h, *region.transit).value.imag());
            break;
        case RegionKind::HalfCylinder:
            if (region.core_loop) region.modulus.r = std::abs(period_around(h, *region.core_loop).value);
            break;
        case RegionKind::Annulus:
            if (region.core_loop) region.modulus.r = std::abs(period_around(h, *region.core_loop).value);
            if (region.transit && region.modulus.r) {
                // Psi = (i r / 2 pi) log z on the model: the width is (r / 2 pi) log R.
                double width = std::abs(flow_box(h, *region.transit).value.imag());
                region.modulus.R = std::exp(2 * pi * width / *region.modulus.r);
            }
            break;
        default: break;
    }
    return region;
}

Decomposition decompose(const FieldExpr& h, const Window& window, const DecomposeOptions& opt) {
    return decompose(h, separatrix_skeleton(h, window, opt.skeleton), opt);
}

Decomposition decompose(const FieldExpr& h, Skeleton skeleton, const DecomposeOptions& opt) {
    Decomposition out;
    out.window = skeleton.window;
    out.grid = opt.grid;
    out.warnings = skeleton.warnings;
    const Raster ras(out.window, opt.grid);
    const int n = opt.grid, total = n * n;
    const double cell = ras.cell_size();
    const double tube = std::max(opt.epsilon, 0.75 * cell);
    const double disc = std::max(opt.epsilon, 3.0 * cell);

    // Fatten the skeleton and the singular points.
    std::vector<TubeCell> tubes(total);
    std::vector<int> vertex_of(total, -1);
    for (std::size_t k = 0; k < skeleton.curves.size(); ++k) {
        std::vector<std::size_t> step;
        auto line = skeleton.curves[k].traj.dense_polyline(0.5 * cell, &step);
        for (std::size_t s = 1; s < line.size(); ++s) {
            Complex a = line[s - 1], b = line[s];
            if (a == b) continue;
            Complex dir = (b - a) / std::abs(b - a);
            ras.near_segment(a, b, tube, [&](int c, Complex q, double d) {
                if (d < tubes[c].dist) tubes[c] = {static_cast<int>(k), d, q, dir, step[s - 1]};
            });
        }
    }
    for (std::size_t v = 0; v < skeleton.vertices.size(); ++v) {
        Complex p = *skeleton.vertices[v].location;
        ras.near_segment(p, p, disc, [&](int c, Complex, double) { vertex_of[c] = static_cast<int>(v); });
    }
    auto blocked = [&](int c) { return tubes[c].curve >= 0 || vertex_of[c] >= 0; };

    // Connected components of the free cells.
    std::vector<int> comp(total, kFree);
    std::vector<Component> comps;
    for (int c0 = 0; c0 < total; ++c0) {
        if (blocked(c0) || comp[c0] != kFree) continue;
        Component cc;
        std::deque<int> queue{c0};
        comp[c0] = static_cast<int>(comps.size());
        while (!queue.empty()) {
            int c = queue.front();
            queue.pop_front();
            cc.cells.push_back(c);
            ras.neighbors(c, [&](int d) {
                if (blocked(d)) {
                    if (tubes[d].curve >= 0) {
                        Complex off = ras.center(c) - tubes[d].point;
                        int side = (std::conj(tubes[d].tangent) * off).imag() >= 0 ? 1 : -1;
                        cc.sides.insert({tubes[d].curve, side});
                    }
                } else if (comp[d] == kFree) {
                    comp[d] = comp[c0];
                    queue.push_back(d);
                }
            });
        }
        comps.push_back(std::move(cc));
    }

    // Pieces of one region cut apart where it narrows below the raster scale
    // see a subset of the boundary sides of the main piece.
    const int min_cells = std::max(4, static_cast<int>(opt.sliver * total));
    std::vector<int> order(comps.size());
    for (std::size_t k = 0; k < comps.size(); ++k) order[k] = static_cast<int>(k);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return comps[a].cells.size() > comps[b].cells.size(); });
    std::vector<std::vector<int>> groups;
    std::vector<int> head_of;  // group head component
    for (int k : order) {
        int target = -1;
        if (!comps[k].sides.empty())
            for (std::size_t g = 0; g < groups.size() && target < 0; ++g) {
                const auto& big = comps[head_of[g]].sides;
                if (std::includes(big.begin(), big.end(), comps[k].sides.begin(), comps[k].sides.end()))
                    target = static_cast<int>(g);
            }
        if (target < 0) {
            groups.push_back({k});
            head_of.push_back(k);
        } else {
            groups[target].push_back(k);
        }
    }

    FlowOptions probe = skeleton.flow;
    probe.window.reset();
    probe.keep_samples = true;
    std::vector<Complex> vertex_points;
    for (const auto& v : skeleton.vertices) vertex_points.push_back(*v.location);

    struct Built {
        RegionInstance region;
        std::vector<int> members;
    };
    std::vector<Built> built;
    int dropped_cells = 0;
    for (const auto& g : groups) {
        int size = 0;
        const int main = g.front();
        for (int k : g) size += static_cast<int>(comps[k].cells.size());
        if (size < min_cells) {
            dropped_cells += size;
            continue;
        }
        const auto& cells = comps[main].cells;
        const int id = main;
        RegionInstance reg;
        reg.cells = size;
        Complex sum{};
        for (int k : g)
            for (int c : comps[k].cells) {
                sum += ras.center(c);
                reg.truncated = reg.truncated || ras.on_border(c);
            }
        reg.centroid = sum / static_cast<double>(size);
        for (int k : g)
            for (const auto& s : comps[k].sides) reg.boundary_refs.push_back(s.first);
        std::sort(reg.boundary_refs.begin(), reg.boundary_refs.end());
        reg.boundary_refs.erase(std::unique(reg.boundary_refs.begin(), reg.boundary_refs.end()), reg.boundary_refs.end());

        // Seed: the cell farthest from the component boundary.
        std::vector<int> depth(total, -1);
        std::deque<int> queue;
        for (int c : cells) {
            bool edge = ras.on_border(c);
            ras.neighbors(c, [&](int d) { edge = edge || comp[d] != id; });
            if (edge) {
                depth[c] = 0;
                queue.push_back(c);
            }
        }
        int seed_cell = cells.front();
        while (!queue.empty()) {
            int c = queue.front();
            queue.pop_front();
            if (depth[c] > depth[seed_cell]) seed_cell = c;
            ras.neighbors(c, [&](int d) {
                if (comp[d] == id && depth[d] < 0) {
                    depth[d] = depth[c] + 1;
                    queue.push_back(d);
                }
            });
        }
        reg.seed = ras.center(seed_cell);

        // Psi over the component along a breadth-first tree rooted at the seed.
        std::vector<int> parent(total, -1);
        std::vector<Complex> psi(total);
        parent[seed_cell] = seed_cell;
        queue.assign(1, seed_cell);
        std::vector<BoundarySample> samples;
        std::set<int> touched_vertices;
        while (!queue.empty()) {
            int c = queue.front();
            queue.pop_front();
            ras.neighbors(c, [&](int d) {
                if (comp[d] == id) {
                    if (parent[d] < 0) {
                        parent[d] = c;
                        psi[d] = psi[c] + hop(h, ras.center(c), ras.center(d));
                        queue.push_back(d);
                    }
                    return;
                }
                if (vertex_of[d] >= 0) touched_vertices.insert(vertex_of[d]);
                const TubeCell& t = tubes[d];
                if (t.curve < 0) return;
                double near_vertex = std::numeric_limits<double>::infinity();
                for (Complex v : vertex_points) near_vertex = std::min(near_vertex, std::abs(t.point - v));
                if (near_vertex < 2 * disc) return;
                // Levels are read at integrated samples: the interpolant between
                // them is off the trajectory by more than the level tolerance.
                const auto& traj = skeleton.curves[t.curve].traj.samples;
                Complex target = traj[t.step].z;
                if (t.step + 1 < traj.size() && std::abs(traj[t.step + 1].z - t.point) < std::abs(target - t.point))
                    target = traj[t.step + 1].z;
                if (!std::isfinite(target.real()) || std::abs(target - t.point) > 4 * cell) return;
                Complex at = psi[c] + hop(h, ras.center(c), target);
                if (!std::isfinite(at.imag())) return;
                Complex off = ras.center(c) - t.point;
                samples.push_back({c, t.curve, (std::conj(t.tangent) * off).imag() >= 0 ? 1 : -1, target, at.imag()});
            });
        }

        // Level of each boundary side, then distinct levels.
        std::map<std::pair<int, int>, std::vector<double>> per_side;
        std::map<std::pair<int, int>, const BoundarySample*> witness;
        for (const auto& s : samples) {
            per_side[{s.curve, s.side}].push_back(s.level);
            witness.emplace(std::pair{s.curve, s.side}, &s);
        }
        struct Level {
            double value;
            const BoundarySample* at;
        };
        std::vector<Level> levels;
        for (const auto& [key, vals] : per_side) levels.push_back({median(vals), witness[key]});
        std::sort(levels.begin(), levels.end(), [](const Level& a, const Level& b) { return a.value < b.value; });
        std::vector<Level> distinct;
        for (const auto& l : levels) {
            double tol = 1e-6 * std::max(1.0, std::abs(l.value));
            if (distinct.empty() || l.value - distinct.back().value > tol) distinct.push_back(l);
        }
        for (const auto& l : distinct) reg.levels.push_back(l.value);

        auto tree_path = [&](const BoundarySample& a, const BoundarySample& b) {
            std::vector<Complex> up, down;
            for (int c = a.cell;; c = parent[c]) {
                up.push_back(ras.center(c));
                if (c == seed_cell) break;
            }
            for (int c = b.cell;; c = parent[c]) {
                down.push_back(ras.center(c));
                if (c == seed_cell) break;
            }
            // Trim the common stem near the root.
            while (up.size() > 1 && down.size() > 1 && up[up.size() - 2] == down[down.size() - 2]) {
                up.pop_back();
                down.pop_back();
            }
            std::vector<Complex> pts{a.point};
            pts.insert(pts.end(), up.begin(), up.end());
            pts.insert(pts.end(), down.rbegin() + 1, down.rend());
            pts.push_back(b.point);
            return PathSpec(std::move(pts));
        };

        probe.max_steps = 2'000'000;
        Trajectory orbit = integrate_real_flow(h, reg.seed, opt.period_budget, skeleton.theta, probe);
        if (orbit.period) {
            auto loop = orbit.polyline();
            if (loop.size() > 2) {
                loop.back() = loop.front();
                reg.core_loop = PathSpec(std::move(loop));
            }
            for (int v : touched_vertices)
                if (skeleton.vertices[v].kind == SingularityKind::Zero && reg.core_loop &&
                    winding_number(reg.core_loop->waypoints, *skeleton.vertices[v].location) != 0)
                    reg.center = v;
            if (reg.center) {
                reg.kind = RegionKind::HalfCylinder;
            } else {
                reg.kind = RegionKind::Annulus;
                if (distinct.size() == 2) reg.transit = tree_path(*distinct.front().at, *distinct.back().at);
                else reg.note = "annulus without two boundary levels";
            }
        } else {
            switch (distinct.size()) {
                case 0:
                    reg.kind = RegionKind::Unresolved;
                    reg.note = "aperiodic component without boundary chains";
                    break;
                case 1: reg.kind = RegionKind::HalfPlane; break;
                case 2:
                    reg.kind = RegionKind::Strip;
                    reg.transit = tree_path(*distinct.front().at, *distinct.back().at);
                    break;
                default:
                    reg.kind = RegionKind::Unresolved;
                    reg.note = std::to_string(distinct.size()) + " boundary levels";
            }
        }
        try {
            reg = region_modulus(h, std::move(reg));
        } catch (const std::exception& e) {
            out.warnings.push_back(region_kind_name(reg.kind) + " modulus: " + e.what());
        }
        std::vector<int> members;
        for (int k : g) members.push_back(k);
        built.push_back({std::move(reg), std::move(members)});
    }
    if (dropped_cells > 0)
        out.warnings.push_back("dropped " + std::to_string(dropped_cells) + " cells in slivers below the raster scale");

    std::stable_sort(built.begin(), built.end(), [](const Built& a, const Built& b) {
        if (a.region.centroid.real() != b.region.centroid.real()) return a.region.centroid.real() < b.region.centroid.real();
        return a.region.centroid.imag() < b.region.centroid.imag();
    });
    std::vector<int> comp_label(comps.size(), -2);
    for (std::size_t r = 0; r < built.size(); ++r) {
        for (int k : built[r].members) comp_label[k] = static_cast<int>(r);
        out.regions.push_back(std::move(built[r].region));
    }
    out.labels.assign(total, -1);
    for (int c = 0; c < total; ++c)
        if (comp[c] >= 0) out.labels[c] = comp_label[comp[c]];
    out.skeleton = std::move(skeleton);
    return out;
}

}  // namespace holoflow
