#pragma once

#include <memory>
#include <vector>

#include "sqdyn/geometry.hpp"
#include "sqdyn/interval_maps.hpp"
#include "sqdyn/map_algebra.hpp"

namespace sqdyn {

// Construction of a normally rising homeomorphism f(r,s) = (g_s(r), drift(s))
// realizing prescribed edge targets on designated fiber ladders.
//
// The fiber maps work in the fiber-time coordinate theta (see interval_maps):
// a fiber at time theta steps to theta + 1, and its horizontal map pulls a
// capture interval toward a moving track.  The track follows, per phase
// (theta mod 1), a back-and-forth sweep of the entry's target arc; phases
// between bands get piecewise-linearly interpolated targets so the field is
// continuous on the whole square.  Pull strength decays like
// (1 + |theta|)^(-decay_power), which keeps f continuous up to the fixed
// horizontal edges while the per-orbit pull sum still diverges.

struct RisingEntry {
    std::vector<Segment1D> bands;  // closed fiber seed intervals inside (0, 1/2]
    Segment1D omega_target;        // abscissa arc on the top edge (degenerate = point)
    Segment1D alpha_target;        // abscissa arc on the bottom edge
};

struct RisingSpec {
    std::vector<RisingEntry> entries;
    double contraction = 0.5;      // base pull factor c in (0,1)
    double decay_power = 0.25;     // pull decay exponent per rung
    double gap_min = 0.01;         // minimal gap between bands (s-space)
    double target_margin = 0.05;   // minimal target distance from the corners
    int sweep_resolution = 1 << 20;  // sweep indices are meaningful up to this depth
};

void validate_rising_spec(const RisingSpec& spec);

// Deterministic back-and-forth sweep of [0,1]: 0, 1, then passes of 2^p
// steps of size 2^-p in alternating direction.  Dense in [0,1] with step
// sizes shrinking to zero.
double sweep01(long long k);

// The sweep scaled to a target arc; a degenerate target returns its point.
double sweep_program(const Segment1D& target, long long k);

class FiberedRisingMap {
public:
    explicit FiberedRisingMap(RisingSpec spec);

    const RisingSpec& spec() const { return spec_; }
    bool is_degenerate() const { return degenerate_; }  // no bands: plain drift

    // horizontal fiber map at ordinate s (identity at s = +-1)
    PLHomeo1D fiber_map(double s) const;
    PLHomeo1D fiber_map_at_time(double theta) const;

    PlanarPoint forward(const PlanarPoint& x) const;
    PlanarPoint inverse(const PlanarPoint& y) const;

    // one step in the extended state (r, theta); exact past the double
    // saturation of the ordinate near +-1
    void step_extended(double& r, double& theta, bool forward_dir) const;

    // track and pull-strength diagnostics (used by tests and reports)
    double track_position(double theta) const;
    double pull_strength(double theta) const;

    // recorded continuity modulus |g_s(r)-g_s'(r)| <= L |s-s'| (sampled)
    double fiber_modulus() const { return modulus_; }

private:
    struct FieldNode {
        double pos;   // phase position in (0, 1]
        double a;     // arc start
        double len;   // arc length
    };

    struct Knots {
        double u, v, rm, rp, kappa;
    };

    double field_a(const std::vector<FieldNode>& nodes, double phase) const;
    double field_len(const std::vector<FieldNode>& nodes, double phase) const;
    double eval_field(const std::vector<FieldNode>& nodes, double phase, bool len) const;
    double track_omega(double theta) const;
    double track_alpha(double theta) const;
    Knots knots_at(double theta) const;
    double estimate_modulus() const;

    RisingSpec spec_;
    bool degenerate_ = false;
    std::vector<FieldNode> omega_nodes_;
    std::vector<FieldNode> alpha_nodes_;
    double modulus_ = 0.0;
};

using RisingPtr = std::shared_ptr<const FiberedRisingMap>;

// Validates the spec and constructs the map.
RisingPtr build_rising(const RisingSpec& spec);

// MapExpr node wrapping a rising map; orbits run in the extended state.
MapExpr rising_map_expr(RisingPtr map);

}  // namespace sqdyn
