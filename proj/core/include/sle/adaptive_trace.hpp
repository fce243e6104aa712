#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "sle/loewner.hpp"
#include "sle/sampler.hpp"

namespace sle {

// Trace extraction with dyadic refinement of the driving path.  Cells of the
// base grid are split (with Brownian-bridge midpoints from BridgedDriving)
// until the polyline meets a spatial resolution target; splitting only where
// needed keeps the quadratic zipper cost manageable.  Times stay exact dyadic
// rationals so refinement is reproducible in any order.
class TraceRefiner {
public:
    explicit TraceRefiner(BridgedDriving& drv);

    size_t cell_count() const { return cells_.size(); }
    int cell_level(size_t i) const { return cells_[i].level; }
    double cell_dt(size_t i) const;

    // boundary points gamma(t_i), one more than cells
    const std::vector<Complex>& points() const { return points_; }
    const std::vector<double>& times() const { return times_; }

    // mark cell i for splitting; returns false at the level cap
    bool split(size_t i, int max_level);
    // apply pending splits; only inserted boundary points are evaluated, so
    // previously computed points go stale by the (local) hull perturbation
    void commit();
    // recompute every boundary point against the current chain
    void full_reevaluate();

    // split every cell whose segment is longer than `spacing` (measured after
    // `measure` when given) and for which `want` holds on the segment
    // endpoints; returns the number of cells split
    size_t refine_pass(double spacing, int max_level,
                       const std::function<bool(Complex, Complex)>& want = nullptr,
                       const std::function<Complex(Complex)>& measure = nullptr);

    // lazy passes until a fully re-evaluated polyline meets the target
    void refine_to_spacing(double spacing, int max_level,
                           const std::function<bool(Complex, Complex)>& want = nullptr,
                           const std::function<Complex(Complex)>& measure = nullptr);

    TracePolyline polyline(double kappa) const;

private:
    struct Cell {
        int level;
        uint64_t index;   // at that level
    };
    void evaluate_all();
    Complex evaluate_point(size_t i) const;   // boundary point after i cells

    BridgedDriving& drv_;
    std::vector<Cell> cells_;
    std::vector<DrivingStep> steps_;   // parallel to cells_
    std::vector<Complex> points_;      // cells_.size() + 1
    std::vector<double> times_;
    std::vector<size_t> pending_;
};

} // namespace sle
