#include "sle/adaptive_trace.hpp"

#include <algorithm>
#include <cmath>

namespace sle {

TraceRefiner::TraceRefiner(BridgedDriving& drv) : drv_(drv) {
    cells_.resize(drv.base_steps());
    for (size_t j = 0; j < cells_.size(); ++j) cells_[j] = {0, j};
    commit();
}

double TraceRefiner::cell_dt(size_t i) const {
    return drv_.dt0() / static_cast<double>(1ULL << cells_[i].level);
}

bool TraceRefiner::split(size_t i, int max_level) {
    if (cells_[i].level >= max_level) return false;
    pending_.push_back(i);
    return true;
}

void TraceRefiner::commit() {
    std::vector<size_t> inserted;
    if (!pending_.empty()) {
        std::sort(pending_.begin(), pending_.end());
        pending_.erase(std::unique(pending_.begin(), pending_.end()), pending_.end());
        std::vector<Cell> next;
        std::vector<Complex> next_points;
        next.reserve(cells_.size() + pending_.size());
        next_points.reserve(points_.size() + pending_.size());
        size_t p = 0;
        const bool have_points = points_.size() == cells_.size() + 1;
        for (size_t i = 0; i < cells_.size(); ++i) {
            if (have_points) next_points.push_back(points_[i]);
            if (p < pending_.size() && pending_[p] == i) {
                ++p;
                next.push_back({cells_[i].level + 1, cells_[i].index * 2});
                next.push_back({cells_[i].level + 1, cells_[i].index * 2 + 1});
                if (have_points) {
                    inserted.push_back(next_points.size());
                    next_points.push_back(Complex(0, 0));   // filled below
                }
            } else {
                next.push_back(cells_[i]);
            }
        }
        if (have_points) next_points.push_back(points_.back());
        cells_ = std::move(next);
        if (have_points) points_ = std::move(next_points);
        pending_.clear();
    }
    steps_.resize(cells_.size());
    times_.assign(cells_.size() + 1, 0.0);
    double t = 0.0;
    for (size_t i = 0; i < cells_.size(); ++i) {
        const double dt = drv_.dt0() / static_cast<double>(1ULL << cells_[i].level);
        steps_[i] = {dt, drv_.value(cells_[i].level, cells_[i].index)};
        t += dt;
        times_[i + 1] = t;
    }
    if (points_.size() != cells_.size() + 1) {
        evaluate_all();
    } else {
        for (size_t i : inserted) points_[i] = evaluate_point(i);
    }
}

void TraceRefiner::full_reevaluate() { evaluate_all(); }

Complex TraceRefiner::evaluate_point(size_t i) const {
    // tip offset matched to the local step so the evaluation point sits one
    // step above the tip
    double local_dt = drv_.dt0();
    if (i > 0) local_dt = steps_[i - 1].dt;
    if (i < steps_.size()) local_dt = std::min(local_dt, steps_[i].dt);
    const double off = 0.5 * std::sqrt(drv_.a() * local_dt);
    double u_here;
    if (i < cells_.size())
        u_here = drv_.value(cells_[i].level, cells_[i].index);
    else
        u_here = drv_.value(cells_.back().level, cells_.back().index + 1);
    const Complex w(u_here, off);
    return inverse_point_steps(std::span<const DrivingStep>(steps_.data(), i), drv_.a(), w);
}

void TraceRefiner::evaluate_all() {
    points_.resize(cells_.size() + 1);
    for (size_t i = 0; i <= cells_.size(); ++i) points_[i] = evaluate_point(i);
}

size_t TraceRefiner::refine_pass(double spacing, int max_level,
                                 const std::function<bool(Complex, Complex)>& want,
                                 const std::function<Complex(Complex)>& measure) {
    size_t nsplit = 0;
    for (size_t i = 0; i < cells_.size(); ++i) {
        Complex p0 = points_[i], p1 = points_[i + 1];
        if (measure) {
            p0 = measure(p0);
            p1 = measure(p1);
        }
        if (std::abs(p1 - p0) <= spacing) continue;
        if (want && !want(points_[i], points_[i + 1])) continue;
        if (split(i, max_level)) ++nsplit;
    }
    if (nsplit) commit();
    return nsplit;
}

void TraceRefiner::refine_to_spacing(double spacing, int max_level,
                                     const std::function<bool(Complex, Complex)>& want,
                                     const std::function<Complex(Complex)>& measure) {
    for (int outer = 0; outer < 8; ++outer) {
        for (int round = 0; round < 24; ++round)
            if (refine_pass(spacing, max_level, want, measure) == 0) break;
        full_reevaluate();
        if (refine_pass(spacing, max_level, want, measure) == 0) return;
    }
    full_reevaluate();
}

TracePolyline TraceRefiner::polyline(double kappa) const {
    TracePolyline t;
    t.kappa = kappa;
    t.dt = drv_.dt0();
    t.points = points_;
    t.times = times_;
    return t;
}

} // namespace sle
