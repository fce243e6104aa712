#pragma once

#include "sle/greens.hpp"
#include "sle/sampler.hpp"

// small phi table shared across tests; built once (deterministic seed)
inline const sle::PhiTable& test_phi_table() {
    static sle::PhiTable table = [] {
        sle::KappaParams p = sle::kappa_params(8.0 / 3.0);
        sle::PhiGridSpec grid;
        grid.n_theta = 16;
        grid.n_s = 48;
        grid.dt = 2e-4;
        return sle::build_phi_table(p, grid, 400, 424242, 2);
    }();
    return table;
}
