#pragma once

#include <functional>
#include <span>
#include <vector>

#include "csm/specfun.hpp"

namespace csm {

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// Gauss-Legendre rule of the given order; rules are cached per order and thread-safe.
const GaussRule& gauss_legendre(int order);

// Integral along the straight segment [ka, kb] of the complex plane.
cplx integrate_segment(const std::function<cplx(cplx)>& f, cplx ka, cplx kb, int order);

// Composite Simpson rule on a uniform grid (odd number of samples).
cplx simpson(std::span<const cplx> values, double h);

// Number of worker threads: CSM_THREADS if set, else hardware concurrency.
unsigned worker_count();

// Runs body(i) for i in [0, n) on up to worker_count() threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace csm
