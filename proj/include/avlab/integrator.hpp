#pragma once

#include <functional>
#include <vector>

namespace avlab {

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double dt0 = 1e-3;
    std::size_t max_steps = 2'000'000;  // per checkpoint interval
};

using OdeState = std::vector<double>;
using OdeRhs = std::function<void(const OdeState&, OdeState&, double)>;
using OdeObserver = std::function<void(const OdeState&, double)>;

// Adaptive Dormand-Prince 5(4) with dense output. `times` is monotone (either direction); the state is
// taken to be at times.front() on entry and observed at every entry of `times`.
// Failures are rethrown as IntegrationError.
void integrate_checkpoints(const OdeRhs& rhs, OdeState& state, const std::vector<double>& times,
                           const IntegratorOptions& opt, const OdeObserver& observe);

}  // namespace avlab
