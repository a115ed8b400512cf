#include "avlab/integrator.hpp"

#include <boost/numeric/odeint.hpp>
#include <cmath>

#include "avlab/types.hpp"

namespace avlab {

namespace odeint = boost::numeric::odeint;

void integrate_checkpoints(const OdeRhs& rhs, OdeState& state, const std::vector<double>& times,
                           const IntegratorOptions& opt, const OdeObserver& observe) {
    if (times.empty()) return;
    if (!(opt.rtol > 0.0) || !(opt.atol > 0.0)) throw std::invalid_argument("tolerances must be positive");
    if (times.size() == 1) {
        observe(state, times.front());
        return;
    }
    const bool forward = times.back() >= times.front();
    for (std::size_t i = 1; i < times.size(); ++i) {
        const bool ok = forward ? times[i] >= times[i - 1] : times[i] <= times[i - 1];
        if (!ok) throw std::invalid_argument("checkpoint times must be monotone");
    }
    const double span = std::abs(times.back() - times.front());
    if (span == 0.0) {
        for (double t : times) observe(state, t);
        return;
    }
    // Repeated times are observed once per entry but integrated once (odeint's dense output
    // cannot start from two equal times).
    std::vector<double> uniq;
    std::vector<int> reps;
    for (double t : times) {
        if (!uniq.empty() && t == uniq.back()) {
            ++reps.back();
        } else {
            uniq.push_back(t);
            reps.push_back(1);
        }
    }
    if (uniq.size() == 1) {
        for (int r = 0; r < reps[0]; ++r) observe(state, uniq[0]);
        return;
    }
    double dt = std::min(opt.dt0, span);
    if (!forward) dt = -dt;

    using stepper_t = odeint::runge_kutta_dopri5<OdeState>;
    auto stepper = odeint::make_dense_output(opt.atol, opt.rtol, stepper_t());
    auto sys = [&rhs](const OdeState& x, OdeState& dxdt, double t) {
        rhs(x, dxdt, t);
        for (double v : dxdt)
            if (!std::isfinite(v)) throw IntegrationError(IntegrationError::Kind::failure, "non-finite derivative");
    };
    try {
        std::size_t k = 0;
        odeint::integrate_times(stepper, sys, state, uniq.begin(), uniq.end(), dt,
                                [&](const OdeState& x, double t) {
                                    for (int r = 0; r < reps[k]; ++r) observe(x, t);
                                    ++k;
                                },
                                odeint::max_step_checker(static_cast<int>(opt.max_steps)));
    } catch (const odeint::step_adjustment_error& e) {
        throw IntegrationError(IntegrationError::Kind::step_underflow, std::string("step underflow: ") + e.what());
    } catch (const odeint::no_progress_error& e) {
        throw IntegrationError(IntegrationError::Kind::step_underflow, std::string("no progress: ") + e.what());
    } catch (const odeint::odeint_error& e) {
        throw IntegrationError(IntegrationError::Kind::failure, e.what());
    }
}

}  // namespace avlab
