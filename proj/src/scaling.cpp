#include "avlab/scaling.hpp"

#include <cmath>

namespace avlab {

ScalingFit fit_scaling(const std::vector<double>& x, const std::vector<double>& y, std::string quantity,
                       std::string abscissa) {
    ScalingFit fit;
    fit.quantity = std::move(quantity);
    fit.abscissa = std::move(abscissa);
    if (x.size() != y.size()) {
        fit.note = "abscissa and ordinate lengths differ";
        return fit;
    }
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) {
            ++fit.excluded;
            continue;
        }
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    fit.count = static_cast<int>(lx.size());
    if (fit.excluded > 0) fit.note = std::to_string(fit.excluded) + " nonpositive point(s) excluded";
    if (fit.count < 3) {
        fit.note = "fewer than 3 positive points" + (fit.note.empty() ? "" : "; " + fit.note);
        return fit;
    }
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < fit.count; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= fit.count;
    my /= fit.count;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (int i = 0; i < fit.count; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
        syy += (ly[i] - my) * (ly[i] - my);
    }
    if (!(sxx > 1e-24)) {
        fit.note = "degenerate abscissa";
        return fit;
    }
    fit.exponent = sxy / sxx;
    fit.prefactor = std::exp(my - fit.exponent * mx);
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    fit.valid = true;
    return fit;
}

}  // namespace avlab
