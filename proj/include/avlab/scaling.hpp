#pragma once

#include <string>
#include <vector>

namespace avlab {

// Least-squares fit of log y = p·log x + c. Houses the non-explicit constants as fitted prefactors.
struct ScalingFit {
    std::string quantity;
    std::string abscissa;
    double exponent = 0.0;
    double prefactor = 0.0;
    double r2 = 0.0;
    int count = 0;
    int excluded = 0;  // nonpositive or non-finite points dropped
    bool valid = false;
    std::string note;
};

// Needs at least three positive points over at least two distinct abscissae. Never throws on bad data:
// the returned fit is marked invalid with a note instead.
ScalingFit fit_scaling(const std::vector<double>& x, const std::vector<double>& y, std::string quantity = {},
                       std::string abscissa = {});

}  // namespace avlab
