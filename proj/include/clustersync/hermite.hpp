#pragma once

#include <array>

namespace clustersync {

/// Cubic Hermite basis at s in [0, 1]: weights for y0, h*f0, y1, h*f1.
inline std::array<double, 4> hermite_weights(double s)
{
    const double s2 = s * s, s3 = s2 * s;
    return {2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2};
}

} // namespace clustersync
