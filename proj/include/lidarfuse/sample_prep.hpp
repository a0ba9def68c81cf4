#pragma once

#include "lidarfuse/core.hpp"

namespace lidarfuse {

/// Bootstrap step for building an object store from a leveled capture:
/// keeps points inside `region` with z > `ground_z`, then shifts x and y so
/// their medians are zero. z is left alone. For an even count the median is
/// the mean of the two middle values. Throws Error when nothing survives.
PointCloud prepare_object_sample(const PointCloud& leveled_scene, const DetectionRegion& region, double ground_z);

/// Median as used above.
double median(std::vector<double> values);

}  // namespace lidarfuse
