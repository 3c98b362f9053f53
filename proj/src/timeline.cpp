#include "fusebench/timeline.hpp"

#include "fusebench/errors.hpp"

#include <cmath>
#include <string>

namespace fusebench {

WindowPlan plan_windows(double duration_s, double audio_window_s, double imu_window_s,
                        double imu_overlap_s) {
    if (imu_window_s <= 0 || audio_window_s <= 0) {
        throw InvalidOverlap("window widths must be positive");
    }
    if (imu_overlap_s < 0 || imu_overlap_s >= imu_window_s) {
        throw InvalidOverlap("overlap " + std::to_string(imu_overlap_s) +
                             " must be in [0, imu window " + std::to_string(imu_window_s) + ")");
    }
    if (audio_window_s > imu_window_s) {
        throw InvalidOverlap("audio window wider than IMU window breaks center containment");
    }
    if (duration_s < imu_window_s) {
        throw SegmentTooShort("duration " + std::to_string(duration_s) + "s < IMU window " +
                              std::to_string(imu_window_s) + "s");
    }

    const double stride = imu_window_s - imu_overlap_s;
    // Tiny epsilon so durations that land exactly on a window edge keep it.
    const auto count =
        static_cast<std::size_t>(std::floor((duration_s - imu_window_s) / stride + 1e-9)) + 1;

    WindowPlan plan;
    plan.audio_half_width_s = audio_window_s / 2.0;
    plan.imu_half_width_s = imu_window_s / 2.0;
    plan.centers_s.reserve(count);
    const double first = imu_window_s / 2.0;
    for (std::size_t k = 0; k < count; ++k) {
        plan.centers_s.push_back(first + static_cast<double>(k) * stride);
    }
    return plan;
}

std::pair<double, double> window_bounds(const WindowPlan& plan, std::size_t index,
                                        Modality modality) {
    if (index < 1 || index > plan.count()) {
        throw IndexOutOfRange("timestep " + std::to_string(index) + " not in [1, " +
                              std::to_string(plan.count()) + "]");
    }
    const double c = plan.centers_s[index - 1];
    const double h =
        modality == Modality::audio ? plan.audio_half_width_s : plan.imu_half_width_s;
    return {c - h, c + h};
}

} // namespace fusebench
