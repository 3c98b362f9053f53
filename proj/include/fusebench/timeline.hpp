#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace fusebench {

enum class Modality { audio, imu };

// Aligned audio/IMU window grid for one segment. Centers are shared between
// the modalities; each window is [center - half_width, center + half_width].
struct WindowPlan {
    std::vector<double> centers_s;
    double audio_half_width_s = 1.0;
    double imu_half_width_s = 2.0;

    std::size_t count() const { return centers_s.size(); }
};

// Lays out windows so every IMU window fits inside the segment: stride =
// imu_window_s - imu_overlap_s, first center at imu_window_s / 2,
// count = floor((duration_s - imu_window_s) / stride) + 1.
// Throws SegmentTooShort when duration_s < imu_window_s and InvalidOverlap
// for a degenerate stride or an audio window wider than the IMU window.
WindowPlan plan_windows(double duration_s, double audio_window_s = 2.0,
                        double imu_window_s = 4.0, double imu_overlap_s = 2.0);

// Bounds of the 1-based `index`-th window for the modality.
// Throws IndexOutOfRange.
std::pair<double, double> window_bounds(const WindowPlan& plan, std::size_t index,
                                        Modality modality);

} // namespace fusebench
