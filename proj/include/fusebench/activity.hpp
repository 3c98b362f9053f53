#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fusebench {

// The twelve high-level activities of the evaluation set, in dataset order
// (the order the per-activity report tables use).
enum class ActivityLabel {
    vacuum_cleaning,
    cooking,
    doing_laundry,
    eating,
    playing_basketball,
    playing_soccer,
    playing_with_pets,
    reading_a_book,
    using_computer,
    washing_dishes,
    watching_tv,
    workout_weightlifting,
};

inline constexpr std::size_t kActivityCount = 12;

std::array<ActivityLabel, kActivityCount> all_activities();

// Canonical display string, exactly as the closed-set prompt list renders it
// (e.g. "Cleaning", "Using computer", "Workout/Weightlifting").
std::string_view canonical_string(ActivityLabel label);

// Long-form dataset name used by the per-activity tables (e.g. "Vacuum
// Cleaning"); identical to canonical for most labels.
std::string_view dataset_name(ActivityLabel label);

// Case-, whitespace- and punctuation-insensitive parse of a canonical string
// or a known alias. Returns nullopt for anything outside the closed set.
std::optional<ActivityLabel> parse_activity(std::string_view text);

// Lowercases, maps punctuation to spaces, and collapses whitespace runs.
// "Workout/Weightlifting" and "workout weightlifting" normalize identically.
std::string normalize_label_text(std::string_view text);

// The closed-set list in the order the prompt presents it (Playing soccer
// first, Playing with pets last).
std::vector<ActivityLabel> closed_set_prompt_order();

} // namespace fusebench
