#include "fusebench/activity.hpp"

#include <cctype>
#include <unordered_map>

namespace fusebench {
namespace {

struct ActivityNames {
    ActivityLabel label;
    std::string_view canonical; // closed-set prompt rendering
    std::string_view dataset;   // per-activity table rendering
};

constexpr std::array<ActivityNames, kActivityCount> kNames = {{
    {ActivityLabel::vacuum_cleaning, "Cleaning", "Vacuum Cleaning"},
    {ActivityLabel::cooking, "Cooking", "Cooking"},
    {ActivityLabel::doing_laundry, "Doing laundry", "Doing laundry"},
    {ActivityLabel::eating, "Eating", "Eating"},
    {ActivityLabel::playing_basketball, "Playing basketball", "Playing basketball"},
    {ActivityLabel::playing_soccer, "Playing soccer", "Playing soccer"},
    {ActivityLabel::playing_with_pets, "Playing with pets", "Playing with pets"},
    {ActivityLabel::reading_a_book, "Reading a book", "Reading a book"},
    {ActivityLabel::using_computer, "Using computer", "Using computer"},
    {ActivityLabel::washing_dishes, "Washing dishes", "Washing dishes"},
    {ActivityLabel::watching_tv, "Watching TV", "Watching TV"},
    {ActivityLabel::workout_weightlifting, "Workout/Weightlifting", "Workout/Weightlifting"},
}};

// Dataset-style alternates accepted on input in addition to the canonical
// and dataset names.
const std::unordered_map<std::string, ActivityLabel>& alias_table() {
    static const auto* table = [] {
        auto* t = new std::unordered_map<std::string, ActivityLabel>;
        for (const auto& n : kNames) {
            (*t)[normalize_label_text(n.canonical)] = n.label;
            (*t)[normalize_label_text(n.dataset)] = n.label;
        }
        (*t)[normalize_label_text("using a computer")] = ActivityLabel::using_computer;
        return t;
    }();
    return *table;
}

} // namespace

std::array<ActivityLabel, kActivityCount> all_activities() {
    std::array<ActivityLabel, kActivityCount> out{};
    for (std::size_t i = 0; i < kNames.size(); ++i) out[i] = kNames[i].label;
    return out;
}

std::string_view canonical_string(ActivityLabel label) {
    return kNames[static_cast<std::size_t>(label)].canonical;
}

std::string_view dataset_name(ActivityLabel label) {
    return kNames[static_cast<std::size_t>(label)].dataset;
}

std::string normalize_label_text(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    bool pending_space = false;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            if (pending_space && !out.empty()) out.push_back(' ');
            pending_space = false;
            out.push_back(static_cast<char>(std::tolower(c)));
        } else {
            pending_space = true;
        }
    }
    return out;
}

std::optional<ActivityLabel> parse_activity(std::string_view text) {
    const auto& table = alias_table();
    auto it = table.find(normalize_label_text(text));
    if (it == table.end()) return std::nullopt;
    return it->second;
}

std::vector<ActivityLabel> closed_set_prompt_order() {
    return {
        ActivityLabel::playing_soccer,     ActivityLabel::playing_basketball,
        ActivityLabel::cooking,            ActivityLabel::vacuum_cleaning,
        ActivityLabel::eating,             ActivityLabel::washing_dishes,
        ActivityLabel::doing_laundry,      ActivityLabel::reading_a_book,
        ActivityLabel::using_computer,     ActivityLabel::watching_tv,
        ActivityLabel::workout_weightlifting, ActivityLabel::playing_with_pets,
    };
}

} // namespace fusebench
