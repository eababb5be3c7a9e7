#pragma once

#include <cstddef>
#include <deque>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fenestra/heatmap.hpp"
#include "fenestra/llm/client.hpp"
#include "fenestra/objective.hpp"
#include "fenestra/scene.hpp"

namespace fenestra::llm {

/// {"windows":[{"x":..,"theta_deg":..,"psi_deg":..}, ...]} with fixed precision.
std::string layout_json(const WindowLayout& layout);

struct HistoryEntry {
    int step = 0;
    WindowLayout layout;
    double phi_w = 0.0;
    double phi_d = 0.0;
    double phi_o = 0.0;
    bool feasible = false;
    std::vector<std::string> violations;

    static HistoryEntry from_report(int step, const PerformanceReport& report);
};

/// Most recent `capacity` layout -> score pairs, oldest first.
class HistoryRing {
public:
    explicit HistoryRing(std::size_t capacity = 5);
    void push(HistoryEntry entry);
    const std::deque<HistoryEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    bool empty() const { return entries_.empty(); }

private:
    std::size_t capacity_;
    std::deque<HistoryEntry> entries_;
};

/// Scores and both heatmaps of one evaluation. Text grids and images are
/// rendered from the same maps.
struct FeedbackPayload {
    double phi_w = 0.0;
    double phi_d = 0.0;
    double phi_o = 0.0;
    bool feasible = false;
    std::vector<std::string> violations;
    HeatmapText wireless;
    HeatmapText daylight;
    std::optional<std::filesystem::path> wireless_image;
    std::optional<std::filesystem::path> daylight_image;

    /// Images are written as <stem>_rate.png and <stem>_light.png under
    /// image_dir when it is given and the report carries maps.
    static FeedbackPayload from_report(const PerformanceReport& report, const MeasurementGrid& grid,
                                       const std::optional<std::filesystem::path>& image_dir = std::nullopt,
                                       const std::string& stem = "feedback");
};

/// The five prompt sections. Rendering is a pure function of the strings.
struct PromptBundle {
    std::string task_description;
    std::string environment;
    std::string io_format;
    std::string history;
    std::string instructions;
    std::vector<ImageAttachment> images;

    /// Task description as the system message, the remaining sections as one
    /// user message.
    std::vector<ChatMessage> messages() const;
    std::string render() const;
};

/// Marker preceding the best layout in feedback prompts.
inline constexpr const char* kBestLayoutMarker = "Best layout so far: ";

PromptBundle build_init_prompt(const Scene& scene, Task task = Task::Layout,
                               const std::vector<std::string>& pool = {});

/// `history` must be non-empty; `best` is the best feasible entry so far.
PromptBundle build_feedback_prompt(const Scene& scene, const HistoryRing& history, const HistoryEntry& best,
                                   const FeedbackPayload& feedback, Task task = Task::Layout);

/// Appends a correction note after a rejected response.
PromptBundle with_rejection(PromptBundle bundle, const std::string& kind, const std::string& detail);

}  // namespace fenestra::llm
