#include "fenestra/llm/prompt.hpp"

#include <cstdarg>
#include <cstdio>
#include <stdexcept>

#include "fenestra/wireless.hpp"

namespace fenestra::llm {

namespace {

std::string fmt(const char* format, ...) {
    va_list args;
    va_start(args, format);
    char buf[1024];
    std::vsnprintf(buf, sizeof buf, format, args);
    va_end(args);
    return buf;
}

std::string indent_grid(const std::string& grid) {
    std::string out = "  ";
    for (char c : grid) {
        out += c;
        if (c == '\n') out += "  ";
    }
    return out;
}

std::string window_list(const WindowLayout& l) {
    std::string out;
    for (int n = 0; n < l.size(); ++n)
        out += fmt("%s(x=%.3f, theta=%.2f deg, psi=%.2f deg)", n ? ", " : "", l.x(n), rad2deg(l.elevation(n)),
                   rad2deg(l.azimuth(n)));
    return out;
}

}  // namespace

std::string layout_json(const WindowLayout& layout) {
    std::string out = "{\"windows\":[";
    for (int n = 0; n < layout.size(); ++n)
        out += fmt("%s{\"x\":%.4f,\"theta_deg\":%.3f,\"psi_deg\":%.3f}", n ? "," : "", layout.x(n),
                   rad2deg(layout.elevation(n)), rad2deg(layout.azimuth(n)));
    return out + "]}";
}

HistoryEntry HistoryEntry::from_report(int step, const PerformanceReport& r) {
    HistoryEntry e;
    e.step = step;
    e.layout = r.layout;
    e.phi_w = std::isfinite(r.phi_w) ? r.phi_w : 0.0;
    e.phi_d = std::isfinite(r.phi_d) ? r.phi_d : 0.0;
    e.phi_o = r.phi_o;
    e.feasible = r.feasible;
    e.violations = r.violations;
    return e;
}

HistoryRing::HistoryRing(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("history ring capacity must be positive");
}

void HistoryRing::push(HistoryEntry entry) {
    entries_.push_back(std::move(entry));
    while (entries_.size() > capacity_) entries_.pop_front();
}

FeedbackPayload FeedbackPayload::from_report(const PerformanceReport& r, const MeasurementGrid& grid,
                                             const std::optional<std::filesystem::path>& image_dir,
                                             const std::string& stem) {
    FeedbackPayload f;
    f.phi_w = std::isfinite(r.phi_w) ? r.phi_w : 0.0;
    f.phi_d = std::isfinite(r.phi_d) ? r.phi_d : 0.0;
    f.phi_o = r.phi_o;
    f.feasible = r.feasible;
    f.violations = r.violations;
    if (!r.rates || !r.light) return f;
    f.wireless = render_heatmap_text(r.rates->gamma, grid.rows, grid.cols);
    f.daylight = render_heatmap_text(r.light->total, grid.rows, grid.cols);
    if (image_dir) {
        std::filesystem::create_directories(*image_dir);
        f.wireless_image = *image_dir / (stem + "_rate.png");
        f.daylight_image = *image_dir / (stem + "_light.png");
        write_png(render_heatmap_image(r.rates->gamma, grid.rows, grid.cols), *f.wireless_image);
        write_png(render_heatmap_image(r.light->total, grid.rows, grid.cols), *f.daylight_image);
    }
    return f;
}

std::vector<ChatMessage> PromptBundle::messages() const {
    std::string user;
    auto section = [&user](const char* title, const std::string& body) {
        if (body.empty()) return;
        if (!user.empty()) user += "\n";
        user += std::string("## ") + title + "\n" + body;
    };
    section("Environment", environment);
    section("Input and output format", io_format);
    section("Historical experience", history);
    section("Instruction knowledge", instructions);
    return {{"system", task_description}, {"user", user}};
}

std::string PromptBundle::render() const {
    std::string out;
    for (const ChatMessage& m : messages()) out += "[" + m.role + "]\n" + m.content + "\n";
    return out;
}

namespace {

std::string task_text(Task task) {
    std::string t =
        "You are planning an indoor wireless network and the daylighting of one room at the same time.\n"
        "An outdoor base station serves the room through N windows on one facade. Each window carries a\n"
        "transmissive reconfigurable intelligent surface (RIS) that refracts the signal into the room and\n"
        "can steer its beam. The decision variables are the window positions P along the facade and the\n"
        "beam directions: elevation Theta_r (from the window normal, into the room) and azimuth Psi_r\n"
        "(in the window plane, 0 deg along the facade direction +x, 90 deg straight up).\n"
        "Goal: maximise phi_o = phi_w + eta * phi_d, where phi_w is the user-weighted mean ratio of the\n"
        "expected sum rate to that of evenly spaced windows with boresight beams, and phi_d is the same\n"
        "ratio for workplane illuminance. Both equal 1 for the evenly spaced reference layout.\n"
        "Constraints: adjacent windows at least d_min apart (centre to centre), every window fully on the\n"
        "wall, elevation inside the steering cone, and phi_d >= T_min.\n";
    if (task == Task::Heuristic)
        t += "You act as the designer of a heuristic search: choose an algorithm from the registered pool, set\n"
             "its hyper-parameters, seed its population, and later refresh the population with better\n"
             "individuals when shown the current best solution.\n";
    return t;
}

std::string environment_text(const Scene& s) {
    const ScenarioConfig& c = s.config;
    const RoomSpec& r = s.room;
    std::string e;
    e += fmt("Room: %.2f m along the facade (x from %.2f to %.2f), %.2f m deep (y from %.2f to %.2f), %.2f m high.\n",
             r.length, r.origin.x(), r.origin.x() + r.length, r.width, r.origin.y(), r.origin.y() + r.width,
             r.height);
    e += fmt("Facade: the wall y = %.2f; the room lies at larger y. Its outward normal faces compass azimuth %.1f deg.\n",
             r.facade_y(), c.facade_azimuth_deg);
    e += fmt("Windows: N = %d, each %.2f m wide along the facade and %.2f m tall, centred %.2f m above the floor.\n",
             r.window_count, r.window_width, r.window_height, r.window_center_height);
    e += fmt("Base station: at (x, y) = (%.2f, %.2f), height %.2f m, %d antennas, %.2f W.\n", s.bs.position.x(),
             s.bs.position.y(), c.h_t, c.n_t, c.p_t);
    e += fmt("RIS per window: %d x %d elements, pitch %.4f m x %.4f m, wavelength %.4f m, penetration loss %.1f dB.\n",
             c.array_side(), c.array_side(), c.d_x, c.d_y, c.lambda_m, c.omega_db);
    e += fmt("Link budget: bandwidth %.0f MHz, noise power %.1f dBm.\n", c.bandwidth_hz / 1e6, c.noise_dbm);
    e += fmt("Indoor blockers: Poisson cylinders, density %.4f per m^2, radius %.2f m.\n", c.rho, c.r_block);
    e += fmt("Sun: zenith angle %.1f deg, compass azimuth %.1f deg; direct normal %.0f lux, diffuse sky %.0f lux; glazing transmittance %.2f.\n",
             c.theta_d_deg, c.psi_d_deg, c.e_dn, c.e_sky, c.glazing_beta);
    e += fmt("Surface reflectances: walls %.2f, floor %.2f, ceiling %.2f.\n", c.f_w, c.f_f, c.f_c);
    e += fmt("Measurement grid: %d x %d points at %.2f m spacing, workplane height %.2f m; row 1 is nearest the facade.\n",
             s.grid.rows, s.grid.cols, s.grid.spacing, c.workplane_height);
    const Eigen::Index m = s.weights.w.size();
    Eigen::Index arg = 0;
    s.weights.w.maxCoeff(&arg);
    e += fmt("User weights: beta(%.1f, %.1f) in depth times beta(%.1f, %.1f) along the facade, mean 1, min %.3f, max %.3f at row %d, column %d (%ld points).\n",
             s.weights.shape[0], s.weights.shape[1], s.weights.shape[2], s.weights.shape[3], s.weights.w.minCoeff(),
             s.weights.w.maxCoeff(), static_cast<int>(arg / s.grid.cols) + 1, static_cast<int>(arg % s.grid.cols) + 1,
             static_cast<long>(m));
    e += fmt("Bounds: x in [%.3f, %.3f] m, theta_deg in [0, %.1f], psi_deg in [0, 360).\n", r.wall_min(), r.wall_max(),
             rad2deg(s.max_elevation()));
    e += fmt("Minimum spacing: d_min = %g m.\n", c.d_min);
    e += fmt("Daylight requirement: T_min = %g.\n", c.t_min_daylight);
    e += fmt("Daylight factor: eta = %g.\n", c.eta);
    return e;
}

std::string format_text(const Scene& s, Task task, bool init, const std::vector<std::string>& pool) {
    const int n = s.room.window_count;
    std::string example = "{\"windows\":[";
    for (int k = 0; k < n; ++k) example += std::string(k ? "," : "") + "{\"x\":<m>,\"theta_deg\":<deg>,\"psi_deg\":<deg>}";
    example += "]}";
    std::string f = "Input: the scenario above";
    f += init ? ".\n" : ", your previous layouts with their scores, and heatmaps of the latest evaluation.\n";
    if (task == Task::Layout) {
        f += fmt("Output: exactly one JSON object, no other JSON, with exactly %d windows:\n", n);
        f += example + "\n";
        f += "x is the window centre in metres; list windows in increasing x.\n";
        return f;
    }
    if (init) {
        std::string names;
        for (std::size_t i = 0; i < pool.size(); ++i) names += (i ? ", " : "") + pool[i];
        f += "Output: exactly one JSON object:\n";
        f += "{\"algorithm\":<one of: " + names +
             ">,\"params\":{\"population\":<int>,\"crossover_prob\":<0..1>,\"mutation_prob\":<0..1>,"
             "\"elite\":<int>,\"t_high\":<float>,\"t_low\":<float>,\"cooling\":<0..1>},"
             "\"population\":[" + example + ", ...]}\n";
        f += "Population entries are layouts in the window format; they are repaired to satisfy the spacing and bounds.\n";
    } else {
        f += "Output: exactly one JSON object holding replacement individuals for the worst members of the population:\n";
        f += "{\"population\":[" + example + ", ...]}\n";
    }
    return f;
}

std::string knowledge_text() {
    return "- Received power falls with the square of both the base-station-to-window and the window-to-user\n"
           "  distance; windows closer to the base station deliver more power.\n"
           "- A 30 x 30 RIS forms a narrow beam: users more than a few degrees off the steered direction lose\n"
           "  most of the array gain, so steer each beam towards heavily weighted users.\n"
           "- Blockage grows with the in-room path length; points near a window are rarely blocked.\n"
           "- Daylight is best near windows. Direct sun only reaches points the sun ray passes through a\n"
           "  window for; the low sun makes deep sun patches.\n"
           "- Spreading windows evens out daylight; clustering them concentrates signal power.\n"
           "- Keep layouts feasible: violating spacing, bounds or the daylight requirement scores nothing.\n";
}

}  // namespace

PromptBundle build_init_prompt(const Scene& scene, Task task, const std::vector<std::string>& pool) {
    PromptBundle b;
    b.task_description = task_text(task);
    b.environment = environment_text(scene);
    b.io_format = format_text(scene, task, true, pool);
    b.history = "No layouts have been evaluated yet.\n";
    b.instructions = std::string(task == Task::Layout ? "Propose an initial layout.\n"
                                                      : "Choose an algorithm, its parameters and a starting population.\n") +
                     "\n" + knowledge_text();
    return b;
}

PromptBundle build_feedback_prompt(const Scene& scene, const HistoryRing& history, const HistoryEntry& best,
                                   const FeedbackPayload& feedback, Task task) {
    if (history.empty()) throw std::invalid_argument("feedback prompt needs at least one history entry");
    PromptBundle b;
    b.task_description = task_text(task);
    b.environment = environment_text(scene);
    b.io_format = format_text(scene, task, false, {});

    std::string h;
    for (const HistoryEntry& e : history.entries()) {
        h += fmt("Step %d: ", e.step) + window_list(e.layout);
        if (e.feasible)
            h += fmt(" -> phi_w=%.4f, phi_d=%.4f, phi_o=%.4f\n", e.phi_w, e.phi_d, e.phi_o);
        else
            h += " -> infeasible\n";
    }
    h += std::string(kBestLayoutMarker) + layout_json(best.layout) + fmt(" (phi_o=%.4f)\n", best.phi_o);
    b.history = h;

    std::string k = "Latest evaluation:\n";
    if (feedback.feasible)
        k += fmt("phi_w = %.4f\nphi_d = %.4f\nphi_o = %.4f\n", feedback.phi_w, feedback.phi_d, feedback.phi_o);
    else
        k += fmt("infeasible (phi_w = %.4f, phi_d = %.4f)\n", feedback.phi_w, feedback.phi_d);
    for (const std::string& v : feedback.violations) k += "violation: " + v + "\n";
    if (!feedback.wireless.grid.empty()) {
        k += fmt("Sum-rate heatmap, bins 0-9 from %.4g to %.4g bit/s, first row at the facade:\n",
                 feedback.wireless.min_value, feedback.wireless.max_value);
        k += indent_grid(feedback.wireless.grid) + "\n";
        k += fmt("Illuminance heatmap, bins 0-9 from %.4g to %.4g lux, first row at the facade:\n",
                 feedback.daylight.min_value, feedback.daylight.max_value);
        k += indent_grid(feedback.daylight.grid) + "\n";
    }
    if (feedback.wireless_image) b.images.push_back({*feedback.wireless_image, "image/png"});
    if (feedback.daylight_image) b.images.push_back({*feedback.daylight_image, "image/png"});
    if (!b.images.empty()) k += "The two heatmaps are also attached as images, sum rate first.\n";
    k += "Propose a layout that improves phi_o.\n";
    b.instructions = k + "\n" + knowledge_text();
    return b;
}

PromptBundle with_rejection(PromptBundle bundle, const std::string& kind, const std::string& detail) {
    std::string note = "Your previous response was rejected (" + kind + "): " + detail + "\n";
    note += kind == "parse-error" ? "Reply with exactly one JSON object in the required format.\n"
                                  : "Fix the listed constraint violations and reply again.\n";
    bundle.instructions = note + (bundle.instructions.empty() ? "" : "\n" + bundle.instructions);
    return bundle;
}

}  // namespace fenestra::llm
