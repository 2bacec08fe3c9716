#include "cppe/presets.hpp"

#include <cmath>

#include "cppe/error.hpp"

namespace cppe {

double BandwidthPreset::a0_rad_s() const {
    return a0_for_adiabaticity(adiabaticity, tau_cp_s, delta_hz);
}

ChirpPulse BandwidthPreset::control(double omega0_hz, double t_start_s) const {
    ChirpPulse p;
    p.a0_rad_s = a0_rad_s();
    p.tau_cp_s = tau_cp_s;
    p.delta_hz = delta_hz;
    p.omega0_hz = omega0_hz;
    p.t_start_s = t_start_s;
    return p;
}

InputPulse BandwidthPreset::input(double center_s, double offset_hz) const {
    InputPulse in;
    in.center_s = center_s;
    in.fwhm_s = input_fwhm_s;
    in.offset_hz = offset_hz;
    return in;
}

MemoryCellSpec BandwidthPreset::cell(double center_hz) const {
    MemoryCellSpec c;
    c.center_hz = center_hz;
    c.width_hz = cell_width_hz;
    c.atom_count = atom_count;
    return c;
}

const std::vector<BandwidthPreset>& bandwidth_presets() {
    static const std::vector<BandwidthPreset> presets = {
        {"750ns", 750e-9, 30e-6, 1.5e6, 800.0, 1.8e6, 2001},
        {"500ns", 500e-9, 40e-6, 2.2e6, 800.0, 2.64e6, 3001},
        {"250ns", 250e-9, 60e-6, 4.5e6, 800.0, 5.4e6, 6001},
    };
    return presets;
}

const BandwidthPreset& bandwidth_preset(int index) {
    const auto& all = bandwidth_presets();
    if (index < 1 || index > static_cast<int>(all.size())) {
        throw InvalidParameter("preset index must be 1, 2 or 3");
    }
    return all[static_cast<std::size_t>(index - 1)];
}

MemoryModel pulse_memory_defaults() {
    MemoryModel m;
    m.eta_o = 0.2305;
    m.t2_s = 806.1e-6;
    m.t1_s = 10.68e-3;
    m.noise_scale = 1.0;
    return m;
}

double tau2_for_storage(double storage_time_s, double tau_cp_s) {
    const double tau2 = 0.5 * storage_time_s - tau_cp_s;
    if (!(tau2 > 0.0)) throw InvalidParameter("storage time too short for the control pulse duration");
    return tau2;
}

PulseSchedule preset_single_schedule(const BandwidthPreset& preset, double storage_time_s,
                                     double tau1_s) {
    return single_cell_schedule(preset.input(), preset.control(),
                                tau1_s, tau2_for_storage(storage_time_s, preset.tau_cp_s));
}

PulseSchedule temporal_train_schedule(const BandwidthPreset& preset, int n_modes, double spacing_s,
                                      double storage_time_s) {
    if (n_modes < 1) throw InvalidParameter("at least one temporal mode is required");
    if (!(spacing_s > 0.0)) throw InvalidParameter("mode spacing must be > 0");
    PulseSchedule s;
    for (int k = 0; k < n_modes; ++k) s.inputs.push_back(preset.input(k * spacing_s));
    const double last = (n_modes - 1) * spacing_s;
    s.tau1_s = last + 10e-6;
    s.tau2_s = tau2_for_storage(storage_time_s, preset.tau_cp_s);
    const auto cp1 = preset.control(0.0, s.tau1_s);
    s.controls.push_back({cp1, 0, PulseRole::Store});
    s.controls.push_back({preset.control(0.0, cp1.end() + s.tau2_s), 0, PulseRole::Recall});
    return s;
}

PulseSchedule spectro_temporal_schedule(const BandwidthPreset& preset,
                                        const std::vector<MemoryCellSpec>& cells, int n_temporal,
                                        double spacing_s, double storage_time_s, int recall_cell) {
    if (n_temporal < 1) throw InvalidParameter("at least one temporal mode is required");
    if (recall_cell < 0 || recall_cell >= static_cast<int>(cells.size())) {
        throw InvalidParameter("recall cell does not exist");
    }
    PulseSchedule s;
    for (int k = 0; k < n_temporal; ++k) {
        const int pattern = (k % 7) + 1;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (pattern & (1 << (c % 3))) {
                s.inputs.push_back(preset.input(k * spacing_s, cells[c].center_hz));
            }
        }
    }
    s.tau1_s = (n_temporal - 1) * spacing_s + 10e-6;
    s.tau2_s = tau2_for_storage(storage_time_s, preset.tau_cp_s);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto cp1 = preset.control(cells[c].center_hz, s.tau1_s + c * preset.tau_cp_s);
        s.controls.push_back({cp1, static_cast<int>(c), PulseRole::Store});
        if (static_cast<int>(c) == recall_cell) {
            s.controls.push_back({preset.control(cells[c].center_hz, cp1.end() + s.tau2_s),
                                  static_cast<int>(c), PulseRole::Recall});
        }
    }
    return s;
}

PulseSchedule sequential_recall_schedule(const BandwidthPreset& preset,
                                         const std::vector<MemoryCellSpec>& cells, int n_temporal,
                                         double spacing_s,
                                         const std::vector<double>& storage_times_s) {
    if (n_temporal < 1) throw InvalidParameter("at least one temporal mode is required");
    if (storage_times_s.size() != cells.size()) {
        throw InvalidParameter("one storage time per cell is required");
    }
    PulseSchedule s;
    for (int k = 0; k < n_temporal; ++k) {
        for (const auto& c : cells) s.inputs.push_back(preset.input(k * spacing_s, c.center_hz));
    }
    s.tau1_s = (n_temporal - 1) * spacing_s + 10e-6;
    s.tau2_s = tau2_for_storage(storage_times_s.front(), preset.tau_cp_s);
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const auto cp1 = preset.control(cells[c].center_hz, s.tau1_s + c * preset.tau_cp_s);
        const double tau2 = tau2_for_storage(storage_times_s[c], preset.tau_cp_s);
        s.controls.push_back({cp1, static_cast<int>(c), PulseRole::Store});
        s.controls.push_back({preset.control(cells[c].center_hz, cp1.end() + tau2),
                              static_cast<int>(c), PulseRole::Recall});
    }
    return s;
}

std::vector<MemoryCellSpec> preset_cells(const BandwidthPreset& preset,
                                         const std::vector<double>& centers_hz) {
    std::vector<MemoryCellSpec> cells;
    for (double f : centers_hz) cells.push_back(preset.cell(f));
    return cells;
}

}  // namespace cppe
