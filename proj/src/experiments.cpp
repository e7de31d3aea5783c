#include "isac/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <Eigen/Core>
#include <fftw3.h>
#include <json.hpp>

#include "isac/alloc.hpp"
#include "isac/csv.hpp"
#include "isac/enhance.hpp"
#include "isac/kpi.hpp"
#include "isac/radar_rx.hpp"
#include "isac/rng.hpp"
#include "isac/special.hpp"

namespace isac::exp {

namespace fs = std::filesystem;
using io::ScenarioSpec;
using nlohmann::json;

namespace {

constexpr std::uint64_t kTrialTag = 0x771a1000;

channel::Scenario scene_for(const ScenarioSpec& spec, std::uint64_t seed)
{
    ScenarioSpec s = spec;
    s.seed = seed;
    return s.build();
}

CMat grid_for(const ScenarioSpec& spec, std::uint64_t seed)
{
    return waveform::build_symbol_grid(spec.frame.n_subcarriers, spec.frame.n_symbols,
                                       spec.constellation, seed);
}

double median(std::vector<double> v)
{
    if (v.empty())
        return 0.0;
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int range_row(const rx::RangeDopplerMap& map, double range_m)
{
    const long rows = long(map.z.rows);
    long r = std::lround(range_m / map.range_bin()) % rows;
    if (r < 0)
        r += rows;
    return int(r);
}

int doppler_col(const rx::RangeDopplerMap& map, double v)
{
    const long cols = long(map.z.cols);
    long c = std::lround(v / map.velocity_bin()) + cols / 2;
    c %= cols;
    if (c < 0)
        c += cols;
    return int(c);
}

/// Median cell power over the range annulus guard < |r - row0| <= extent,
/// across every Doppler column. Off the targets' Doppler column the clean map
/// holds thermal noise only, so distortion floors that scatter over the whole
/// map (ICI, oscillator skirts) show up against that baseline.
double annulus_median_power(const rx::RangeDopplerMap& map, int row0, int guard,
                            int extent)
{
    std::vector<double> vals;
    for (int r = 0; r < int(map.z.rows); ++r) {
        const int d = std::abs(r - row0);
        if (d > guard && d <= extent)
            for (int c = 0; c < int(map.z.cols); ++c)
                vals.push_back(std::norm(map.z(r, c)));
    }
    return std::max(median(std::move(vals)), 1e-300);
}

double annulus_floor_db(const rx::RangeDopplerMap& map, int row0, int guard, int extent)
{
    return pow_db(annulus_median_power(map, row0, guard, extent));
}

/// CFAR-style per-cell variance estimate from the annulus around a row: the
/// median of exponential cell powers is var * ln 2.
double local_cell_var(const rx::RangeDopplerMap& map, int row0, int guard, int extent)
{
    return annulus_median_power(map, row0, guard, extent) / std::log(2.0);
}

double cell_stat(const std::vector<rx::RangeDopplerMap>& maps,
                 const std::vector<double>& cell_vars, int row, int col)
{
    double s = 0.0;
    for (std::size_t i = 0; i < maps.size(); ++i)
        s += std::norm(maps[i].z(row, col)) / cell_vars[i];
    return s;
}

std::vector<double> thermal_cell_vars(const std::vector<rx::RangeDopplerMap>& maps,
                                      double noise_var)
{
    std::vector<double> vars;
    vars.reserve(maps.size());
    for (const auto& m : maps)
        vars.push_back(m.cell_noise_var(noise_var));
    return vars;
}

/// Max detection statistic over a (2*rr+1) x (2*rc+1) neighborhood; rows
/// clamp, Doppler wraps.
double max_stat_near(const std::vector<rx::RangeDopplerMap>& maps,
                     const std::vector<double>& cell_vars, int row, int col, int rr,
                     int rc)
{
    const int rows = int(maps.front().z.rows);
    const int cols = int(maps.front().z.cols);
    double best = 0.0;
    for (int dr = -rr; dr <= rr; ++dr) {
        const int r = row + dr;
        if (r < 0 || r >= rows)
            continue;
        for (int dc = -rc; dc <= rc; ++dc) {
            const int c = ((col + dc) % cols + cols) % cols;
            best = std::max(best, cell_stat(maps, cell_vars, r, c));
        }
    }
    return best;
}

double per_cell_rate(double pfa, std::size_t cells)
{
    return -std::expm1(std::log1p(-pfa) / double(cells));
}

std::vector<rx::RangeDopplerMap> maps_for(const channel::RadarFrame& frame, const CMat& x,
                                          const RMat& p, const FrameConfig& cfg,
                                          int pad_n, int pad_m)
{
    std::vector<rx::RangeDopplerMap> maps;
    maps.reserve(frame.y.size());
    for (const auto& y : frame.y)
        maps.push_back(rx::range_doppler_map(y, x, p, cfg, pad_n, pad_m));
    return maps;
}

std::size_t strongest_target(const ScenarioSpec& spec)
{
    std::size_t best = 0;
    for (std::size_t k = 1; k < spec.targets.size(); ++k)
        if (spec.targets[k].snr_db > spec.targets[best].snr_db)
            best = k;
    return best;
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path.string());
    out << text;
    if (!out)
        throw std::runtime_error("write failed: " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

} // namespace

std::vector<std::string> experiment_names()
{
    return {"range-profile", "ici-impact",    "pn-impact",  "ici-exploit",
            "pn-exploit",    "detection-roc", "crb-sweep",  "alloc-frontier",
            "mcpc-analysis"};
}

IciImpactMetrics ici_impact_metrics(const ScenarioSpec& spec, int trials)
{
    if (spec.targets.empty())
        throw std::invalid_argument("ici-impact: scenario needs at least one target");
    if (spec.options.velocities_mps.size() < 2)
        throw std::invalid_argument("ici-impact: options.velocities_mps needs two "
                                    "entries (static, moving)");
    IciImpactMetrics out;
    out.v_static = spec.options.velocities_mps.front();
    out.v_moving = spec.options.velocities_mps.back();

    const std::size_t strong = strongest_target(spec);
    const int pad_n = spec.options.pad_n, pad_m = spec.options.pad_m;
    std::vector<double> rises(trials);
    std::vector<char> lost(trials, 0);

#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t seed_t = substream(spec.seed, kTrialTag + t);
        const CMat x = grid_for(spec, seed_t);
        const RMat p = waveform::uniform_power_grid(spec.frame);

        ScenarioSpec spec_a = spec, spec_b = spec;
        for (auto& tg : spec_a.targets)
            tg.velocity_mps = out.v_static;
        for (auto& tg : spec_b.targets)
            tg.velocity_mps = out.v_moving;

        const auto frame_a = channel::simulate_radar_frame(scene_for(spec_a, seed_t), x, p);
        const auto frame_b = channel::simulate_radar_frame(scene_for(spec_b, seed_t), x, p);
        const auto map_a = rx::range_doppler_map(frame_a.y[0], x, p, spec.frame, pad_n, pad_m);
        const auto map_b = rx::range_doppler_map(frame_b.y[0], x, p, spec.frame, pad_n, pad_m);

        const int row_s = range_row(map_a, spec.targets[strong].range_m);
        const int guard = 4 * pad_n;
        const int extent = spec.frame.n_subcarriers * pad_n / 8;
        rises[t] = annulus_floor_db(map_b, row_s, guard, extent) -
                   annulus_floor_db(map_a, row_s, guard, extent);

        // Weak-target loss uses a CFAR reference: the per-cell variance comes
        // from the annulus around the tested range, so a lifted interference
        // floor raises the effective threshold like an adaptive detector.
        const auto maps_b = maps_for(frame_b, x, p, spec.frame, pad_n, pad_m);
        const std::size_t cells = maps_b[0].z.size();
        const double thr = special::detection_threshold(
            int(maps_b.size()), per_cell_rate(spec.options.pfa, cells));
        const int col_b = doppler_col(map_b, out.v_moving);
        for (std::size_t k = 0; k < spec.targets.size(); ++k) {
            if (k == strong)
                continue;
            const int row_k = range_row(map_b, spec.targets[k].range_m);
            std::vector<double> vars;
            vars.reserve(maps_b.size());
            for (const auto& m : maps_b)
                vars.push_back(local_cell_var(m, row_k, guard, extent));
            const double stat = max_stat_near(maps_b, vars, row_k, col_b, pad_n, pad_m);
            if (stat < thr)
                lost[t] = 1;
        }
    }

    out.floor_rise_db_median = median(rises);
    int n_lost = 0;
    for (char c : lost)
        n_lost += c;
    out.weak_loss_rate = double(n_lost) / double(trials);
    return out;
}

PnImpactMetrics pn_impact_metrics(const ScenarioSpec& spec, int trials)
{
    if (spec.targets.size() < 2)
        throw std::invalid_argument("pn-impact: scenario needs a strong and a weak "
                                    "target");
    const std::size_t strong = strongest_target(spec);
    std::size_t weak = strong == 0 ? 1 : 0;
    for (std::size_t k = 0; k < spec.targets.size(); ++k)
        if (k != strong && spec.targets[k].snr_db < spec.targets[weak].snr_db)
            weak = k;

    const int pad_n = spec.options.pad_n, pad_m = spec.options.pad_m;
    std::vector<double> rises(trials), margins_pn(trials), margins_comp(trials);

#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t seed_t = substream(spec.seed, kTrialTag + t);
        const CMat x = grid_for(spec, seed_t);
        const RMat p = waveform::uniform_power_grid(spec.frame);

        ScenarioSpec spec_clean = spec;
        spec_clean.impairment = channel::ImpairmentMode::none;
        ScenarioSpec spec_pn = spec;
        spec_pn.impairment = channel::ImpairmentMode::phase_noise;

        const auto frame_c = channel::simulate_radar_frame(scene_for(spec_clean, seed_t), x, p);
        const auto frame_p = channel::simulate_radar_frame(scene_for(spec_pn, seed_t), x, p);
        const auto map_c = rx::range_doppler_map(frame_c.y[0], x, p, spec.frame, pad_n, pad_m);
        const auto map_p = rx::range_doppler_map(frame_p.y[0], x, p, spec.frame, pad_n, pad_m);

        const int row_s = range_row(map_c, spec.targets[strong].range_m);
        const int guard = 4 * pad_n;
        const int extent = spec.frame.n_subcarriers * pad_n / 8;
        rises[t] = annulus_floor_db(map_p, row_s, guard, extent) -
                   annulus_floor_db(map_c, row_s, guard, extent);

        const std::size_t cells = map_p.z.size();
        const double thr =
            special::detection_threshold(1, per_cell_rate(spec.options.pfa, cells));
        const int row_w = range_row(map_p, spec.targets[weak].range_m);
        const int col_w = doppler_col(map_p, spec.targets[weak].velocity_mps);
        // CFAR margins: the oscillator skirt around the strong echo raises the
        // local reference level, pushing the weak echo below threshold.
        const double stat_pn =
            max_stat_near({map_p}, {local_cell_var(map_p, row_w, guard, extent)}, row_w,
                          col_w, pad_n, pad_m);

        const auto comp = enh::pn_compensate(frame_p.y[0], x, p, spec.frame,
                                             spec.pn_model, 3);
        const auto map_comp =
            rx::range_doppler_map(comp.y_comp, x, p, spec.frame, pad_n, pad_m);
        const double stat_comp =
            max_stat_near({map_comp}, {local_cell_var(map_comp, row_w, guard, extent)},
                          row_w, col_w, pad_n, pad_m);

        margins_pn[t] = pow_db(std::max(stat_pn, 1e-300) / thr);
        margins_comp[t] = pow_db(std::max(stat_comp, 1e-300) / thr);
    }

    PnImpactMetrics out;
    out.floor_rise_db_median = median(rises);
    out.margin_pn_db_median = median(margins_pn);
    out.margin_comp_db_median = median(margins_comp);
    std::vector<double> rec(trials);
    for (int t = 0; t < trials; ++t)
        rec[t] = margins_comp[t] - margins_pn[t];
    out.margin_recovery_db_median = median(rec);
    return out;
}

ExploitMetrics ici_exploit_metrics(const ScenarioSpec& spec, int trials)
{
    if (spec.targets.empty())
        throw std::invalid_argument("ici-exploit: scenario needs a target");
    const double v_true = spec.targets.front().velocity_mps;
    const double v_amb =
        spec.frame.wavelength() / (2.0 * spec.frame.symbol_duration());

    ExploitMetrics out;
    out.truth = v_true;
    out.estimates.assign(trials, 0.0);
    std::vector<char> ok(trials, 0);

#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t seed_t = substream(spec.seed, kTrialTag + t);
        const CMat x = grid_for(spec, seed_t);
        const RMat p = waveform::uniform_power_grid(spec.frame);
        const auto frame = channel::simulate_radar_frame(scene_for(spec, seed_t), x, p);
        const auto map = rx::range_doppler_map(frame.y[0], x, p, spec.frame,
                                               spec.options.pad_n, spec.options.pad_m);
        std::size_t br = 0, bc = 0;
        double best = -1.0;
        for (std::size_t r = 0; r < map.z.rows; ++r)
            for (std::size_t c = 0; c < map.z.cols; ++c)
                if (std::abs(map.z(r, c)) > best) {
                    best = std::abs(map.z(r, c));
                    br = r;
                    bc = c;
                }
        const double coarse_v = map.velocity_at(bc);
        const auto res = enh::ici_velocity_disambiguate(frame.y[0], x, p, spec.frame,
                                                        coarse_v, spec.options.span,
                                                        spec.options.pad_n,
                                                        spec.options.pad_m);
        out.estimates[t] = res.velocity;
        ok[t] = std::fabs(res.velocity - v_true) <= v_amb / 4.0;
    }
    int n_ok = 0;
    for (char c : ok)
        n_ok += c;
    out.success_rate = double(n_ok) / double(trials);
    return out;
}

ExploitMetrics pn_exploit_metrics(const ScenarioSpec& spec, int trials)
{
    if (spec.targets.empty())
        throw std::invalid_argument("pn-exploit: scenario needs a target");
    const double r_true = spec.targets.front().range_m;
    const double r_amb = kSpeedOfLight / (2.0 * spec.frame.subcarrier_spacing);

    ExploitMetrics out;
    out.truth = r_true;
    out.estimates.assign(trials, 0.0);
    std::vector<char> ok(trials, 0);

#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < trials; ++t) {
        const std::uint64_t seed_t = substream(spec.seed, kTrialTag + t);
        const CMat x = grid_for(spec, seed_t);
        const RMat p = waveform::uniform_power_grid(spec.frame);
        const auto frame = channel::simulate_radar_frame(scene_for(spec, seed_t), x, p);
        const auto map = rx::range_doppler_map(frame.y[0], x, p, spec.frame,
                                               spec.options.pad_n, spec.options.pad_m);
        std::size_t br = 0;
        double best = -1.0;
        for (std::size_t r = 0; r < map.z.rows; ++r)
            for (std::size_t c = 0; c < map.z.cols; ++c)
                if (std::abs(map.z(r, c)) > best) {
                    best = std::abs(map.z(r, c));
                    br = r;
                }
        const double coarse_r = map.range_at(br);
        const auto res = enh::pn_range_disambiguate(frame.y[0], x, p, spec.frame,
                                                    spec.pn_model, spec.mode, coarse_r,
                                                    spec.options.span);
        out.estimates[t] = res.range;
        ok[t] = std::fabs(res.range - r_true) <= r_amb / 4.0;
    }
    int n_ok = 0;
    for (char c : ok)
        n_ok += c;
    out.success_rate = double(n_ok) / double(trials);
    return out;
}

RocMetrics detection_roc_metrics(const ScenarioSpec& spec, int noise_trials,
                                 int pd_trials)
{
    RocMetrics out;
    out.pfa_design = spec.options.pfa;
    out.noise_trials = noise_trials;

    const RMat p = waveform::uniform_power_grid(spec.frame);
    std::vector<char> fa(noise_trials, 0);

#pragma omp parallel for schedule(dynamic)
    for (int t = 0; t < noise_trials; ++t) {
        const std::uint64_t seed_t = substream(spec.seed, kTrialTag + t);
        const CMat x = grid_for(spec, seed_t);
        ScenarioSpec noise_spec = spec;
        noise_spec.targets.clear();
        noise_spec.impairment = channel::ImpairmentMode::none;
        const auto frame = channel::simulate_radar_frame(scene_for(noise_spec, seed_t), x, p);
        const auto maps = maps_for(frame, x, p, spec.frame, 1, 1);
        const auto rep = rx::glrt_detect(maps, spec.noise_radar, spec.options.pfa);
        fa[t] = !rep.detections.empty();
    }
    int n_fa = 0;
    for (char c : fa)
        n_fa += c;
    out.pfa_empirical = double(n_fa) / double(noise_trials);

    const int n = spec.frame.n_subcarriers, m = spec.frame.n_symbols;
    const std::size_t cells = std::size_t(n) * m;
    const double p_cell = per_cell_rate(spec.options.pfa, cells);
    const double thr = special::detection_threshold(1, p_cell);
    const int bin_r = n / 4;

    for (double snr_db : spec.options.snr_sweep_db) {
        const double gamma = db_to_pow(snr_db);
        std::vector<char> hit(pd_trials, 0);
#pragma omp parallel for schedule(dynamic)
        for (int t = 0; t < pd_trials; ++t) {
            const std::uint64_t seed_t =
                substream(spec.seed, kTrialTag + 0x10000 + t);
            const CMat x = grid_for(spec, seed_t);
            channel::Scenario sc;
            sc.frame = spec.frame;
            sc.arrays = spec.arrays;
            sc.noise_radar = spec.noise_radar;
            sc.seed = seed_t;
            Target tgt;
            tgt.delay = double(bin_r) / (double(n) * spec.frame.subcarrier_spacing);
            auto rng = make_rng(substream(seed_t, 1));
            std::uniform_real_distribution<double> uni(0.0, 2.0 * kPi);
            tgt.gain = std::polar(
                std::sqrt(gamma * spec.noise_radar / spec.frame.total_power), uni(rng));
            sc.targets.push_back(tgt);
            const auto frame = channel::simulate_radar_frame(sc, x, p);
            const auto map = rx::range_doppler_map(frame.y[0], x, p, spec.frame, 1, 1);
            hit[t] = std::norm(map.z(bin_r, m / 2)) /
                         map.cell_noise_var(spec.noise_radar) >=
                     thr;
        }
        int n_hit = 0;
        for (char c : hit)
            n_hit += c;
        out.snr_db.push_back(snr_db);
        out.pd_empirical.push_back(double(n_hit) / double(pd_trials));
        out.pd_theory.push_back(rx::theoretical_pd(gamma, p_cell));
    }
    return out;
}

namespace {

void run_range_profile(const ScenarioSpec& spec, const fs::path& out)
{
    const CMat x = grid_for(spec, spec.seed);
    const RMat p = waveform::uniform_power_grid(spec.frame);
    const auto sc = spec.build();
    const auto frame = channel::simulate_radar_frame(sc, x, p);
    const auto maps = maps_for(frame, x, p, spec.frame, spec.options.pad_n,
                               spec.options.pad_m);
    auto rep = rx::glrt_detect(maps, spec.noise_radar, spec.options.pfa);
    if (maps.size() >= 2)
        rx::estimate_angles(rep, maps, spec.arrays);

    io::write_rd_map_db(out / "rd_map.csv", maps[0]);
    const auto profile = rx::range_profile_db(maps[0]);
    std::vector<double> ranges(profile.size());
    for (std::size_t r = 0; r < profile.size(); ++r)
        ranges[r] = maps[0].range_at(r);
    io::write_table(out / "range_profile.csv", {"range_m", "power_db"},
                    {ranges, profile});

    std::vector<double> dr, dv, da, dre, dim, dst;
    for (const auto& d : rep.detections) {
        dr.push_back(d.range);
        dv.push_back(d.velocity);
        da.push_back(d.angle);
        dre.push_back(d.amplitude.real());
        dim.push_back(d.amplitude.imag());
        dst.push_back(d.statistic);
    }
    io::write_table(out / "detections.csv",
                    {"range_m", "velocity_mps", "angle_rad", "amp_re", "amp_im",
                     "statistic"},
                    {dr, dv, da, dre, dim, dst});

    kpi::KpiReport report;
    // Map-domain SNR of the strongest echo: echo SNR times the integrated
    // transmit power (processing gain).
    double gamma = 1.0;
    for (const auto& t : spec.targets)
        gamma = std::max(gamma, db_to_pow(t.snr_db) * spec.frame.total_power);
    const auto crb = kpi::crb_bounds(gamma, spec.frame, spec.arrays, 0.0);
    const auto res = kpi::resolutions(spec.frame, spec.arrays);
    report.crb_range = crb.range;
    report.crb_velocity = crb.velocity;
    report.crb_angle = crb.angle;
    report.res_range = res.range;
    report.res_velocity = res.velocity;
    report.res_angle = res.angle;
    report.pd = rx::theoretical_pd(gamma, per_cell_rate(spec.options.pfa,
                                                        maps[0].z.size()));
    if (!spec.comm_paths.empty()) {
        const auto comm = channel::simulate_comm_frame(sc, x, p);
        report.rate = kpi::achievable_rate(comm.h, p, spec.noise_comm);
    }
    write_text(out / "kpi.json", kpi::to_json(report) + "\n");
}

std::string num_label(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

void run_ici_impact(const ScenarioSpec& spec, const fs::path& out)
{
    for (double v : spec.options.velocities_mps) {
        ScenarioSpec sv = spec;
        for (auto& t : sv.targets)
            t.velocity_mps = v;
        const CMat x = grid_for(sv, sv.seed);
        const RMat p = waveform::uniform_power_grid(sv.frame);
        const auto frame = channel::simulate_radar_frame(sv.build(), x, p);
        const auto map = rx::range_doppler_map(frame.y[0], x, p, sv.frame,
                                               sv.options.pad_n, sv.options.pad_m);
        const auto profile = rx::range_profile_db(map);
        std::vector<double> ranges(profile.size());
        for (std::size_t r = 0; r < profile.size(); ++r)
            ranges[r] = map.range_at(r);
        io::write_table(out / ("profile_v" + num_label(v) + ".csv"),
                        {"range_m", "power_db"}, {ranges, profile});
    }
    const auto metrics = ici_impact_metrics(spec, spec.options.trials);
    json j;
    j["v_static_mps"] = metrics.v_static;
    j["v_moving_mps"] = metrics.v_moving;
    j["floor_rise_db_median"] = metrics.floor_rise_db_median;
    j["weak_target_loss_rate"] = metrics.weak_loss_rate;
    j["trials"] = spec.options.trials;
    write_json(out / "metrics.json", j);
}

void run_pn_impact(const ScenarioSpec& spec, const fs::path& out)
{
    const CMat x = grid_for(spec, spec.seed);
    const RMat p = waveform::uniform_power_grid(spec.frame);

    ScenarioSpec spec_clean = spec;
    spec_clean.impairment = channel::ImpairmentMode::none;
    ScenarioSpec spec_pn = spec;
    spec_pn.impairment = channel::ImpairmentMode::phase_noise;

    const auto frame_c = channel::simulate_radar_frame(spec_clean.build(), x, p);
    const auto frame_p = channel::simulate_radar_frame(spec_pn.build(), x, p);
    const auto comp = enh::pn_compensate(frame_p.y[0], x, p, spec.frame, spec.pn_model, 3);

    const struct {
        const char* name;
        const CMat* y;
    } variants[] = {{"profile_clean.csv", &frame_c.y[0]},
                    {"profile_pn.csv", &frame_p.y[0]},
                    {"profile_compensated.csv", &comp.y_comp}};
    for (const auto& v : variants) {
        const auto map = rx::range_doppler_map(*v.y, x, p, spec.frame,
                                               spec.options.pad_n, spec.options.pad_m);
        const auto profile = rx::range_profile_db(map);
        std::vector<double> ranges(profile.size());
        for (std::size_t r = 0; r < profile.size(); ++r)
            ranges[r] = map.range_at(r);
        io::write_table(out / v.name, {"range_m", "power_db"}, {ranges, profile});
    }

    const auto metrics = pn_impact_metrics(spec, spec.options.trials);
    json j;
    j["floor_rise_db_median"] = metrics.floor_rise_db_median;
    j["margin_pn_db_median"] = metrics.margin_pn_db_median;
    j["margin_compensated_db_median"] = metrics.margin_comp_db_median;
    j["margin_recovery_db_median"] = metrics.margin_recovery_db_median;
    j["trials"] = spec.options.trials;
    write_json(out / "metrics.json", j);
}

void run_ici_exploit(const ScenarioSpec& spec, const fs::path& out)
{
    const auto metrics = ici_exploit_metrics(spec, spec.options.trials);
    std::vector<double> trial_idx(metrics.estimates.size()), success(metrics.estimates.size());
    for (std::size_t t = 0; t < metrics.estimates.size(); ++t) {
        trial_idx[t] = double(t);
        const double v_amb =
            spec.frame.wavelength() / (2.0 * spec.frame.symbol_duration());
        success[t] = std::fabs(metrics.estimates[t] - metrics.truth) <= v_amb / 4.0;
    }
    io::write_table(out / "trials.csv", {"trial", "velocity_mps", "success"},
                    {trial_idx, metrics.estimates, success});
    json j;
    j["true_velocity_mps"] = metrics.truth;
    j["success_rate"] = metrics.success_rate;
    j["trials"] = spec.options.trials;
    write_json(out / "metrics.json", j);
}

void run_pn_exploit(const ScenarioSpec& spec, const fs::path& out)
{
    const auto metrics = pn_exploit_metrics(spec, spec.options.trials);
    std::vector<double> trial_idx(metrics.estimates.size()), success(metrics.estimates.size());
    const double r_amb = kSpeedOfLight / (2.0 * spec.frame.subcarrier_spacing);
    for (std::size_t t = 0; t < metrics.estimates.size(); ++t) {
        trial_idx[t] = double(t);
        success[t] = std::fabs(metrics.estimates[t] - metrics.truth) <= r_amb / 4.0;
    }
    io::write_table(out / "trials.csv", {"trial", "range_m", "success"},
                    {trial_idx, metrics.estimates, success});
    json j;
    j["true_range_m"] = metrics.truth;
    j["success_rate"] = metrics.success_rate;
    j["trials"] = spec.options.trials;
    write_json(out / "metrics.json", j);
}

void run_detection_roc(const ScenarioSpec& spec, const fs::path& out)
{
    const int noise_trials = spec.options.trials;
    const int pd_trials = std::max(200, spec.options.trials / 2);
    const auto metrics = detection_roc_metrics(spec, noise_trials, pd_trials);
    io::write_table(out / "roc.csv", {"snr_db", "pd_empirical", "pd_theory"},
                    {metrics.snr_db, metrics.pd_empirical, metrics.pd_theory});
    json j;
    j["pfa_design"] = metrics.pfa_design;
    j["pfa_empirical"] = metrics.pfa_empirical;
    j["noise_trials"] = metrics.noise_trials;
    j["pd_trials"] = pd_trials;
    write_json(out / "pfa.json", j);
}

void run_crb_sweep(const ScenarioSpec& spec, const fs::path& out)
{
    const double phi = spec.targets.empty()
                           ? 0.0
                           : spec.targets.front().angle_deg * kPi / 180.0;
    std::vector<double> snr, cr, cv, ca, pd;
    const std::size_t cells =
        std::size_t(spec.frame.n_subcarriers) * spec.frame.n_symbols;
    for (double s : spec.options.snr_sweep_db) {
        const double gamma = db_to_pow(s);
        const auto b = kpi::crb_bounds(gamma, spec.frame, spec.arrays, phi);
        snr.push_back(s);
        cr.push_back(b.range);
        cv.push_back(b.velocity);
        ca.push_back(b.angle);
        pd.push_back(rx::theoretical_pd(gamma, per_cell_rate(spec.options.pfa, cells)));
    }
    io::write_table(out / "crb.csv",
                    {"snr_db", "crb_range_m2", "crb_velocity_mps2", "crb_angle_rad2",
                     "pd"},
                    {snr, cr, cv, ca, pd});
    const auto res = kpi::resolutions(spec.frame, spec.arrays);
    json j;
    j["res_range_m"] = res.range;
    j["res_velocity_mps"] = res.velocity;
    j["res_angle_rad"] = res.angle;
    write_json(out / "resolutions.json", j);
}

void run_alloc_frontier(const ScenarioSpec& spec, const fs::path& out)
{
    const int n = spec.frame.n_subcarriers;
    alloc::AllocationProblem prob;
    prob.p_total = spec.frame.total_power;
    auto rng_u = make_rng(substream(spec.seed, 0xa110c1));
    auto rng_s = make_rng(substream(spec.seed, 0xa110c2));
    for (int i = 0; i < n; ++i) {
        prob.gains_comm.push_back(std::norm(randn_c(rng_u)));
        prob.gains_sensing.push_back(std::norm(randn_c(rng_s)));
    }

    std::vector<double> weights;
    for (int i = 0; i <= 20; ++i)
        weights.push_back(double(i) / 20.0);
    const auto frontier = alloc::scalarized_pareto(prob, weights);
    std::vector<double> fw, fs_, fu;
    for (const auto& pt : frontier) {
        fw.push_back(pt.weight);
        fs_.push_back(pt.mi_sensing);
        fu.push_back(pt.mi_comm);
    }
    io::write_table(out / "frontier.csv", {"weight", "mi_sensing_bits", "mi_comm_bits"},
                    {fw, fs_, fu});

    std::vector<double> lws, rates, rms;
    const double center = 0.5 * double(n - 1);
    const double s_max = center * center;
    for (int i = 0; i <= 10; ++i) {
        const double lw = double(i) / 10.0;
        const auto p = alloc::crb_aware_allocation(n, prob.p_total, lw, prob.gains_comm);
        double rate = 0.0, bw_term = 0.0;
        for (int k = 0; k < n; ++k) {
            rate += std::log2(1.0 + prob.gains_comm[k] * p[k]);
            bw_term += p[k] * (k - center) * (k - center);
        }
        lws.push_back(lw);
        rates.push_back(rate);
        rms.push_back(s_max > 0 ? bw_term / (prob.p_total * s_max) : 0.0);
    }
    io::write_table(out / "crb_tradeoff.csv", {"lambda_w", "rate_bits", "rms_bw_norm"},
                    {lws, rates, rms});
}

void run_mcpc_analysis(const ScenarioSpec& spec, const fs::path& out)
{
    const auto& o = spec.options;
    const auto family = waveform::mcpc_shifted_family(o.mcpc_carriers, o.mcpc_chips,
                                                      waveform::CodeFamily::p4,
                                                      o.mcpc_chip_duration_s, 0.0);
    const double fs = 8.0 * double(o.mcpc_carriers) / o.mcpc_chip_duration_s;
    const auto env = waveform::mcpc_envelope(family, fs);
    io::write_sample_stream(out / "envelope.csv", env);

    std::vector<cplx> unit_weights(std::size_t(o.mcpc_carriers), cplx{1.0, 0.0});
    const auto pulse = waveform::ofdm_pulse(o.mcpc_carriers, unit_weights,
                                            o.mcpc_chip_duration_s, fs);

    const double t_total = o.mcpc_chip_duration_s * o.mcpc_chips;
    const double delay_step = o.mcpc_chip_duration_s / (8.0 * o.mcpc_carriers);
    std::vector<double> delays;
    for (double d = -1.5 * o.mcpc_chip_duration_s; d <= 1.5 * o.mcpc_chip_duration_s;
         d += delay_step)
        delays.push_back(d);
    const double dop_step = 1.0 / (16.0 * t_total);
    std::vector<double> dopplers;
    for (double f = -3.0 / t_total; f <= 3.0 / t_total; f += dop_step)
        dopplers.push_back(f);

    const auto af_delay = waveform::ambiguity_function(env, delays, {0.0});
    const auto af_doppler = waveform::ambiguity_function(env, {0.0}, dopplers);

    std::vector<double> dcut(delays.size()), fcut(dopplers.size());
    for (std::size_t i = 0; i < delays.size(); ++i)
        dcut[i] = af_delay(i, 0);
    for (std::size_t i = 0; i < dopplers.size(); ++i)
        fcut[i] = af_doppler(0, i);

    std::vector<double> dcut_db(dcut.size()), fcut_db(fcut.size());
    for (std::size_t i = 0; i < dcut.size(); ++i)
        dcut_db[i] = pow_db(std::max(dcut[i] * dcut[i], 1e-300));
    for (std::size_t i = 0; i < fcut.size(); ++i)
        fcut_db[i] = pow_db(std::max(fcut[i] * fcut[i], 1e-300));
    io::write_table(out / "af_delay.csv", {"delay_s", "af_db"}, {delays, dcut_db});
    io::write_table(out / "af_doppler.csv", {"doppler_hz", "af_db"},
                    {dopplers, fcut_db});

    json j;
    j["papr_mcpc_db"] = pow_db(waveform::papr(env));
    j["papr_single_carrier_pulse_db"] = pow_db(waveform::papr(pulse));
    j["mainlobe_delay_s"] = waveform::mainlobe_width_3db(dcut, delay_step);
    j["mainlobe_delay_expected_s"] = o.mcpc_chip_duration_s / o.mcpc_carriers;
    j["mainlobe_doppler_hz"] = waveform::mainlobe_width_3db(fcut, dop_step);
    j["mainlobe_doppler_expected_hz"] = 1.0 / t_total;
    write_json(out / "metrics.json", j);
}

void write_manifest(const RunArgs& args, const ScenarioSpec& spec, const fs::path& out)
{
    json m;
    m["experiment"] = args.experiment;
    m["scenario_path"] = args.scenario_path;
    m["seed"] = args.seed;
    m["out_dir"] = args.out_dir;
    m["threads"] = args.threads;
    m["scenario"] = json::parse(spec.json_text);
    m["versions"]["project"] = "1.0.0";
    m["versions"]["fftw3"] = std::string(fftw_version);
    m["versions"]["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." +
                             std::to_string(EIGEN_MAJOR_VERSION) + "." +
                             std::to_string(EIGEN_MINOR_VERSION);
    write_json(out / "manifest.json", m);
}

} // namespace

void run_experiment(const RunArgs& args)
{
    const auto names = experiment_names();
    if (std::find(names.begin(), names.end(), args.experiment) == names.end())
        throw std::invalid_argument("unknown experiment: " + args.experiment);

#ifdef _OPENMP
    if (args.threads > 0)
        omp_set_num_threads(args.threads);
#endif

    ScenarioSpec spec = io::load_scenario(args.scenario_path);
    spec.seed = args.seed;

    const fs::path out(args.out_dir);
    fs::create_directories(out);
    if (fs::exists(out / "manifest.json") && !args.overwrite)
        throw std::runtime_error("output directory already holds a manifest.json; "
                                 "pass --overwrite to replace: " +
                                 args.out_dir);

    if (args.experiment == "range-profile")
        run_range_profile(spec, out);
    else if (args.experiment == "ici-impact")
        run_ici_impact(spec, out);
    else if (args.experiment == "pn-impact")
        run_pn_impact(spec, out);
    else if (args.experiment == "ici-exploit")
        run_ici_exploit(spec, out);
    else if (args.experiment == "pn-exploit")
        run_pn_exploit(spec, out);
    else if (args.experiment == "detection-roc")
        run_detection_roc(spec, out);
    else if (args.experiment == "crb-sweep")
        run_crb_sweep(spec, out);
    else if (args.experiment == "alloc-frontier")
        run_alloc_frontier(spec, out);
    else
        run_mcpc_analysis(spec, out);

    write_manifest(args, spec, out);
}

} // namespace isac::exp
