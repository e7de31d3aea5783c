#include "isac/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "isac/rng.hpp"

namespace isac::io {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg)
{
    throw std::invalid_argument(path + ": " + msg);
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed)
{
    if (!j.is_object())
        fail(path, "expected an object");
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* k : allowed)
            ok = ok || item.key() == k;
        if (!ok)
            fail(path + "." + item.key(), "unknown field");
    }
}

double get_num(const json& j, const std::string& path, const char* key,
               bool required, double fallback)
{
    if (!j.contains(key)) {
        if (required)
            fail(path + "." + key, "missing required field");
        return fallback;
    }
    const auto& v = j.at(key);
    if (!v.is_number())
        fail(path + "." + key, "expected a number");
    return v.get<double>();
}

int get_int(const json& j, const std::string& path, const char* key, bool required,
            int fallback)
{
    if (!j.contains(key)) {
        if (required)
            fail(path + "." + key, "missing required field");
        return fallback;
    }
    const auto& v = j.at(key);
    if (!v.is_number_integer())
        fail(path + "." + key, "expected an integer");
    return v.get<int>();
}

bool get_bool(const json& j, const std::string& path, const char* key, bool fallback)
{
    if (!j.contains(key))
        return fallback;
    const auto& v = j.at(key);
    if (!v.is_boolean())
        fail(path + "." + key, "expected a boolean");
    return v.get<bool>();
}

std::string get_str(const json& j, const std::string& path, const char* key,
                    const std::string& fallback)
{
    if (!j.contains(key))
        return fallback;
    const auto& v = j.at(key);
    if (!v.is_string())
        fail(path + "." + key, "expected a string");
    return v.get<std::string>();
}

std::vector<double> get_num_array(const json& j, const std::string& path,
                                  const char* key, std::vector<double> fallback)
{
    if (!j.contains(key))
        return fallback;
    const auto& v = j.at(key);
    if (!v.is_array())
        fail(path + "." + key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number())
            fail(path + "." + key, "expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

double deg2rad(double d) { return d * kPi / 180.0; }

} // namespace

ScenarioSpec parse_scenario(const std::string& json_text)
{
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("scenario: JSON parse error: ") +
                                    e.what());
    }
    check_keys(j, "scenario",
               {"seed", "frame", "arrays", "mode", "impairment", "phase_noise",
                "targets", "comm_paths", "sync", "noise", "constellation",
                "allow_delay_beyond_cp", "options"});

    ScenarioSpec spec;

    if (!j.contains("seed"))
        fail("seed", "missing required field");
    if (!j.at("seed").is_number_integer() || j.at("seed").get<double>() < 0)
        fail("seed", "expected a nonnegative integer");
    spec.seed = j.at("seed").get<std::uint64_t>();

    if (!j.contains("frame"))
        fail("frame", "missing required field");
    const json& jf = j.at("frame");
    check_keys(jf, "frame",
               {"n_subcarriers", "n_symbols", "subcarrier_spacing_hz", "cp_fraction",
                "carrier_freq_hz", "total_power"});
    spec.frame.n_subcarriers = get_int(jf, "frame", "n_subcarriers", true, 0);
    spec.frame.n_symbols = get_int(jf, "frame", "n_symbols", true, 0);
    spec.frame.subcarrier_spacing = get_num(jf, "frame", "subcarrier_spacing_hz", true, 0);
    spec.frame.carrier_freq = get_num(jf, "frame", "carrier_freq_hz", true, 0);
    // Default budget: one power unit per grid cell, so a target's map SNR is
    // its echo SNR plus the N*M processing gain.
    spec.frame.total_power =
        get_num(jf, "frame", "total_power", false,
                double(spec.frame.n_subcarriers) * double(spec.frame.n_symbols));
    const double cp_fraction = get_num(jf, "frame", "cp_fraction", true, 0);
    if (!(spec.frame.subcarrier_spacing > 0))
        fail("frame.subcarrier_spacing_hz", "must be > 0");
    if (cp_fraction < 0 || cp_fraction >= 1)
        fail("frame.cp_fraction", "must lie in [0, 1)");
    spec.frame.cp_duration = cp_fraction / spec.frame.subcarrier_spacing;
    try {
        spec.frame.validate();
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(e.what()); // already carries the field path
    }

    spec.arrays.carrier_freq = spec.frame.carrier_freq;
    spec.arrays.element_spacing = 0.5 * spec.frame.wavelength();
    if (j.contains("arrays")) {
        const json& ja = j.at("arrays");
        check_keys(ja, "arrays", {"n_tx", "n_rx", "n_comm",
                                  "element_spacing_wavelengths"});
        spec.arrays.n_tx = get_int(ja, "arrays", "n_tx", false, 1);
        spec.arrays.n_rx = get_int(ja, "arrays", "n_rx", false, 1);
        spec.arrays.n_comm = get_int(ja, "arrays", "n_comm", false, 1);
        const double sp = get_num(ja, "arrays", "element_spacing_wavelengths", false, 0.5);
        if (!(sp > 0))
            fail("arrays.element_spacing_wavelengths", "must be > 0");
        spec.arrays.element_spacing = sp * spec.frame.wavelength();
    }
    spec.arrays.validate();

    const std::string mode = get_str(j, "scenario", "mode", "monostatic");
    if (mode == "monostatic")
        spec.mode = channel::SensingMode::monostatic;
    else if (mode == "bistatic")
        spec.mode = channel::SensingMode::bistatic;
    else
        fail("mode", "expected \"monostatic\" or \"bistatic\"");

    const std::string imp = get_str(j, "scenario", "impairment", "none");
    if (imp == "none")
        spec.impairment = channel::ImpairmentMode::none;
    else if (imp == "ici")
        spec.impairment = channel::ImpairmentMode::ici_exact;
    else if (imp == "phase_noise")
        spec.impairment = channel::ImpairmentMode::phase_noise;
    else if (imp == "both")
        spec.impairment = channel::ImpairmentMode::both;
    else
        fail("impairment", "expected \"none\", \"ici\", \"phase_noise\" or \"both\"");

    const bool wants_pn = spec.impairment == channel::ImpairmentMode::phase_noise ||
                          spec.impairment == channel::ImpairmentMode::both;
    if (j.contains("phase_noise")) {
        const json& jp = j.at("phase_noise");
        check_keys(jp, "phase_noise", {"kind", "bw3db_hz", "loop_bw_hz"});
        const std::string kind = get_str(jp, "phase_noise", "kind", "free_running");
        if (kind == "free_running")
            spec.pn_model.kind = pn::PnModel::Kind::free_running;
        else if (kind == "pll")
            spec.pn_model.kind = pn::PnModel::Kind::pll;
        else
            fail("phase_noise.kind", "expected \"free_running\" or \"pll\"");
        spec.pn_model.bw3db = get_num(jp, "phase_noise", "bw3db_hz", true, 0);
        spec.pn_model.loop_bw = get_num(jp, "phase_noise", "loop_bw_hz",
                                        spec.pn_model.kind == pn::PnModel::Kind::pll, 0);
        spec.pn_model.validate();
    } else if (wants_pn) {
        fail("phase_noise", "missing required field (impairment uses phase noise)");
    }

    if (j.contains("targets")) {
        const json& jt = j.at("targets");
        if (!jt.is_array())
            fail("targets", "expected an array");
        for (std::size_t k = 0; k < jt.size(); ++k) {
            const std::string path = "targets[" + std::to_string(k) + "]";
            const json& e = jt.at(k);
            check_keys(e, path, {"range_m", "velocity_mps", "angle_deg", "snr_db"});
            TargetSpec t;
            t.range_m = get_num(e, path, "range_m", true, 0);
            t.velocity_mps = get_num(e, path, "velocity_mps", false, 0);
            t.angle_deg = get_num(e, path, "angle_deg", false, 0);
            t.snr_db = get_num(e, path, "snr_db", true, 0);
            if (t.range_m < 0)
                fail(path + ".range_m", "must be >= 0");
            spec.targets.push_back(t);
        }
    }

    if (j.contains("comm_paths")) {
        const json& jc = j.at("comm_paths");
        if (!jc.is_array())
            fail("comm_paths", "expected an array");
        for (std::size_t k = 0; k < jc.size(); ++k) {
            const std::string path = "comm_paths[" + std::to_string(k) + "]";
            const json& e = jc.at(k);
            check_keys(e, path, {"delay_s", "doppler_hz", "aod_deg", "aoa_deg",
                                 "gain_db"});
            CommPathSpec p;
            p.delay_s = get_num(e, path, "delay_s", true, 0);
            p.doppler_hz = get_num(e, path, "doppler_hz", false, 0);
            p.aod_deg = get_num(e, path, "aod_deg", false, 0);
            p.aoa_deg = get_num(e, path, "aoa_deg", false, 0);
            p.gain_db = get_num(e, path, "gain_db", false, 0);
            if (p.delay_s < 0)
                fail(path + ".delay_s", "must be >= 0");
            spec.comm_paths.push_back(p);
        }
    }

    if (j.contains("sync")) {
        const json& js = j.at("sync");
        check_keys(js, "sync", {"cfo_hz", "delay_offset_s", "comm_cfo_hz"});
        spec.sync.cfo = get_num(js, "sync", "cfo_hz", false, 0);
        spec.sync.delay_offset = get_num(js, "sync", "delay_offset_s", false, 0);
        spec.sync.comm_cfo = get_num(js, "sync", "comm_cfo_hz", false, 0);
    }

    if (j.contains("noise")) {
        const json& jn = j.at("noise");
        check_keys(jn, "noise", {"radar_var", "comm_var"});
        spec.noise_radar = get_num(jn, "noise", "radar_var", false, 1.0);
        spec.noise_comm = get_num(jn, "noise", "comm_var", false, 1.0);
        if (!(spec.noise_radar >= 0))
            fail("noise.radar_var", "must be >= 0");
        if (!(spec.noise_comm >= 0))
            fail("noise.comm_var", "must be >= 0");
    }

    const std::string cons = get_str(j, "scenario", "constellation", "qpsk");
    if (cons == "qpsk")
        spec.constellation = waveform::Constellation::qpsk;
    else if (cons == "qam16")
        spec.constellation = waveform::Constellation::qam16;
    else if (cons == "unit_random")
        spec.constellation = waveform::Constellation::unit_random;
    else
        fail("constellation", "expected \"qpsk\", \"qam16\" or \"unit_random\"");

    spec.allow_delay_beyond_cp = get_bool(j, "scenario", "allow_delay_beyond_cp", false);

    if (j.contains("options")) {
        const json& jo = j.at("options");
        check_keys(jo, "options",
                   {"velocities_mps", "trials", "pfa", "span", "pad_n", "pad_m",
                    "mcpc_carriers", "mcpc_chips", "mcpc_chip_duration_s",
                    "snr_sweep_db"});
        auto& o = spec.options;
        o.velocities_mps = get_num_array(jo, "options", "velocities_mps",
                                         o.velocities_mps);
        o.trials = get_int(jo, "options", "trials", false, o.trials);
        o.pfa = get_num(jo, "options", "pfa", false, o.pfa);
        o.span = get_int(jo, "options", "span", false, o.span);
        o.pad_n = get_int(jo, "options", "pad_n", false, o.pad_n);
        o.pad_m = get_int(jo, "options", "pad_m", false, o.pad_m);
        o.mcpc_carriers = get_int(jo, "options", "mcpc_carriers", false, o.mcpc_carriers);
        o.mcpc_chips = get_int(jo, "options", "mcpc_chips", false, o.mcpc_chips);
        o.mcpc_chip_duration_s = get_num(jo, "options", "mcpc_chip_duration_s", false,
                                         o.mcpc_chip_duration_s);
        o.snr_sweep_db = get_num_array(jo, "options", "snr_sweep_db", o.snr_sweep_db);
        if (o.trials < 1)
            fail("options.trials", "must be >= 1");
        if (!(o.pfa > 0 && o.pfa < 1))
            fail("options.pfa", "must lie in (0, 1)");
        if (o.span < 1)
            fail("options.span", "must be >= 1");
        if (o.pad_n < 1 || o.pad_m < 1)
            fail("options.pad_n", "padding factors must be >= 1");
    }

    spec.json_text = j.dump(2);
    spec.build().validate();
    return spec;
}

ScenarioSpec load_scenario(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open scenario file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

channel::Scenario ScenarioSpec::build() const
{
    channel::Scenario sc;
    sc.frame = frame;
    sc.arrays = arrays;
    sc.mode = mode;
    sc.sync = sync;
    sc.noise_radar = noise_radar;
    sc.noise_comm = noise_comm;
    sc.seed = seed;
    sc.impairment = impairment;
    sc.pn_model = pn_model;
    sc.allow_delay_beyond_cp = allow_delay_beyond_cp;

    const bool mono = mode == channel::SensingMode::monostatic;
    const double lambda = frame.wavelength();
    for (std::size_t k = 0; k < targets.size(); ++k) {
        const auto& t = targets[k];
        Target tgt;
        tgt.delay = (mono ? 2.0 : 1.0) * t.range_m / kSpeedOfLight;
        tgt.doppler = (mono ? 2.0 : 1.0) * t.velocity_mps / lambda;
        tgt.aod = deg2rad(t.angle_deg);
        tgt.aoa = tgt.aod;
        // snr_db is the echo SNR |gain|^2 / noise_radar, before processing gain.
        const double mag = std::sqrt(db_to_pow(t.snr_db) * noise_radar);
        auto rng = make_rng(substream(seed, 0x7a67e70 + k));
        std::uniform_real_distribution<double> uni(0.0, 2.0 * kPi);
        tgt.gain = std::polar(mag, uni(rng));
        sc.targets.push_back(tgt);
    }
    for (std::size_t k = 0; k < comm_paths.size(); ++k) {
        const auto& p = comm_paths[k];
        channel::CommPath cp;
        cp.delay = p.delay_s;
        cp.doppler = p.doppler_hz;
        cp.aod = deg2rad(p.aod_deg);
        cp.aoa = deg2rad(p.aoa_deg);
        auto rng = make_rng(substream(seed, 0xc0770 + k));
        std::uniform_real_distribution<double> uni(0.0, 2.0 * kPi);
        cp.gain = std::polar(std::pow(10.0, p.gain_db / 20.0), uni(rng));
        sc.comm_paths.push_back(cp);
    }
    return sc;
}

} // namespace isac::io
