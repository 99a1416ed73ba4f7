#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "lcid/bench.hpp"
#include "lcid/matrix_io.hpp"
#include "json.hpp"

namespace lcid {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& known,
                         const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!known.count(it.key()))
            throw std::invalid_argument("scenario: unknown key '" + it.key() + "' in " + where);
}

SpectrumCoefficients spectrum_from_json(const json& obj) {
    if (!obj.is_object()) throw std::invalid_argument("scenario: spectrum must be an object");
    const std::string type = obj.value("type", "bandpass");
    if (type == "bandpass") {
        reject_unknown_keys(obj, {"type", "w1", "w2", "power", "order", "floor"}, "spectrum");
        const double power = obj.value("power", 1.0);
        return add_white_floor(
            bandpass_autocorrelation(obj.value("w1", 0.1), obj.value("w2", 0.3), power,
                                     obj.value("order", 50)),
            obj.value("floor", 0.003) * power);
    }
    if (type == "autocorrelation") {
        reject_unknown_keys(obj, {"type", "r"}, "spectrum");
        if (!obj.contains("r") || !obj["r"].is_array())
            throw std::invalid_argument("scenario: autocorrelation spectrum needs an 'r' array");
        Eigen::VectorXd r(obj["r"].size());
        for (size_t i = 0; i < obj["r"].size(); ++i) r[static_cast<Eigen::Index>(i)] = obj["r"][i];
        return SpectrumCoefficients(r);
    }
    throw std::invalid_argument("scenario: unknown spectrum type '" + type + "'");
}

std::string csv_field(double value) {
    return std::isnan(value) ? std::string() : format_double(value);
}

}  // namespace

Scenario scenario_from_json_text(const std::string& text) {
    json obj;
    try {
        obj = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("scenario: invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw std::invalid_argument("scenario: top level must be an object");
    reject_unknown_keys(obj,
                        {"n_theta", "n", "s", "theta0", "eta", "snr_list", "mc_runs", "seed",
                         "spectrum", "grid_size"},
                        "scenario");
    Scenario s;
    try {
        s.n_theta = obj.value("n_theta", s.n_theta);
        s.n = obj.value("n", s.n);
        s.s = obj.value("s", s.s);
        s.eta = obj.value("eta", s.eta);
        s.mc_runs = obj.value("mc_runs", s.mc_runs);
        s.seed = obj.value("seed", s.seed);
        s.grid_size = obj.value("grid_size", s.grid_size);
        if (obj.contains("snr_list")) {
            if (!obj["snr_list"].is_array())
                throw std::invalid_argument("scenario: snr_list must be an array");
            s.snr_list.assign(obj["snr_list"].begin(), obj["snr_list"].end());
        }
        if (obj.contains("theta0") && !obj["theta0"].is_null()) {
            if (!obj["theta0"].is_array())
                throw std::invalid_argument("scenario: theta0 must be an array");
            s.theta0.resize(static_cast<Eigen::Index>(obj["theta0"].size()));
            for (size_t i = 0; i < obj["theta0"].size(); ++i)
                s.theta0[static_cast<Eigen::Index>(i)] = obj["theta0"][i];
        }
        if (obj.contains("spectrum")) s.spectrum = spectrum_from_json(obj["spectrum"]);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("scenario: ") + e.what());
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scenario file " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return scenario_from_json_text(buffer.str());
}

void write_records_csv(const std::string& path, const std::vector<MetricsRecord>& records) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "method,snr,run,nrmse,v_app,mu_phi,mu_h,fim_fit_error,wall_time_s,status\n";
    for (const auto& r : records) {
        out << r.method << "," << format_double(r.snr) << "," << r.run << ","
            << csv_field(r.nrmse) << "," << csv_field(r.v_app) << "," << csv_field(r.mu_phi)
            << "," << csv_field(r.mu_h) << "," << csv_field(r.fim_fit_error) << ","
            << format_double(r.wall_time_s) << "," << r.status << "\n";
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

void write_summary_csv(const std::string& path, const std::vector<SummaryRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "method,snr,mean_nrmse,se_nrmse,mean_vapp,se_vapp,failures\n";
    for (const auto& r : rows) {
        out << r.method << "," << format_double(r.snr) << "," << csv_field(r.mean_nrmse) << ","
            << csv_field(r.se_nrmse) << "," << csv_field(r.mean_vapp) << ","
            << csv_field(r.se_vapp) << "," << r.failures << "\n";
    }
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace lcid
