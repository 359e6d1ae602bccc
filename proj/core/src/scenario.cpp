#include "spdelab/scenario.hpp"

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <utility>

#include <Eigen/Dense>

#include "json.hpp"

#include "spdelab/cylinder.hpp"
#include "spdelab/diagnostics.hpp"
#include "spdelab/errors.hpp"
#include "spdelab/operator_norm.hpp"
#include "spdelab/version.hpp"

namespace spdelab {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// --- strict config access -----------------------------------------------
//
// Every getter records its key; finish() turns the leftovers into errors
// naming the offending dotted path, so typos cannot silently fall back to
// defaults.

class ConfigReader {
public:
    ConfigReader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
        if (!node_.is_object()) throw ValidationError(path_ + ": expected an object");
    }

    bool has(const char* key) const { return node_.contains(key); }

    bool boolean(const char* key, bool fallback) {
        if (!take(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_boolean()) throw ValidationError(field(key) + ": expected true or false");
        return v.get<bool>();
    }

    double number(const char* key, double fallback) {
        if (!take(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_number()) throw ValidationError(field(key) + ": expected a number");
        return v.get<double>();
    }

    long long integer(const char* key, long long fallback) {
        if (!take(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_number_integer())
            throw ValidationError(field(key) + ": expected an integer");
        return v.get<long long>();
    }

    std::string text(const char* key, const std::string& fallback) {
        if (!take(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_string()) throw ValidationError(field(key) + ": expected a string");
        return v.get<std::string>();
    }

    std::string require_text(const char* key) {
        if (!has(key)) throw ValidationError(field(key) + ": missing");
        return text(key, "");
    }

    std::vector<double> number_list(const char* key, std::vector<double> fallback) {
        if (!take(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_array()) throw ValidationError(field(key) + ": expected an array of numbers");
        std::vector<double> out;
        for (const json& item : v) {
            if (!item.is_number())
                throw ValidationError(field(key) + ": expected an array of numbers");
            out.push_back(item.get<double>());
        }
        return out;
    }

    std::vector<int> integer_list(const char* key, std::vector<int> fallback) {
        if (!take(key)) return fallback;
        const json& v = node_.at(key);
        if (!v.is_array()) throw ValidationError(field(key) + ": expected an array of integers");
        std::vector<int> out;
        for (const json& item : v) {
            if (!item.is_number_integer())
                throw ValidationError(field(key) + ": expected an array of integers");
            out.push_back(item.get<int>());
        }
        return out;
    }

    // Hands the raw subtree over and counts the key as consumed.
    const json* child(const char* key) {
        if (!take(key)) return nullptr;
        return &node_.at(key);
    }

    std::string field(const char* key) const {
        return path_.empty() ? std::string(key) : path_ + "." + key;
    }

    void finish() const {
        for (auto it = node_.begin(); it != node_.end(); ++it) {
            if (consumed_.count(it.key())) continue;
            const std::string full = path_.empty() ? it.key() : path_ + "." + it.key();
            throw ValidationError("unknown config key \"" + full + "\"");
        }
    }

private:
    bool take(const char* key) {
        if (!node_.contains(key)) return false;
        consumed_.insert(key);
        return true;
    }

    const json& node_;
    std::string path_;
    std::set<std::string> consumed_;
};

// --- enum spellings -------------------------------------------------------

Integrator integrator_from_name(const std::string& name, const std::string& where) {
    if (name == "strang_ou_rk4") return Integrator::strang_ou_rk4;
    if (name == "euler_maruyama") return Integrator::euler_maruyama;
    throw ValidationError(where + ": unknown integrator \"" + name + "\"");
}

const char* integrator_name(Integrator kind) {
    return kind == Integrator::strang_ou_rk4 ? "strang_ou_rk4" : "euler_maruyama";
}

RhoKind rho_kind_from_name(const std::string& name, const std::string& where) {
    if (name == "moving_average") return RhoKind::moving_average;
    if (name == "spectral_projection") return RhoKind::spectral_projection;
    throw ValidationError(where + ": unknown smoothing kind \"" + name + "\"");
}

const char* rho_kind_name(RhoKind kind) {
    return kind == RhoKind::moving_average ? "moving_average" : "spectral_projection";
}

AssemblyMethod method_from_name(const std::string& name, const std::string& where) {
    if (name == "closed_form") return AssemblyMethod::closed_form;
    if (name == "quadrature") return AssemblyMethod::quadrature;
    throw ValidationError(where + ": unknown assembly method \"" + name + "\"");
}

const char* method_name(AssemblyMethod method) {
    return method == AssemblyMethod::closed_form ? "closed_form" : "quadrature";
}

SuiteArithmetic arithmetic_from_name(const std::string& name, const std::string& where) {
    if (name == "exact") return SuiteArithmetic::exact;
    if (name == "float") return SuiteArithmetic::floating;
    throw ValidationError(where + ": expected \"exact\" or \"float\"");
}

EllipticCoefficient elliptic_from_name(const std::string& name, const std::string& where) {
    if (name == "constant_one") return EllipticCoefficient::constant_one;
    if (name == "sine_bump") return EllipticCoefficient::sine_bump;
    if (name == "two_phase") return EllipticCoefficient::two_phase;
    if (name == "tabulated") return EllipticCoefficient::tabulated;
    throw ValidationError(where + ": unknown coefficient \"" + name + "\"");
}

const char* elliptic_name(EllipticCoefficient c) {
    switch (c) {
        case EllipticCoefficient::constant_one: return "constant_one";
        case EllipticCoefficient::sine_bump: return "sine_bump";
        case EllipticCoefficient::two_phase: return "two_phase";
        case EllipticCoefficient::tabulated: return "tabulated";
    }
    throw ValidationError("unknown elliptic coefficient");
}

// --- block parsers ----------------------------------------------------------

void parse_model_block(const json& block, Scenario& s) {
    ConfigReader model(block, "model");
    const std::string kind = model.require_text("kind");
    try {
        s.kind = model_kind_from_name(kind);
    } catch (const ValidationError&) {
        throw ValidationError("model.kind: unknown model kind \"" + kind + "\"");
    }
    s.mode_count = static_cast<int>(model.integer("mode_count", s.mode_count));
    s.params.theta = model.number("theta", s.params.theta);
    s.params.gamma = model.number("gamma", s.params.gamma);
    s.params.fractional_c = model.number("fractional_c", s.params.fractional_c);
    if (model.has("coefficient"))
        s.params.coefficient =
            elliptic_from_name(model.text("coefficient", ""), "model.coefficient");
    s.params.coefficient_samples =
        model.number_list("coefficient_samples", s.params.coefficient_samples);
    s.params.components = static_cast<int>(model.integer("components", s.params.components));
    s.params.domain = model.text("domain", s.params.domain);
    model.finish();
}

void parse_verify_block(const json& block, Scenario& s) {
    s.run_verify = true;
    if (block.is_string()) {
        const std::string mode = block.get<std::string>();
        if (mode == "operators") return;
        if (mode == "all") {
            s.verify.include_invariance = true;
            return;
        }
        throw ValidationError("verify: expected \"operators\", \"all\", or an object");
    }
    ConfigReader verify(block, "verify");
    const std::string suites = verify.text("suites", "operators");
    if (suites == "all")
        s.verify.include_invariance = true;
    else if (suites != "operators")
        throw ValidationError("verify.suites: expected \"operators\" or \"all\"");
    s.verify.instances = static_cast<int>(verify.integer("instances", s.verify.instances));
    if (s.verify.instances < 1)
        throw ValidationError("verify.instances: must be at least 1");
    if (verify.has("arithmetic"))
        s.verify.arithmetic =
            arithmetic_from_name(verify.text("arithmetic", ""), "verify.arithmetic");
    s.verify.quadrature_mode_limit = static_cast<int>(
        verify.integer("quadrature_modes", s.verify.quadrature_mode_limit));
    s.verify.invariance.ensemble =
        static_cast<int>(verify.integer("ensemble", s.verify.invariance.ensemble));
    s.verify.invariance.dt = verify.number("dt_model_time", s.verify.invariance.dt);
    s.verify.invariance.horizon = verify.number("horizon", s.verify.invariance.horizon);
    s.verify.invariance.checkpoints =
        static_cast<int>(verify.integer("checkpoints", s.verify.invariance.checkpoints));
    verify.finish();
}

void parse_sim_block(const json& block, Scenario& s) {
    s.run_sim = true;
    ConfigReader sim(block, "sim");
    s.sim.dt_model_time = sim.number("dt_model_time", s.sim.dt_model_time);
    s.sim.horizon = sim.number("horizon", s.sim.horizon);
    s.sim.ensemble = static_cast<int>(sim.integer("ensemble", s.sim.ensemble));
    if (sim.has("integrator"))
        s.sim.integrator = integrator_from_name(sim.text("integrator", ""), "sim.integrator");
    s.sim.taming = sim.boolean("taming", s.sim.taming);
    s.sim.checkpoints = static_cast<int>(sim.integer("checkpoints", s.sim.checkpoints));
    s.sim.active_modes = static_cast<int>(sim.integer("active_modes", s.sim.active_modes));
    sim.finish();
}

void parse_rates_block(const json& block, Scenario& s) {
    s.run_rates = true;
    ConfigReader rates(block, "rates");
    s.rates.alpha = rates.number("alpha", s.rates.alpha);
    s.rates.beta = rates.number("beta", s.rates.beta);
    if (rates.has("kind"))
        s.rates.kind = rho_kind_from_name(rates.text("kind", ""), "rates.kind");
    s.rates.levels = rates.integer_list("levels", s.rates.levels);
    s.rates.profile = rates.text("profile", s.rates.profile);
    if (s.rates.profile != "unit_mode" && s.rates.profile != "rough")
        throw ValidationError("rates.profile: expected \"unit_mode\" or \"rough\"");
    s.rates.profile_exponent = rates.number("profile_exponent", s.rates.profile_exponent);
    rates.finish();
}

void parse_diagnostics_block(const json& block, Scenario& s) {
    s.run_diagnostics = true;
    ConfigReader diag(block, "diagnostics");
    s.diagnostics.horizons = diag.number_list("horizons", s.diagnostics.horizons);
    if (s.diagnostics.horizons.empty())
        throw ValidationError("diagnostics.horizons: must not be empty");
    s.diagnostics.ito_trick = diag.boolean("ito_trick", s.diagnostics.ito_trick);
    s.diagnostics.energy_estimate =
        diag.boolean("energy_estimate", s.diagnostics.energy_estimate);
    s.diagnostics.basis_degree =
        static_cast<int>(diag.integer("basis_degree", s.diagnostics.basis_degree));
    diag.finish();
}

void parse_resolvent_block(const json& block, Scenario& s) {
    s.run_resolvent = true;
    ConfigReader res(block, "resolvent");
    s.resolvent.basis_degree =
        static_cast<int>(res.integer("basis_degree", s.resolvent.basis_degree));
    s.resolvent.cutoffs = res.integer_list("cutoffs", s.resolvent.cutoffs);
    if (s.resolvent.cutoffs.empty())
        throw ValidationError("resolvent.cutoffs: must not be empty");
    res.finish();
}

void validate_scenario_name(const std::string& name) {
    const bool bad = name.empty() || name == "." || name == ".." ||
                     name.find('/') != std::string::npos ||
                     name.find('\\') != std::string::npos;
    if (bad)
        throw ValidationError("name: must be a plain directory name, got \"" + name + "\"");
}

// --- persistence ------------------------------------------------------------

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (const unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(h));
    return buf;
}

using OutputList = std::vector<std::pair<std::string, std::string>>;

// Two-phase commit: stage every file as <name>.tmp, then rename them all.
// Any failure removes whatever this call created, so a crashed run leaves
// no partial results behind.
std::string commit_outputs(const fs::path& dir, const OutputList& outputs) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec)
        throw NumericalError("cannot create result directory " + dir.string() + ": " +
                             ec.message());
    std::vector<fs::path> temps;
    std::vector<fs::path> placed;
    try {
        for (const auto& [name, content] : outputs) {
            const fs::path tmp = dir / (name + ".tmp");
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw NumericalError("cannot write " + tmp.string());
            out << content;
            out.flush();
            if (!out) throw NumericalError("short write to " + tmp.string());
            temps.push_back(tmp);
        }
        for (std::size_t i = 0; i < outputs.size(); ++i) {
            const fs::path target = dir / outputs[i].first;
            fs::rename(temps[i], target);
            placed.push_back(target);
        }
    } catch (...) {
        for (const auto& p : temps) fs::remove(p, ec);
        for (const auto& p : placed) fs::remove(p, ec);
        throw;
    }
    return dir.string();
}

SimConfig make_sim_config(const Scenario& s, const SpectralModel& model,
                          const CouplingTensor& tensor) {
    SimConfig config;
    config.model = &model;
    config.tensor = &tensor;
    config.active_modes =
        s.sim.active_modes > 0 ? s.sim.active_modes : tensor.folded_count();
    config.dt_model_time = s.sim.dt_model_time;
    config.horizon = s.sim.horizon;
    config.ensemble = s.sim.ensemble;
    config.seed = s.seed;
    config.integrator = s.sim.integrator;
    config.taming = s.sim.taming;
    config.checkpoint_count = s.sim.checkpoints;
    config.threads = s.threads;
    return config;
}

Eigen::VectorXd rates_profile(const Scenario& s, const SpectralModel& model) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(model.mode_count);
    if (s.rates.profile == "unit_mode") {
        v(0) = 1.0;
        return v;
    }
    // rough: coefficients just outside H^beta-plus-a-bit, so the beta norm is
    // finite but higher regularity fails and the fitted decay stays visible
    const double q =
        s.rates.profile_exponent > 0.0 ? s.rates.profile_exponent : s.rates.beta + 0.55;
    for (int j = 0; j < model.mode_count; ++j) v(j) = std::pow(j + 1.0, -q);
    return v;
}

// --- report helpers ---------------------------------------------------------

void append_number(std::string& out, double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    out += buf;
}

struct ReportAccumulator {
    std::string summary;
    OutputList figures;
    std::vector<std::string> problems;
    int sections = 0;

    void section(const std::string& title, const std::string& body) {
        summary += "## " + title + "\n" + body + "\n";
        ++sections;
    }
    void problem(const std::string& what) { problems.push_back(what); }
};

json parse_json_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return json::parse(buffer.str());
}

void report_verify(const fs::path& file, const std::string& scenario, ReportAccumulator& acc) {
    const json doc = parse_json_file(file);
    std::string body;
    int total = 0, failed = 0;
    for (const json& suite : doc.at("suites")) {
        ++total;
        if (!suite.at("passed").get<bool>() && !suite.at("advisory").get<bool>()) {
            ++failed;
            body += "  FAIL " + suite.at("key").get<std::string>() + "\n";
        }
    }
    std::ostringstream head;
    head << total << " suites, " << failed << " failed";
    acc.section(scenario + ": operator verification", head.str() + "\n" + body);
}

void report_invariance(const fs::path& file, const std::string& scenario,
                       ReportAccumulator& acc) {
    const json doc = parse_json_file(file);
    const json& checkpoints = doc.at("checkpoints");
    if (checkpoints.empty()) throw std::runtime_error("no checkpoints in " + file.string());
    const json& last = checkpoints.back();
    const json& cov = last.at("covariance");
    const json& se = last.at("covariance_se");

    std::string csv = "mode_i,mode_j,covariance,target,deviation,band_3sigma\n";
    double worst_dev = 0.0, worst_band = 0.0;
    for (std::size_t i = 0; i < cov.size(); ++i) {
        for (std::size_t j = 0; j < cov[i].size(); ++j) {
            const double value = cov[i][j].get<double>();
            const double target = i == j ? 1.0 : 0.0;
            const double dev = value - target;
            const double band = 3.0 * se[i][j].get<double>();
            csv += std::to_string(i) + "," + std::to_string(j) + ",";
            append_number(csv, value);
            csv += ",";
            append_number(csv, target);
            csv += ",";
            append_number(csv, dev);
            csv += ",";
            append_number(csv, band);
            csv += "\n";
            if (std::abs(dev) > worst_dev) {
                worst_dev = std::abs(dev);
                worst_band = band;
            }
        }
    }
    acc.figures.emplace_back("fig_invariance_" + scenario + ".csv", csv);
    std::ostringstream body;
    body << "ensemble " << doc.at("ensemble_used").get<int>() << ", blow-ups "
         << doc.at("blow_up_count").get<int>() << ", worst covariance deviation " << worst_dev
         << " (3-sigma band " << worst_band << ")";
    acc.section(scenario + ": invariance ensemble", body.str());
}

void report_rates(const fs::path& dir, const std::string& scenario, ReportAccumulator& acc) {
    const json meta = parse_json_file(dir / "rates.json");
    std::ifstream in(dir / "rates.csv", std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + (dir / "rates.csv").string());
    const double slope = meta.at("error_slope").get<double>();

    std::string csv = "N,error,slope\n";
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line[0] == 'N') continue;
        const auto first = line.find(',');
        const auto second = line.find(',', first + 1);
        if (first == std::string::npos || second == std::string::npos)
            throw std::runtime_error("malformed row in " + (dir / "rates.csv").string());
        csv += line.substr(0, second) + ",";
        append_number(csv, slope);
        csv += "\n";
    }
    acc.figures.emplace_back("fig_rates_" + scenario + ".csv", csv);
    std::ostringstream body;
    body << "error slope " << slope << ", norm slope " << meta.at("norm_slope").get<double>();
    acc.section(scenario + ": smoothing rates", body.str());
}

void report_integral(const fs::path& file, const std::string& scenario, const char* label,
                     ReportAccumulator& acc) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::string csv, line;
    double worst_ratio = 0.0;
    bool header = true;
    while (std::getline(in, line)) {
        csv += line + "\n";
        if (header) {
            header = false;
            continue;
        }
        const auto last = line.rfind(',');
        if (last == std::string::npos)
            throw std::runtime_error("malformed row in " + file.string());
        worst_ratio = std::max(worst_ratio, std::stod(line.substr(last + 1)));
    }
    acc.figures.emplace_back("fig_" + std::string(label) + "_" + scenario + ".csv", csv);
    std::ostringstream body;
    body << "largest left/right ratio " << worst_ratio;
    acc.section(scenario + ": " + label + " integral bound", body.str());
}

void report_resolvent(const fs::path& file, const std::string& scenario,
                      ReportAccumulator& acc) {
    const json doc = parse_json_file(file);
    int total = 0, failed = 0;
    for (const json& row : doc) {
        ++total;
        if (!row.at("passed").get<bool>()) ++failed;
    }
    std::ostringstream body;
    body << total << " solves, " << failed << " failed";
    acc.section(scenario + ": resolvent probes", body.str());
}

void report_scenario_dir(const fs::path& dir, ReportAccumulator& acc) {
    const std::string scenario = dir.filename().string();
    const auto guard = [&](const char* file, const std::function<void()>& run) {
        if (!fs::exists(dir / file)) return;
        try {
            run();
        } catch (const std::exception& e) {
            acc.problem((dir / file).string() + ": " + e.what());
        }
    };
    guard("verify.json", [&] { report_verify(dir / "verify.json", scenario, acc); });
    guard("invariance.json", [&] { report_invariance(dir / "invariance.json", scenario, acc); });
    guard("rates.csv", [&] { report_rates(dir, scenario, acc); });
    guard("ito_trick.csv", [&] { report_integral(dir / "ito_trick.csv", scenario, "itotrick", acc); });
    guard("energy_estimate.csv",
          [&] { report_integral(dir / "energy_estimate.csv", scenario, "energy", acc); });
    guard("resolvent.json", [&] { report_resolvent(dir / "resolvent.json", scenario, acc); });
}

} // namespace

// --- parsing ----------------------------------------------------------------

Scenario scenario_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ValidationError("config: expected a JSON object");

    Scenario s;
    ConfigReader top(doc, "");
    s.name = top.text("name", s.name);
    validate_scenario_name(s.name);
    s.output_dir = top.text("output_dir", s.output_dir);
    const long long seed = top.integer("seed", static_cast<long long>(s.seed));
    s.seed = static_cast<std::uint64_t>(seed);
    s.threads = static_cast<int>(top.integer("threads", s.threads));
    if (s.threads < 1) throw ValidationError("threads: must be at least 1");

    if (const json* block = top.child("model")) parse_model_block(*block, s);
    if (const json* block = top.child("tensor")) {
        ConfigReader tensor(*block, "tensor");
        if (tensor.has("method"))
            s.tensor_method = method_from_name(tensor.text("method", ""), "tensor.method");
        tensor.finish();
    }
    if (const json* block = top.child("rho")) {
        ConfigReader rho(*block, "rho");
        if (rho.has("kind")) s.rho_kind = rho_kind_from_name(rho.text("kind", ""), "rho.kind");
        s.rho_level = static_cast<int>(rho.integer("level", s.rho_level));
        if (s.rho_level < 1) throw ValidationError("rho.level: must be at least 1");
        rho.finish();
    }
    if (const json* block = top.child("verify")) parse_verify_block(*block, s);
    if (const json* block = top.child("sim")) parse_sim_block(*block, s);
    if (const json* block = top.child("rates")) parse_rates_block(*block, s);
    if (const json* block = top.child("diagnostics")) parse_diagnostics_block(*block, s);
    if (const json* block = top.child("resolvent")) parse_resolvent_block(*block, s);
    top.finish();

    // surface model preconditions at parse time, with the block as context
    try {
        build_model(s.kind, s.mode_count, s.params);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("model: ") + e.what());
    }
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    try {
        return scenario_from_json(buffer.str());
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

std::string scenario_to_json(const Scenario& s) {
    json doc;
    doc["name"] = s.name;
    doc["output_dir"] = s.output_dir;
    doc["seed"] = s.seed;
    doc["threads"] = s.threads;

    json model;
    model["kind"] = model_kind_name(s.kind);
    model["mode_count"] = s.mode_count;
    switch (s.kind) {
        case ModelKind::dirichlet_laplacian:
            break;
        case ModelKind::neumann_hyperviscous:
            model["theta"] = s.params.theta;
            break;
        case ModelKind::regional_fractional:
            model["gamma"] = s.params.gamma;
            model["fractional_c"] = s.params.fractional_c;
            break;
        case ModelKind::elliptic_divform:
            model["coefficient"] = elliptic_name(s.params.coefficient);
            if (!s.params.coefficient_samples.empty())
                model["coefficient_samples"] = s.params.coefficient_samples;
            break;
    }
    model["components"] = s.params.components;
    model["domain"] = s.params.domain;
    doc["model"] = model;
    doc["tensor"] = {{"method", method_name(s.tensor_method)}};
    if (s.rho_level > 0)
        doc["rho"] = {{"kind", rho_kind_name(s.rho_kind)}, {"level", s.rho_level}};
    if (s.run_verify) {
        json verify;
        verify["suites"] = s.verify.include_invariance ? "all" : "operators";
        verify["instances"] = s.verify.instances;
        verify["arithmetic"] =
            s.verify.arithmetic == SuiteArithmetic::exact ? "exact" : "float";
        verify["quadrature_modes"] = s.verify.quadrature_mode_limit;
        if (s.verify.include_invariance) {
            verify["ensemble"] = s.verify.invariance.ensemble;
            verify["dt_model_time"] = s.verify.invariance.dt;
            verify["horizon"] = s.verify.invariance.horizon;
            verify["checkpoints"] = s.verify.invariance.checkpoints;
        }
        doc["verify"] = verify;
    }
    if (s.run_sim) {
        json sim;
        sim["dt_model_time"] = s.sim.dt_model_time;
        sim["horizon"] = s.sim.horizon;
        sim["ensemble"] = s.sim.ensemble;
        sim["integrator"] = integrator_name(s.sim.integrator);
        sim["taming"] = s.sim.taming;
        sim["checkpoints"] = s.sim.checkpoints;
        sim["active_modes"] = s.sim.active_modes;
        doc["sim"] = sim;
    }
    if (s.run_rates) {
        json rates;
        rates["alpha"] = s.rates.alpha;
        rates["beta"] = s.rates.beta;
        rates["kind"] = rho_kind_name(s.rates.kind);
        rates["levels"] = s.rates.levels;
        rates["profile"] = s.rates.profile;
        rates["profile_exponent"] = s.rates.profile_exponent;
        doc["rates"] = rates;
    }
    if (s.run_diagnostics) {
        json diag;
        diag["horizons"] = s.diagnostics.horizons;
        diag["ito_trick"] = s.diagnostics.ito_trick;
        diag["energy_estimate"] = s.diagnostics.energy_estimate;
        diag["basis_degree"] = s.diagnostics.basis_degree;
        doc["diagnostics"] = diag;
    }
    if (s.run_resolvent) {
        json res;
        res["basis_degree"] = s.resolvent.basis_degree;
        res["cutoffs"] = s.resolvent.cutoffs;
        doc["resolvent"] = res;
    }
    return doc.dump(2);
}

// --- execution ----------------------------------------------------------

ScenarioOutcome run_scenario(const Scenario& s) {
    validate_scenario_name(s.name);
    if (s.threads < 1) throw ValidationError("threads: must be at least 1");

    SpectralModel model;
    try {
        model = build_model(s.kind, s.mode_count, s.params);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("model: ") + e.what());
    }
    const CouplingTensor tensor = assemble_coupling(model, s.tensor_method);

    OutputList outputs;
    bool suites_passed = true;
    const std::string echo = scenario_to_json(s);
    outputs.emplace_back("scenario.json", echo + "\n");

    if (s.rho_level > 0) {
        const RhoOperator rho = build_rho(model, s.rho_kind, s.rho_level);
        const Eigen::MatrixXd identity =
            Eigen::MatrixXd::Identity(model.mode_count, model.mode_count);
        json row;
        row["kind"] = rho_kind_name(rho.kind);
        row["level"] = rho.level;
        row["l2_operator_norm"] = operator_norm_estimate(rho.matrix, identity, identity).value;
        row["warning"] = rho.warning;
        outputs.emplace_back("rho.json", row.dump(2) + "\n");
    }

    if (s.run_verify) {
        VerifyOptions options = s.verify;
        options.seed = s.seed;
        options.threads = s.threads;
        const VerifyReport report = verify_all(model, options);
        outputs.emplace_back("verify.json", report.to_json() + "\n");
        outputs.emplace_back("verify.txt", report.to_text());
        suites_passed = suites_passed && report.all_passed();
    }

    if (s.run_sim) {
        const SimConfig config = make_sim_config(s, model, tensor);
        const SimStats stats = ensemble_stats(config);
        outputs.emplace_back("invariance.json", stats_to_json(stats) + "\n");
    }

    if (s.run_rates) {
        std::vector<int> levels = s.rates.levels;
        if (levels.empty()) levels = {8, 16, 32, 64, 128};
        const RateFit fit =
            rate_fit(model, s.rates.kind, rates_profile(s, model), s.rates.alpha,
                     s.rates.beta, levels);
        outputs.emplace_back("rates.csv", rate_fit_to_csv(fit));
        json meta;
        meta["alpha"] = s.rates.alpha;
        meta["beta"] = s.rates.beta;
        meta["kind"] = rho_kind_name(s.rates.kind);
        meta["profile"] = s.rates.profile;
        meta["error_slope"] = fit.error_slope;
        meta["norm_slope"] = fit.norm_slope;
        meta["reference_norm"] = fit.reference_norm;
        outputs.emplace_back("rates.json", meta.dump(2) + "\n");
    }

    if (s.run_diagnostics) {
        SimConfig config = make_sim_config(s, model, tensor);
        std::vector<double> horizons = s.diagnostics.horizons;
        std::sort(horizons.begin(), horizons.end());
        config.horizon = horizons.back();
        if (s.diagnostics.ito_trick) {
            const Eigen::VectorXd f = Eigen::VectorXd::Unit(tensor.folded_count(), 0);
            outputs.emplace_back("ito_trick.csv",
                                 integral_diag_to_csv(ito_trick_diag(config, f, horizons)));
        }
        if (s.diagnostics.energy_estimate) {
            const CylinderBasis basis =
                build_cylinder_basis(model, s.diagnostics.basis_degree);
            const auto f = GaussianPolynomial<double>::coordinate(tensor.folded_count(), 0)
                               .scaled(model.eigenvalues[0]);
            outputs.emplace_back(
                "energy_estimate.csv",
                integral_diag_to_csv(energy_estimate_diag(config, f, basis, horizons)));
        }
    }

    if (s.run_resolvent) {
        const CylinderBasis basis = build_cylinder_basis(model, s.resolvent.basis_degree);
        json rows = json::array();
        // probe the first-degree elements plus one quadratic, enough to see
        // the coercivity and residual identities without rerunning the full
        // basis sweep of the verification suite
        std::vector<int> elements;
        for (int i = 0; i < basis.size() && static_cast<int>(elements.size()) < 6; ++i)
            if (basis.degree(i) >= 1) elements.push_back(i);
        for (const int index : elements) {
            const auto rhs = basis.element(index);
            for (const int cutoff : s.resolvent.cutoffs) {
                const ResolventSolution sol = resolvent_solve(rhs, basis, tensor, cutoff);
                const bool ok = std::abs(sol.coercivity_min - 1.0) <= 1e-8 &&
                                std::abs(sol.coercivity_max - 1.0) <= 1e-8 &&
                                sol.residual <= 1e-8 &&
                                sol.solution_h1_norm <= (1.0 + 1e-6) * sol.rhs_dual_norm;
                json row;
                row["element"] = index;
                row["chaos_cutoff"] = cutoff;
                row["coercivity_min"] = sol.coercivity_min;
                row["coercivity_max"] = sol.coercivity_max;
                row["residual"] = sol.residual;
                row["rhs_dual_norm"] = sol.rhs_dual_norm;
                row["solution_h1_norm"] = sol.solution_h1_norm;
                row["passed"] = ok;
                rows.push_back(row);
                suites_passed = suites_passed && ok;
            }
        }
        outputs.emplace_back("resolvent.json", rows.dump(2) + "\n");
    }

    json manifest;
    manifest["config_hash"] = fnv1a_hex(echo);
    manifest["code_version"] = version_string();
    manifest["rng_algorithm"] = rng_algorithm_id();
    manifest["suites_passed"] = suites_passed;
    outputs.emplace_back("manifest.json", manifest.dump(2) + "\n");

    ScenarioOutcome outcome;
    outcome.suites_passed = suites_passed;
    outcome.directory = commit_outputs(fs::path(s.output_dir) / s.name, outputs);
    outcome.written.reserve(outputs.size());
    for (const auto& [name, content] : outputs) outcome.written.push_back(name);
    return outcome;
}

// --- reporting ----------------------------------------------------------

std::string report_results(const std::string& results_dir) {
    const fs::path root(results_dir);
    if (!fs::exists(root) || !fs::is_directory(root))
        throw ValidationError("results directory not found: " + results_dir);

    std::vector<fs::path> scenario_dirs;
    if (fs::exists(root / "manifest.json")) {
        scenario_dirs.push_back(root);
    } else {
        for (const auto& entry : fs::directory_iterator(root))
            if (entry.is_directory() && fs::exists(entry.path() / "manifest.json"))
                scenario_dirs.push_back(entry.path());
        std::sort(scenario_dirs.begin(), scenario_dirs.end());
    }

    ReportAccumulator acc;
    for (const auto& dir : scenario_dirs) report_scenario_dir(dir, acc);

    std::string summary = "# results summary\n";
    std::ostringstream head;
    head << scenario_dirs.size() << " scenario directories, " << acc.sections
         << " sections, " << acc.figures.size() << " figure files\n";
    summary += head.str();
    if (acc.sections == 0) summary += "warning: no result sections found\n";
    summary += "\n" + acc.summary;
    if (!acc.problems.empty()) {
        summary += "## unreadable inputs\n";
        for (const auto& problem : acc.problems) summary += "  " + problem + "\n";
    }

    OutputList outputs = std::move(acc.figures);
    outputs.emplace_back("summary.txt", summary);
    commit_outputs(root / "report", outputs);
    return summary;
}

} // namespace spdelab
