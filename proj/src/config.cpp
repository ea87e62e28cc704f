#include "spectral_damp/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace spectral_damp {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& s, const std::string& where) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw ConfigError(where + ": '" + s + "' is not a number");
    return v;
}

template <typename Int>
Int to_int(const std::string& s, const std::string& where) {
    Int v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ConfigError(where + ": '" + s + "' is not an integer");
    return v;
}

}  // namespace

const std::vector<std::string>& Config::known_keys() {
    static const std::vector<std::string> keys{
        "name", "dataset", "n_train", "n_test", "data_seed", "pool", "synthetic_dim", "synthetic_classes",
        "synthetic_separation", "model", "hidden", "optimizer", "lr", "damping", "eta", "momentum", "beta1",
        "beta2", "lanczos_steps", "weight_decay", "decouple_wd", "inside_sqrt", "refresh_every", "schedule",
        "floor_ratio", "warm_factor", "epochs", "seeds", "trace_every", "batch_size", "auto_damp", "ema_coeff",
        "update_interval", "strict_floor", "hvar_batch_size", "hvar_probes", "rmt.dim", "rmt.batch_size",
        "rmt.noise_scale", "rmt.spikes", "rmt.n_seeds", "stability.target", "stability.grid",
        "stability.lambda_max", "stability.dim", "stability.steps"};
    return keys;
}

Config Config::parse(std::string_view text, const std::string& source) {
    Config cfg;
    cfg.source_ = source;
    const auto& known = known_keys();
    std::size_t line_no = 0, pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        const std::string at = source + ":" + std::to_string(line_no);
        if (eq == std::string::npos) throw ConfigError(at + ": expected 'key = value'");
        const std::string key = trim(std::string_view(body).substr(0, eq));
        const std::string value = trim(std::string_view(body).substr(eq + 1));
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw ConfigError(at + ": unknown key '" + key + "'");
        if (cfg.values_.count(key)) throw ConfigError(at + ": duplicate key '" + key + "'");
        cfg.values_[key] = value;
    }
    return cfg;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path.string());
}

void Config::set(const std::string& key, const std::string& value) {
    const auto& known = known_keys();
    if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("unknown key '" + key + "'");
    values_[key] = value;
}

std::string Config::where(const std::string& key) const { return source_ + ": key '" + key + "'"; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : to_double(it->second, where(key));
}

long Config::get_int(const std::string& key, long fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : to_int<long>(it->second, where(key));
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::string v = it->second;
    std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(where(key) + ": '" + it->second + "' is not a boolean");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(it->second)) out.push_back(to_double(item, where(key)));
    if (out.empty()) throw ConfigError(where(key) + ": empty list");
    return out;
}

std::vector<std::uint64_t> Config::get_seeds(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError(source_ + ": missing required key '" + key + "'");
    std::vector<std::uint64_t> out;
    for (const auto& item : split_list(it->second)) out.push_back(to_int<std::uint64_t>(item, where(key)));
    if (out.empty()) throw ConfigError(where(key) + ": empty list");
    return out;
}

namespace {

std::size_t non_negative(long v, const std::string& key) {
    if (v < 0) throw ConfigError("key '" + key + "' must be >= 0");
    return static_cast<std::size_t>(v);
}

}  // namespace

ExperimentSpec experiment_from_config(const Config& cfg) {
    ExperimentSpec s;
    s.name = cfg.get_string("name", s.name);
    s.dataset.name = cfg.get_string("dataset", s.dataset.name);
    s.dataset.n_train = non_negative(cfg.get_int("n_train", static_cast<long>(s.dataset.n_train)), "n_train");
    s.dataset.n_test = non_negative(cfg.get_int("n_test", static_cast<long>(s.dataset.n_test)), "n_test");
    s.dataset.seed = non_negative(cfg.get_int("data_seed", 0), "data_seed");
    s.dataset.pool = static_cast<int>(cfg.get_int("pool", s.dataset.pool));
    s.dataset.synthetic_dim = static_cast<int>(cfg.get_int("synthetic_dim", s.dataset.synthetic_dim));
    s.dataset.synthetic_classes = static_cast<int>(cfg.get_int("synthetic_classes", s.dataset.synthetic_classes));
    s.dataset.synthetic_separation = cfg.get_double("synthetic_separation", s.dataset.synthetic_separation);

    try {
        s.model.kind = model_kind_from_string(cfg.get_string("model", "softmax_regression"));
        s.optimizer.kind = optimizer_kind_from_string(cfg.get_string("optimizer", "sgd"));
        s.schedule.kind = schedule_kind_from_string(cfg.get_string("schedule", "flat"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    if (s.model.kind == ModelKind::quadratic) throw ConfigError("model 'quadratic' cannot be trained on a dataset");
    s.model.hidden = static_cast<int>(cfg.get_int("hidden", s.model.hidden));

    OptimConfig& o = s.optimizer;
    o.momentum = cfg.get_double("momentum", o.momentum);
    o.beta1 = cfg.get_double("beta1", o.beta1);
    o.beta2 = cfg.get_double("beta2", o.beta2);
    o.lanczos_steps = non_negative(cfg.get_int("lanczos_steps", static_cast<long>(o.lanczos_steps)), "lanczos_steps");
    o.weight_decay = cfg.get_double("weight_decay", o.weight_decay);
    o.decouple_wd = cfg.get_bool("decouple_wd", o.decouple_wd);
    o.inside_sqrt = cfg.get_bool("inside_sqrt", o.inside_sqrt);
    o.refresh_every = cfg.get_int("refresh_every", o.refresh_every);

    s.lr_grid = cfg.get_doubles("lr", s.lr_grid);
    s.damping_grid = cfg.get_doubles("damping", s.damping_grid);
    s.eta_grid = cfg.get_doubles("eta", s.eta_grid);
    s.schedule.floor_ratio = cfg.get_double("floor_ratio", s.schedule.floor_ratio);
    s.schedule.warm_factor = cfg.get_double("warm_factor", s.schedule.warm_factor);
    s.epochs = cfg.get_int("epochs", s.epochs);
    s.seeds = cfg.get_seeds("seeds");
    s.trace_every = cfg.get_int("trace_every", s.trace_every);
    s.batch_size = non_negative(cfg.get_int("batch_size", 0), "batch_size");

    s.auto_damp = cfg.get_bool("auto_damp", s.auto_damp);
    s.ema_coeff = cfg.get_double("ema_coeff", s.ema_coeff);
    s.update_interval = cfg.get_int("update_interval", s.update_interval);
    s.strict_floor = cfg.get_bool("strict_floor", s.strict_floor);
    s.hvar_batch_size = non_negative(cfg.get_int("hvar_batch_size", static_cast<long>(s.hvar_batch_size)), "hvar_batch_size");
    s.hvar_probes = non_negative(cfg.get_int("hvar_probes", static_cast<long>(s.hvar_probes)), "hvar_probes");

    try {
        s.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return s;
}

RmtConfig rmt_from_config(const Config& cfg) {
    RmtConfig r;
    r.ensemble.dim = non_negative(cfg.get_int("rmt.dim", 1024), "rmt.dim");
    r.ensemble.batch_size = non_negative(cfg.get_int("rmt.batch_size", 100), "rmt.batch_size");
    r.ensemble.noise_scale = cfg.get_double("rmt.noise_scale", 1.0);
    r.n_seeds = non_negative(cfg.get_int("rmt.n_seeds", 20), "rmt.n_seeds");
    r.seed = cfg.get_seeds("seeds").front();
    const SemicircleLaw law = SemicircleLaw::from_spec(r.ensemble);
    for (double ratio : cfg.get_doubles("rmt.spikes", {1.5, 2.0, 3.0, 5.0, 0.8})) r.ensemble.spikes.push_back(ratio * law.scale);
    try {
        r.ensemble.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return r;
}

StabilityConfig stability_from_config(const Config& cfg) {
    StabilityConfig s;
    s.target = cfg.get_string("stability.target", s.target);
    if (s.target != "quadratic" && s.target != "preconditioned" && s.target != "adam" && s.target != "sgd")
        throw ConfigError("stability.target must be quadratic, preconditioned, adam or sgd");
    s.grid = cfg.get_doubles("stability.grid", {});
    if (s.grid.empty()) throw ConfigError("missing required key 'stability.grid'");
    s.lambda_max = cfg.get_double("stability.lambda_max", s.lambda_max);
    s.dim = non_negative(cfg.get_int("stability.dim", static_cast<long>(s.dim)), "stability.dim");
    s.steps = cfg.get_int("stability.steps", s.steps);
    s.damping = cfg.get_doubles("damping", {s.damping}).front();
    s.seed = cfg.get_seeds("seeds").front();
    return s;
}

}  // namespace spectral_damp
