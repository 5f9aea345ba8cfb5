#include "gkb/harness/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "gkb/seeding.hpp"

namespace gkb::harness {

Section::Section(const Json& node, std::string path, std::shared_ptr<const std::string> text, std::string origin)
    : node_(node), path_(std::move(path)), text_(std::move(text)), origin_(std::move(origin))
{
    if (!node_.is_object()) {
        throw ConfigError(origin_ + ": field '" + (path_.empty() ? "<root>" : path_) + "': expected an object");
    }
}

std::string Section::field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

std::string Section::location(const std::string& key) const
{
    std::string where = origin_;
    if (text_) {
        const std::size_t pos = text_->find("\"" + key + "\"");
        if (pos != std::string::npos) {
            const auto line = 1 + std::count(text_->begin(), text_->begin() + static_cast<std::ptrdiff_t>(pos), '\n');
            where += ":" + std::to_string(line);
        }
    }
    return where;
}

void Section::fail(const std::string& key, const std::string& message) const
{
    throw ConfigError(location(key) + ": field '" + field(key) + "': " + message);
}

bool Section::has(const std::string& key) const { return node_.contains(key); }

const Json& Section::raw(const std::string& key) const
{
    if (!has(key)) {
        fail(key, "missing");
    }
    return node_.at(key);
}

double Section::number(const std::string& key, double fallback) const
{
    if (!has(key)) {
        return fallback;
    }
    const Json& v = node_.at(key);
    if (!v.is_number()) {
        fail(key, "expected a number");
    }
    const double x = v.get<double>();
    if (!std::isfinite(x)) {
        fail(key, "must be finite");
    }
    return x;
}

std::int64_t Section::integer(const std::string& key, std::int64_t fallback) const
{
    if (!has(key)) {
        return fallback;
    }
    const Json& v = node_.at(key);
    if (!v.is_number_integer()) {
        fail(key, "expected an integer");
    }
    return v.get<std::int64_t>();
}

std::uint64_t Section::unsigned_integer(const std::string& key, std::uint64_t fallback) const
{
    if (!has(key)) {
        return fallback;
    }
    const Json& v = node_.at(key);
    if (v.is_number_unsigned()) {
        return v.get<std::uint64_t>();
    }
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    fail(key, "expected a non-negative integer");
}

bool Section::boolean(const std::string& key, bool fallback) const
{
    if (!has(key)) {
        return fallback;
    }
    const Json& v = node_.at(key);
    if (!v.is_boolean()) {
        fail(key, "expected true or false");
    }
    return v.get<bool>();
}

std::string Section::string(const std::string& key, const std::string& fallback) const
{
    if (!has(key)) {
        return fallback;
    }
    const Json& v = node_.at(key);
    if (!v.is_string()) {
        fail(key, "expected a string");
    }
    return v.get<std::string>();
}

Section Section::child(const std::string& key) const
{
    if (!has(key)) {
        return Section(Json::object(), field(key), text_, origin_);
    }
    if (!node_.at(key).is_object()) {
        fail(key, "expected an object");
    }
    return Section(node_.at(key), field(key), text_, origin_);
}

void Section::allow(std::initializer_list<const char*> known) const
{
    for (const auto& item : node_.items()) {
        const bool ok = std::any_of(known.begin(), known.end(), [&](const char* k) { return item.key() == k; });
        if (!ok) {
            fail(item.key(), "unknown field");
        }
    }
}

namespace {

Kernel kernel_from_section(const Section& s)
{
    s.allow({"type", "lengthscale", "nu", "bound"});
    const std::string type = s.string("type", "");
    if (type == "linear") {
        const double bound = s.number("bound", 1.0);
        if (!(bound > 0.0)) {
            s.fail("bound", "must be positive");
        }
        return Kernel::linear(bound);
    }
    const double ell = s.number("lengthscale", 1.0);
    if (!(ell > 0.0)) {
        s.fail("lengthscale", "must be positive");
    }
    if (type == "rbf") {
        return Kernel::rbf(ell);
    }
    if (type == "matern") {
        const double nu = s.number("nu", 2.5);
        if (nu == 0.5) {
            return Kernel::matern(MaternSmoothness::half, ell);
        }
        if (nu == 1.5) {
            return Kernel::matern(MaternSmoothness::three_halves, ell);
        }
        if (nu == 2.5) {
            return Kernel::matern(MaternSmoothness::five_halves, ell);
        }
        s.fail("nu", "supported values are 0.5, 1.5 and 2.5");
    }
    s.fail("type", "unknown kernel '" + type + "' (linear, rbf, matern)");
}

EFModel model_from_section(const Section& s, int horizon, double delta)
{
    s.allow({"type", "sigma", "noise_bound"});
    const std::string type = s.string("type", "");
    if (type == "bernoulli") {
        return EFModel::bernoulli();
    }
    if (type == "gaussian") {
        const double sigma = s.number("sigma", 1.0);
        if (!(sigma > 0.0)) {
            s.fail("sigma", "must be positive");
        }
        const double noise = s.number("noise_bound", gaussian_noise_bound(sigma, horizon, delta));
        if (!(noise > 0.0)) {
            s.fail("noise_bound", "must be positive");
        }
        return EFModel::gaussian(sigma * sigma, noise);
    }
    s.fail("type", "unknown model '" + type + "' (bernoulli, gaussian)");
}

Section root_section(const Json& doc) { return Section(doc, "", nullptr, "<descriptor>"); }

} // namespace

Kernel kernel_from_json(const Json& descriptor) { return kernel_from_section(root_section(descriptor)); }

EFModel model_from_json(const Json& descriptor, int horizon, double delta)
{
    return model_from_section(root_section(descriptor), horizon, delta);
}

std::uint64_t instance_seed(const ExperimentConfig& config)
{
    return config.pinned_instance_seed ? *config.pinned_instance_seed : derive_seed(config.seed, 0, "instance");
}

InstanceSpec resolved_instance(const ExperimentConfig& config)
{
    InstanceSpec spec = config.instance;
    spec.seed = instance_seed(config);
    return spec;
}

InstanceSpec parse_instance(const Section& instance, int horizon, double delta, Json& kernel_descriptor,
                            Json& model_descriptor)
{
    instance.allow({"seed", "kernel", "model", "num_arms", "num_anchors", "B", "domain"});
    InstanceSpec spec;
    spec.seed = instance.unsigned_integer("seed", 0);
    const Section kernel = instance.child("kernel");
    kernel_descriptor = kernel.node().empty() ? Json{{"type", "rbf"}, {"lengthscale", 1.0}} : kernel.node();
    spec.kernel = kernel.node().empty() ? Kernel::rbf(1.0) : kernel_from_section(kernel);
    const Section model = instance.child("model");
    model_descriptor = model.node().empty() ? Json{{"type", "bernoulli"}} : model.node();
    spec.model = model.node().empty() ? EFModel::bernoulli() : model_from_section(model, horizon, delta);
    const auto arms = instance.integer("num_arms", 10);
    if (arms < 2 || arms > 100'000) {
        instance.fail("num_arms", "must be in [2, 1e5]");
    }
    spec.num_arms = static_cast<int>(arms);
    const auto anchors = instance.integer("num_anchors", 5);
    if (anchors < 1 || anchors > 100'000) {
        instance.fail("num_anchors", "must be in [1, 1e5]");
    }
    spec.num_anchors = static_cast<int>(anchors);
    spec.B = instance.number("B", 1.0);
    if (!(spec.B > 0.0)) {
        instance.fail("B", "must be positive");
    }
    const Section domain = instance.child("domain");
    domain.allow({"dimension", "low", "high"});
    const auto dimension = domain.integer("dimension", 1);
    if (dimension < 1 || dimension > 1000) {
        domain.fail("dimension", "must be in [1, 1000]");
    }
    spec.domain.dimension = static_cast<int>(dimension);
    spec.domain.low = domain.number("low", 0.0);
    spec.domain.high = domain.number("high", 1.0);
    if (!(spec.domain.low < spec.domain.high)) {
        domain.fail("high", "must exceed low");
    }
    return spec;
}

ExperimentConfig parse_config(const std::string& text, const std::string& origin)
{
    Json doc;
    try {
        doc = Json::parse(text, nullptr, true, true);
    } catch (const Json::parse_error& e) {
        // e.byte is the 1-based offset of the failure
        const auto end = std::min(text.size(), static_cast<std::size_t>(e.byte));
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(end), '\n');
        throw ConfigError(origin + ":" + std::to_string(line) + ": parse error: " + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError(origin + ":1: top level must be an object");
    }
    auto shared = std::make_shared<const std::string>(text);
    const Section root(doc, "", shared, origin);
    root.allow({"seed", "output_dir", "instance", "experiment", "verify"});

    ExperimentConfig config;
    config.source = doc;
    config.seed = root.unsigned_integer("seed", 0);
    config.output_dir = root.string("output_dir", "out");

    const Section experiment = root.child("experiment");
    experiment.allow({"horizon", "replications", "delta", "lambda", "policies", "record_timing"});
    const auto horizon = experiment.integer("horizon", 100);
    if (horizon < 1 || horizon > 10'000'000) {
        experiment.fail("horizon", "must be in [1, 1e7]");
    }
    config.horizon = static_cast<int>(horizon);
    const auto replications = experiment.integer("replications", 1);
    if (replications < 1 || replications > 1'000'000) {
        experiment.fail("replications", "must be in [1, 1e6]");
    }
    config.replications = static_cast<int>(replications);
    config.delta = experiment.number("delta", 0.1);
    if (!(config.delta > 0.0 && config.delta < 1.0)) {
        experiment.fail("delta", "must lie in (0, 1)");
    }
    config.lambda = experiment.number("lambda", 1.0);
    if (!(config.lambda > 0.0)) {
        experiment.fail("lambda", "must be positive");
    }
    config.record_timing = experiment.boolean("record_timing", false);

    if (experiment.has("policies")) {
        const Json& list = experiment.raw("policies");
        if (!list.is_array()) {
            experiment.fail("policies", "expected an array");
        }
        for (std::size_t i = 0; i < list.size(); ++i) {
            const Json& entry = list[i];
            const std::string where = "policies[" + std::to_string(i) + "]";
            PolicySpec policy;
            policy.lambda = config.lambda;
            std::string name;
            if (entry.is_string()) {
                name = entry.get<std::string>();
            } else if (entry.is_object()) {
                const Section p(entry, experiment.path() + "." + where, shared, origin);
                p.allow({"name", "label", "lambda"});
                name = p.string("name", "");
                policy.label = p.string("label", "");
                policy.lambda = p.number("lambda", config.lambda);
                if (!(policy.lambda > 0.0)) {
                    p.fail("lambda", "must be positive");
                }
            } else {
                experiment.fail("policies", where + ": expected a name or an object");
            }
            try {
                policy.kind = parse_policy_kind(name);
            } catch (const InputError& e) {
                experiment.fail("policies", where + ": " + e.what());
            }
            if (policy.label.empty()) {
                policy.label = name;
            }
            const bool duplicate = std::any_of(config.policies.begin(), config.policies.end(),
                                               [&](const PolicySpec& q) { return q.label == policy.label; });
            if (duplicate) {
                experiment.fail("policies", where + ": duplicate label '" + policy.label + "'");
            }
            config.policies.push_back(policy);
        }
    }

    const Section instance = root.child("instance");
    if (instance.has("seed")) {
        config.pinned_instance_seed = instance.unsigned_integer("seed", 0);
    }
    config.instance =
        parse_instance(instance, config.horizon, config.delta, config.kernel_descriptor, config.model_descriptor);

    const Section verify = root.child("verify");
    verify.allow({"bound_multiplier", "suites"});
    config.bound_multiplier = verify.number("bound_multiplier", 1.0);
    if (!(config.bound_multiplier > 0.0)) {
        verify.fail("bound_multiplier", "must be positive");
    }
    const Section suites = verify.child("suites");
    for (const auto& item : suites.node().items()) {
        config.suites.emplace_back(item.key(), suites.child(item.key()));
    }
    return config;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError(path + ": cannot open config file");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str(), path);
}

} // namespace gkb::harness
