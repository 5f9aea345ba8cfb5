#ifndef GKB_HARNESS_CONFIG_HPP
#define GKB_HARNESS_CONFIG_HPP

#include <cstdint>
#include <initializer_list>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gkb/environment.hpp"
#include "gkb/policy.hpp"

namespace gkb::harness {

using Json = nlohmann::ordered_json;

/// Malformed or out-of-range configuration; the message names the file, line and field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/*
 * Typed access to one JSON object of the config with error messages that
 * carry the dotted field path and, when the key can be found in the source
 * text, its line.
 */
class Section {
public:
    Section(const Json& node, std::string path, std::shared_ptr<const std::string> text, std::string origin);

    bool has(const std::string& key) const;
    double number(const std::string& key, double fallback) const;
    std::int64_t integer(const std::string& key, std::int64_t fallback) const;
    std::uint64_t unsigned_integer(const std::string& key, std::uint64_t fallback) const;
    bool boolean(const std::string& key, bool fallback) const;
    std::string string(const std::string& key, const std::string& fallback) const;
    /// Empty object when the key is absent.
    Section child(const std::string& key) const;
    const Json& raw(const std::string& key) const;
    const Json& node() const { return node_; }
    const std::string& path() const { return path_; }

    /// Rejects keys outside `known`.
    void allow(std::initializer_list<const char*> known) const;
    [[noreturn]] void fail(const std::string& key, const std::string& message) const;

private:
    std::string field(const std::string& key) const;
    std::string location(const std::string& key) const;

    Json node_;
    std::string path_;
    std::shared_ptr<const std::string> text_;
    std::string origin_;
};

struct PolicySpec {
    /// Name used in outputs and for the RNG stream; defaults to the policy name.
    std::string label;
    PolicyKind kind = PolicyKind::eff_gkb_ucb;
    double lambda = 1.0;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    /// instance.seed is resolved through instance_seed().
    InstanceSpec instance;
    std::optional<std::uint64_t> pinned_instance_seed;
    Json kernel_descriptor;
    Json model_descriptor;
    int horizon = 100;
    int replications = 1;
    double delta = 0.1;
    double lambda = 1.0;
    std::vector<PolicySpec> policies;
    /// wall_ms is written as 0 unless set, so reruns stay byte-identical.
    bool record_timing = false;

    /// Settings of the verify subcommand.
    double bound_multiplier = 1.0;
    /// Suite name -> parameters, in file order.
    std::vector<std::pair<std::string, Section>> suites;

    /// Parsed document as read, echoed into manifests.
    Json source;
};

/// Reads and validates a config file. Throws ConfigError.
ExperimentConfig load_config(const std::string& path);
ExperimentConfig parse_config(const std::string& text, const std::string& origin = "<config>");

/// {"type": "rbf", "lengthscale": 0.2}, {"type": "matern", "nu": 1.5, ...}, {"type": "linear", "bound": 1}.
Kernel kernel_from_json(const Json& descriptor);
/// {"type": "bernoulli"} or {"type": "gaussian", "sigma": s, "noise_bound": R}; when the noise
/// bound is omitted it is set from (sigma, horizon, delta).
EFModel model_from_json(const Json& descriptor, int horizon, double delta);

/// Instance block (kernel, model, sizes, domain); instance.seed is read as given, 0 when absent.
InstanceSpec parse_instance(const Section& instance, int horizon, double delta, Json& kernel_descriptor,
                            Json& model_descriptor);

/// Seed of the instance: the explicit instance.seed or a stream of the master seed.
std::uint64_t instance_seed(const ExperimentConfig& config);

/// The instance spec with its seed resolved.
InstanceSpec resolved_instance(const ExperimentConfig& config);

} // namespace gkb::harness

#endif
