#include "gkb/harness/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "gkb/harness/io.hpp"
#include "gkb/parallel.hpp"
#include "gkb/seeding.hpp"

#ifndef GKB_VERSION
#define GKB_VERSION "unknown"
#endif

namespace gkb::harness {

std::string tool_version() { return GKB_VERSION; }

bool ExperimentResult::all_ok() const
{
    return std::all_of(runs.begin(), runs.end(), [](const ReplicationResult& r) { return r.ok; });
}

double ExperimentResult::mean_regret_at(const std::string& label, int t) const
{
    double sum = 0.0;
    int n = 0;
    for (const auto& r : runs) {
        if (r.label == label && r.ok && t >= 1 && static_cast<std::size_t>(t) <= r.records.size()) {
            sum += r.records[static_cast<std::size_t>(t - 1)].cum_regret;
            ++n;
        }
    }
    return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

double ExperimentResult::mean_final_regret(const std::string& label) const
{
    double sum = 0.0;
    int n = 0;
    for (const auto& r : runs) {
        if (r.label == label && r.ok && !r.records.empty()) {
            sum += r.records.back().cum_regret;
            ++n;
        }
    }
    return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

namespace {

ReplicationResult run_one(const ExperimentConfig& config, const Environment& env, const PolicySpec& policy,
                          int replication)
{
    ReplicationResult out;
    out.label = policy.label;
    out.replication = replication;
    Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(replication), policy.label));

    PolicyConfig pc;
    pc.kind = policy.kind;
    pc.confidence = ConfidenceConfig::from_model(env.model(), config.delta, policy.lambda, config.instance.B,
                                                 env.f_star().kernel().bound());
    PolicyState state(pc, env.f_star().kernel(), env.model(), env.decision_set());
    out.records.reserve(static_cast<std::size_t>(config.horizon));
    try {
        for (int t = 1; t <= config.horizon; ++t) {
            out.records.push_back(run_round(state, env, rng));
        }
    } catch (const NumericalError& e) {
        out.ok = false;
        out.error = "round " + std::to_string(out.records.size() + 1) + ": " + e.what();
    }
    return out;
}

double median(std::vector<double> values)
{
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

Json number_or_null(double value)
{
    return std::isfinite(value) ? Json(value) : Json(nullptr);
}

Json point_json(const Point& p)
{
    Json a = Json::array();
    for (Index i = 0; i < p.size(); ++i) {
        a.push_back(p(i));
    }
    return a;
}

} // namespace

ExperimentResult run_replications(const ExperimentConfig& config, const Environment& environment, int workers)
{
    if (config.policies.empty()) {
        throw InputError("experiment.policies: at least one policy is required");
    }
    const int reps = config.replications;
    const int total = static_cast<int>(config.policies.size()) * reps;
    ExperimentResult result;
    result.runs.resize(static_cast<std::size_t>(total));
    parallel_for(total, workers, [&](int job) {
        const auto& policy = config.policies[static_cast<std::size_t>(job / reps)];
        result.runs[static_cast<std::size_t>(job)] = run_one(config, environment, policy, job % reps);
    });
    return result;
}

std::filesystem::path run_file(const std::string& label, int replication)
{
    char name[32];
    std::snprintf(name, sizeof name, "_rep%04d.csv", replication);
    return std::filesystem::path("runs") / (label + name);
}

std::string records_csv(const ReplicationResult& run, bool record_timing)
{
    std::ostringstream out;
    out << "t,policy,replication,arm_index,reward,inst_regret,cum_regret,D_t,B_t,newton_iters,bisection_iters,"
           "wall_ms\n";
    for (const auto& r : run.records) {
        out << r.t << ',' << run.label << ',' << run.replication << ',' << r.arm << ',' << format_number(r.reward)
            << ',' << format_number(r.inst_regret) << ',' << format_number(r.cum_regret) << ','
            << format_number(r.D_t) << ',' << format_number(r.B_t) << ',' << r.newton_iters << ','
            << r.bisection_iters << ',' << format_number(record_timing ? r.wall_ms : 0.0) << '\n';
    }
    return out.str();
}

std::string aggregate_csv(const ExperimentConfig& config, const ExperimentResult& result)
{
    std::ostringstream out;
    out << "t,policy,mean_cum_regret,median_cum_regret,replications\n";
    for (const auto& policy : config.policies) {
        for (int t = 1; t <= config.horizon; ++t) {
            std::vector<double> values;
            for (const auto& r : result.runs) {
                if (r.label == policy.label && r.ok && static_cast<std::size_t>(t) <= r.records.size()) {
                    values.push_back(r.records[static_cast<std::size_t>(t - 1)].cum_regret);
                }
            }
            if (values.empty()) {
                continue;
            }
            double sum = 0.0;
            for (double v : values) {
                sum += v;
            }
            out << t << ',' << policy.label << ',' << format_number(sum / static_cast<double>(values.size())) << ','
                << format_number(median(values)) << ',' << values.size() << '\n';
        }
    }
    return out.str();
}

Json environment_summary(const ExperimentConfig& config, const Environment& environment)
{
    Json j;
    j["instance_seed"] = instance_seed(config);
    j["kernel"] = config.kernel_descriptor;
    j["model"] = config.model_descriptor;
    j["num_arms"] = environment.num_arms();
    j["B"] = config.instance.B;
    j["f_star_norm"] = environment.f_star_norm();
    j["x_star_index"] = environment.x_star_index();
    j["kappa_star"] = number_or_null(environment.kappa_star());
    j["kappa_x"] = number_or_null(environment.kappa_x());
    Json arms = Json::array();
    Json values = Json::array();
    Json means = Json::array();
    for (Index a = 0; a < environment.num_arms(); ++a) {
        arms.push_back(point_json(environment.decision_set()[static_cast<std::size_t>(a)]));
        values.push_back(environment.f_values()(a));
        means.push_back(environment.model().mu(environment.f_values()(a)));
    }
    j["arms"] = arms;
    j["f_star_values"] = values;
    j["mean_rewards"] = means;
    Json anchors = Json::array();
    for (const auto& z : environment.f_star().support()) {
        anchors.push_back(point_json(z));
    }
    j["anchors"] = anchors;
    Json coeffs = Json::array();
    for (Index i = 0; i < environment.f_star().coeffs().size(); ++i) {
        coeffs.push_back(environment.f_star().coeffs()(i));
    }
    j["anchor_coeffs"] = coeffs;
    return j;
}

Json manifest(const ExperimentConfig& config, const ExperimentResult& result)
{
    Json j;
    j["tool"] = "gkb";
    j["version"] = tool_version();
    j["config"] = config.source;
    Json resolved;
    resolved["seed"] = config.seed;
    resolved["instance_seed"] = instance_seed(config);
    resolved["horizon"] = config.horizon;
    resolved["replications"] = config.replications;
    resolved["delta"] = config.delta;
    Json policies = Json::array();
    for (const auto& p : config.policies) {
        policies.push_back({{"label", p.label}, {"policy", to_string(p.kind)}, {"lambda", p.lambda}});
    }
    resolved["policies"] = policies;
    resolved["record_timing"] = config.record_timing;
    j["resolved"] = resolved;
    Json runs = Json::array();
    int failed = 0;
    for (const auto& r : result.runs) {
        Json entry;
        entry["policy"] = r.label;
        entry["replication"] = r.replication;
        entry["status"] = r.ok ? "ok" : "failed";
        entry["rounds"] = r.records.size();
        entry["final_cum_regret"] = r.records.empty() ? 0.0 : r.records.back().cum_regret;
        entry["file"] = run_file(r.label, r.replication).generic_string();
        if (!r.ok) {
            entry["error"] = r.error;
            ++failed;
        }
        runs.push_back(entry);
    }
    j["replications"] = runs;
    j["failed_replications"] = failed;
    return j;
}

int run_experiment(const ExperimentConfig& config, int workers, std::ostream& log)
{
    const Environment environment = make_instance(resolved_instance(config));
    const std::filesystem::path root(config.output_dir);
    write_atomic(root / "environment.json", environment_summary(config, environment).dump(2) + "\n");

    const ExperimentResult result = run_replications(config, environment, workers);
    for (const auto& r : result.runs) {
        write_atomic(root / run_file(r.label, r.replication), records_csv(r, config.record_timing));
        if (!r.ok) {
            log << "replication " << r.replication << " of " << r.label << " failed: " << r.error << '\n';
        }
    }
    write_atomic(root / "aggregate.csv", aggregate_csv(config, result));
    write_atomic(root / "manifest.json", manifest(config, result).dump(2) + "\n");
    for (const auto& p : config.policies) {
        log << p.label << ": mean final cumulative regret " << format_number(result.mean_final_regret(p.label))
            << '\n';
    }
    return result.all_ok() ? 0 : 1;
}

} // namespace gkb::harness
