// morphorank command line: ingest | pools | train | eval | temporal | report
//
// Exit codes: 0 success, 1 runtime failure, 2 configuration / input error.

#include <iostream>

#include "CLI11.hpp"
#include "morphorank/pipeline.hpp"

using namespace morphorank;

int main(int argc, char** argv) {
    CLI::App app{"morphorank: rank morpheme sequences for emerging concepts"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    long long seed_override = -1;
    int jobs = 1;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "key = value config file")->required();
        sub->add_option("--set", overrides, "override a config key (key=value), repeatable");
        sub->add_option("--seed", seed_override, "override the config seed");
        sub->add_option("--jobs", jobs, "worker count (accepted for compatibility)");
    };

    auto* ingest = app.add_subcommand("ingest", "load inputs, build the lexicon bundle");
    auto* pools = app.add_subcommand("pools", "enumerate and cache candidate pools");
    auto* train = app.add_subcommand("train", "train one family or all of them");
    auto* eval = app.add_subcommand("eval", "rank the test split with trained checkpoints");
    auto* temporal = app.add_subcommand("temporal", "cumulative-window retraining sweep");
    auto* report = app.add_subcommand("report", "emit aggregate report tables");

    std::string family = "all";
    train->add_option("--family", family, "cost|semantic|discriminative|s1-linear|s1-nonlinear|all");

    for (auto* sub : {ingest, pools, train, eval, temporal, report}) add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        PipelineContext ctx = make_context(config_path, overrides);
        if (seed_override >= 0) ctx = [&] {
            std::vector<std::string> all = overrides;
            all.push_back("seed=" + std::to_string(seed_override));
            return make_context(config_path, all);
        }();

        if (ingest->parsed()) cmd_ingest(ctx);
        if (pools->parsed()) cmd_pools(ctx);
        if (train->parsed()) cmd_train(ctx, family);
        if (eval->parsed()) cmd_eval(ctx);
        if (temporal->parsed()) cmd_temporal(ctx);
        if (report->parsed()) cmd_report(ctx);
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const LoadError& e) {
        std::cerr << "input error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
