#include <cstdio>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "vgc/bench.hpp"
#include "vgc/config.hpp"

namespace {

int run(vgc::bench::WorkloadSpec spec, const vgc::Settings& settings, vgc::bench::Format format, bool dump) {
    using namespace vgc::bench;
    if (is_alloc_kind(spec.kind)) {
        const AllocReport rep = run_alloc_experiments(spec, settings.zones, settings.experiment, dump ? &std::cerr : nullptr);
        std::cout << emit_alloc_report(rep, format);
        return 0;
    }
    RunOptions opts;
    opts.parallel.pin = settings.pin;
    opts.parallel.cores = settings.cores;
    const BenchReport rep = run_workload(spec, opts);
    std::cout << "# " << to_string(spec.kind) << " size=" << spec.size;
    if (spec.kind == WorkloadKind::recursion || spec.kind == WorkloadKind::deep_recursion)
        std::cout << " chunk=" << effective_chunk(spec);
    std::cout << " partitions=" << spec.partitions << " attempts=" << spec.attempts
              << " pinned=" << (rep.pinned ? "yes" : "no") << '\n';
    if (!rep.stddev_defined) std::cout << "# single attempt: stddev undefined\n";
    std::cout << emit_report(rep, format);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"VGC benchmark harness"};
    std::string kind;
    std::string format = "csv";
    std::string config;
    bool dump = false;
    vgc::bench::WorkloadSpec spec;

    app.add_option("kind", kind, "loop | recursion | deep_recursion | matrix | alloc_reuse | zone_pressure | "
                                 "zone_imbalance | expiration | checkpoint_lifecycle")
        ->required();
    app.add_option("--size", spec.size, "iterations, total depth, matrix dimension or request count")->required();
    app.add_option("--chunk", spec.chunk, "recursion chain depth");
    app.add_option("--partitions", spec.partitions, "worker partitions")->check(CLI::PositiveNumber);
    app.add_option("--attempts", spec.attempts, "recorded attempts")->check(CLI::PositiveNumber);
    app.add_option("--seed", spec.seed, "matrix / zone draw seed");
    app.add_option("--format", format, "csv | markdown")->check(CLI::IsMember({"csv", "markdown", "md"}));
    app.add_option("--config", config, "key = value settings file")->check(CLI::ExistingFile);
    app.add_flag("--dump", dump, "print live checkpoint entries to stderr after an allocation experiment");

    CLI11_PARSE(app, argc, argv);

    try {
        spec.kind = vgc::bench::parse_kind(kind);
        const vgc::Settings settings = config.empty() ? vgc::Settings{} : vgc::load_settings_file(config);
        return run(spec, settings, vgc::bench::parse_format(format), dump);
    } catch (const vgc::Error& e) {
        std::cerr << "bench: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "bench: " << e.what() << '\n';
        return 3;
    }
}
