// Command-line driver: batch forward synthesis and inverse pipelines for the
// frequency-domain plate equation with passive boundary data.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "plateinv/pipeline.hpp"
#include "plateinv/threading.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitVerifyFailure = 4;

int run_command(const std::string& config_path, const std::string& out_override) {
    const auto rc = plateinv::load_run_config(config_path);
    const std::string out = out_override.empty() ? rc.output_dir : out_override;
    const auto summary = plateinv::run_pipeline(rc, out);
    std::printf("wrote %s/summary.json (config %s, %zu stages)\n", out.c_str(), rc.hash.c_str(),
                summary["stages"].size());
    return kExitOk;
}

int verify_command(const std::string& config_path, std::uint64_t seed) {
    const auto rc = plateinv::load_run_config(config_path);
    plateinv::VerifyOptions opt;
    opt.seed = seed;
    const auto rows = plateinv::run_verify_suite(rc, opt);
    bool all_ok = true;
    for (const auto& r : rows) {
        std::printf("[%s] %-55s measured=%.3e %s %.3e\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                    r.measured, r.lower_bound ? ">=" : "<=", r.tolerance);
        all_ok = all_ok && r.passed;
    }
    return all_ok ? kExitOk : kExitVerifyFailure;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"forward and inverse solver for the plate equation with passive boundary data"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::uint64_t seed = 1;
    int threads = 1;
    app.add_option("--threads", threads, "worker threads (results are identical for any count)");

    auto* run = app.add_subcommand("run", "execute the configured pipeline stages");
    run->add_option("config", config_path, "run configuration (JSON)")->required();
    run->add_option("--out", out_override, "override the configured output directory");

    auto* verify = app.add_subcommand("verify", "run the built-in oracle suite at the config's scale");
    verify->add_option("config", config_path, "run configuration (JSON)")->required();
    verify->add_option("--seed", seed, "seed for the randomized source placement");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    }

    plateinv::set_thread_count(threads);
    try {
        if (run->parsed()) return run_command(config_path, out_override);
        return verify_command(config_path, seed);
    } catch (const plateinv::input_error& e) {
        std::fprintf(stderr, "validation error: %s\n", e.what());
        return kExitValidation;
    } catch (const plateinv::numerical_error& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    }
}
