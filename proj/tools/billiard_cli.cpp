#include <cstdio>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "billiard/cli.hpp"

namespace {

int write_or_print(const nlohmann::ordered_json& rep, const std::string& out_path) {
    const std::string text = rep.dump(2) + "\n";
    if (out_path.empty()) {
        std::fputs(text.c_str(), stdout);
        return 0;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
        std::fprintf(stderr, "error: output.path: cannot write '%s'\n", out_path.c_str());
        return 2;
    }
    f << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    // The flag is reserved to assert that no run ever consumes randomness; a
    // value would suggest it can be turned off, so reject that form outright.
    for (int i = 1; i < argc; ++i)
        if (std::string(argv[i]).rfind("--seedless=", 0) == 0) {
            std::fprintf(stderr, "error: --seedless: flag takes no value\n");
            return 2;
        }

    CLI::App app{"Spectra, eigenfunctions and coupling classification for a rectangular "
                 "billiard with a single small impurity"};
    app.require_subcommand(1);

    std::string config_path, out_path;
    int threads = 1;
    std::size_t state = 0;
    double bound = 0.0;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration")->required();
        sub->add_option("--out", out_path, "output path (reports default to stdout)");
        sub->add_option("--threads", threads, "worker threads for assembly and rasters")
            ->check(CLI::Range(1, 256));
        sub->add_flag("--seedless", "assert the run is free of random inputs (always true)");
    };

    CLI::App* c_spectrum =
        app.add_subcommand("spectrum", "solve the secular spectrum inside the window");
    CLI::App* c_classify =
        app.add_subcommand("classify", "score couplings against the strong-coupling strip");
    CLI::App* c_wavefunction =
        app.add_subcommand("wavefunction", "rasterize one solved state to CSV (and PGM)");
    CLI::App* c_strip = app.add_subcommand("strip-map", "tabulate the classification grid");
    CLI::App* c_oracle =
        app.add_subcommand("oracle", "diagonalize the impurity Hamiltonian directly");
    CLI::App* c_compare =
        app.add_subcommand("compare", "check the truncated model against the direct solver");
    for (CLI::App* sub : {c_spectrum, c_classify, c_wavefunction, c_strip, c_oracle, c_compare})
        add_common(sub);
    c_wavefunction->add_option("--state", state, "index among the states in the window")
        ->required();
    CLI::Option* bound_opt =
        c_compare->add_option("--bound", bound, "largest tolerated |model - oracle| difference");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        billiard::cli::RunConfig rc = billiard::cli::load_config(config_path);
        rc.threads = threads;
        if (bound_opt->count() > 0) {
            if (!(bound > 0.0) || !std::isfinite(bound))
                throw billiard::cli::ConfigError("compare.bound: must be positive and finite");
            rc.compare_bound = bound;
        }

        if (app.got_subcommand(c_spectrum))
            return write_or_print(billiard::cli::cmd_spectrum(rc), out_path);
        if (app.got_subcommand(c_classify))
            return write_or_print(billiard::cli::cmd_classify(rc), out_path);
        if (app.got_subcommand(c_oracle))
            return write_or_print(billiard::cli::cmd_oracle(rc), out_path);
        if (app.got_subcommand(c_wavefunction)) {
            if (!out_path.empty())
                rc.output.path = out_path;
            return write_or_print(billiard::cli::cmd_wavefunction(rc, state), "");
        }
        if (app.got_subcommand(c_strip)) {
            if (!out_path.empty())
                rc.output.path = out_path;
            return write_or_print(billiard::cli::cmd_strip_map(rc), "");
        }
        // compare
        const billiard::cli::CompareOutcome outcome = billiard::cli::cmd_compare(rc);
        if (const int code = write_or_print(outcome.report, out_path))
            return code;
        return outcome.bound_violated ? 1 : 0;
    } catch (const billiard::cli::ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::fprintf(stderr, "error: config: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
