#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include <eotr/commands.hpp>

int main(int argc, char **argv)
{
    CLI::App app{"Local topological recursion for semisimple Frobenius data over the rationals"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    eotr::CommandOptions opts;
    int g = -1, n = -1;
    long long seed = -1;

    for (const char *verb : {"validate", "omega", "correlators", "check", "random-r"}) {
        auto *sub = app.add_subcommand(verb);
        sub->add_option("--config", config_path, "datum / run configuration (JSON)")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_path, "write the result here instead of stdout");
        sub->add_option("--seed", seed, "random symplectic R from this seed")->check(CLI::NonNegativeNumber);
        sub->add_option("--threads", opts.threads, "worker threads for the omega table")->check(CLI::PositiveNumber);
        sub->add_option("--g", g, "genus (omega), or genus cap (correlators, check)")->check(CLI::NonNegativeNumber);
        sub->add_option("--n", n, "number of points (omega)")->check(CLI::PositiveNumber);
    }
    CLI11_PARSE(app, argc, argv);
    const std::string verb = app.get_subcommands().front()->get_name();
    if (g >= 0) {
        opts.g = g;
    }
    if (n >= 0) {
        opts.n = n;
    }
    if (seed >= 0) {
        opts.seed = static_cast<std::uint64_t>(seed);
    }

    eotr::CommandResult r;
    try {
        r = eotr::run_command(verb, eotr::load_config(config_path), opts);
    } catch (const eotr::validation_error &e) {
        r = eotr::CommandResult{eotr::kValidation, "", std::string("validation failed: ") + e.what() + "\n"};
    }
    std::cerr << r.err;
    if (!r.out.empty()) {
        if (out_path.empty()) {
            std::cout << r.out;
        } else {
            std::ofstream f(out_path, std::ios::binary);
            f << r.out;
            if (!f) {
                std::cerr << "cannot write '" << out_path << "'\n";
                return eotr::kValidation;
            }
        }
    }
    return r.code;
}
