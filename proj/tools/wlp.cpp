#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "wlp/scenario.hpp"

namespace {

int run_scenario(const std::string& config_path, const std::string& out_dir, bool verbose) {
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        std::cerr << "wlp: cannot read '" << config_path << "'\n";
        return 1;
    }
    std::stringstream text;
    text << in.rdbuf();
    wlp::ScenarioConfig cfg;
    try {
        cfg = wlp::parse_config(text.str());
    } catch (const wlp::ConfigError& e) {
        std::cerr << config_path << ": " << e.what() << '\n';
        return 1;
    }
    wlp::RunOptions opt;
    opt.out_dir = out_dir;
    opt.verbose = verbose;
    try {
        const wlp::RunReport rep = wlp::run(cfg, opt);
        std::cout << "wlp " << wlp::to_string(cfg.command) << " (" << config_path << ")\n";
        rep.print(std::cout);
        if (verbose)
            for (const auto& p : rep.outputs) std::cout << "  wrote " << p.string() << '\n';
        return rep.exit_code;
    } catch (const std::exception& e) {
        std::cerr << "wlp " << wlp::to_string(cfg.command) << ": " << e.what() << '\n';
        return 1;
    }
}

int run_reduce(const std::string& z_text) {
    try {
        const wlp::cplx z = wlp::parse_complex(z_text);
        const wlp::Reduction r = wlp::reduce_to_fundamental_domain(wlp::UpperHalfPoint(z));
        std::cout << "z       " << wlp::format_number(z.real()) << (z.imag() < 0 ? "" : "+")
                  << wlp::format_number(z.imag()) << "i\n";
        std::cout << "reduced " << wlp::format_number(r.point.x()) << (r.point.y() < 0 ? "" : "+")
                  << wlp::format_number(r.point.y()) << "i\n";
        std::cout << "gamma   " << r.gamma.str() << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "wlp reduce: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Weierstrass immersions, modular spectra and Lax-Phillips wave checks"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    bool verbose = false;
    auto* run = app.add_subcommand("run", "Run a JSON scenario");
    run->add_option("config", config_path, "Scenario file")->required();
    run->add_flag("--verbose,-v", verbose, "List written files");
    run->add_option("--out-dir", out_dir, "Directory for relative output paths");

    std::string z_text;
    auto* reduce = app.add_subcommand("reduce", "Reduce a point to the modular fundamental domain");
    reduce->add_option("--z", z_text, "Point as x+yi")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }
    if (*run) return run_scenario(config_path, out_dir, verbose);
    return run_reduce(z_text);
}
