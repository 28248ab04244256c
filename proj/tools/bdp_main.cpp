#include <string>

#include <CLI11.hpp>

#include "bdp/runner.hpp"

int main(int argc, char** argv) {
    CLI::App app{"bi-level data-pruning architecture search"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = "out";
    std::string genotype_path;
    std::string run_dir;
    std::string eval_out;

    CLI::App* search = app.add_subcommand("search", "run one architecture search");
    search->add_option("-c,--config", config_path, "config JSON")->required();
    search->add_option("-o,--out", out_dir, "output directory");

    CLI::App* grid = app.add_subcommand("grid", "criterion x ratio sweep");
    grid->add_option("-c,--config", config_path, "config JSON")->required();
    grid->add_option("-o,--out", out_dir, "output directory");

    CLI::App* eval = app.add_subcommand("eval", "retrain a discrete genotype from scratch");
    eval->add_option("-g,--genotype", genotype_path, "genotype.txt")->required();
    eval->add_option("-c,--config", config_path, "config JSON")->required();
    eval->add_option("-o,--out", eval_out, "output directory (default: beside the genotype)");

    CLI::App* plot = app.add_subcommand("plot", "render trajectory charts as SVG");
    plot->add_option("-i,--in", run_dir, "directory holding trajectory.csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage problems are config errors
    }

    if (search->parsed()) return bdp::cmd_search(config_path, out_dir);
    if (grid->parsed()) return bdp::cmd_grid(config_path, out_dir);
    if (eval->parsed()) return bdp::cmd_eval(genotype_path, config_path, eval_out);
    if (plot->parsed()) return bdp::cmd_plot(run_dir);
    return 2;
}
