// Command-line experiment runner: synth | train | compare | evaluate.
// Exit codes: 0 success, 1 runtime/numeric failure, 2 usage/IO.

#include <cctype>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sgru/errors.hpp"
#include "sgru/experiment.hpp"

namespace {

int month_number(const std::string& label) {
    static const char* names[12] = {"january", "february", "march",     "april",   "may",
                                    "june",    "july",     "august",    "september",
                                    "october", "november", "december"};
    std::string lower;
    for (char c : label) lower.push_back(static_cast<char>(std::tolower(c)));
    for (int i = 0; i < 12; ++i) {
        if (lower == names[i]) return i + 1;
    }
    return 0;
}

std::vector<std::string> split_csv(const std::string& s, std::size_t max_fields) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (out.size() + 1 < max_fields) {
        const std::size_t pos = s.find(',', start);
        if (pos == std::string::npos) break;
        out.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    out.push_back(s.substr(start));
    return out;
}

struct CliOptions {
    sgru::RunSpec run;
    std::vector<std::string> file_specs;  // Region,Month,path
    std::vector<std::string> synth_specs; // Region,Month,days
    sgru::SynthConfig synth_shape;        // amplitude/noise/... for synthetic datasets
    std::string mode = "stateless";
};

void add_train_options(CLI::App* cmd, CliOptions& opt, bool with_mode, bool out_required = true) {
    cmd->fallthrough(true); // lets --config reach the root app after the subcommand
    cmd->add_option("--dataset", opt.file_specs,
                    "Dataset as Region,Month,path (SURFRAD .dat or canonical .csv); repeatable");
    cmd->add_option("--synth", opt.synth_specs,
                    "Synthetic dataset as Region,Month,days; repeatable");
    auto* out = cmd->add_option("--out", opt.run.out_dir, "Output directory");
    if (out_required) out->required();
    cmd->add_option("--seed", opt.run.seed, "Master seed");
    cmd->add_option("--epochs", opt.run.train.epochs, "Training epochs");
    cmd->add_option("--window", opt.run.train.window_len, "Input window length, hours");
    cmd->add_option("--horizon", opt.run.train.horizon, "Forecast horizon, hours ahead");
    cmd->add_option("--hidden", opt.run.train.hidden_dim, "Hidden units per layer");
    cmd->add_option("--layers", opt.run.train.layers, "Stacked GRU layers");
    cmd->add_option("--batch", opt.run.train.batch_size, "Batch size");
    cmd->add_option("--lr", opt.run.train.learning_rate, "Adam learning rate");
    cmd->add_option("--clip", opt.run.train.clip_norm, "Gradient norm clip, 0 disables");
    cmd->add_option("--train-frac", opt.run.train_fraction, "Chronological train fraction");
    cmd->add_option("--jobs", opt.run.jobs, "Parallel (region,month,mode) runs");
    cmd->add_flag("--cyclic-hour", opt.run.cyclic_hour,
                  "Encode the hour feature as a sin/cos pair");
    cmd->add_flag_function(
        "--no-shuffle", [&opt](std::int64_t) { opt.run.train.shuffle = false; },
        "Disable the seeded shuffle of stateless batches");
    cmd->add_option("--amplitude", opt.synth_shape.amplitude, "Synthetic clear-sky peak, W/m^2");
    cmd->add_option("--noise", opt.synth_shape.noise_sd, "Synthetic GHI noise sd, W/m^2");
    cmd->add_option("--drift", opt.synth_shape.drift_amp, "Synthetic seasonal drift, W/m^2");
    cmd->add_option("--cloud-strength", opt.synth_shape.cloud_strength,
                    "Synthetic cloud attenuation fraction");
    if (with_mode) {
        cmd->add_option("--mode", opt.mode, "stateless or stateful");
    }
}

void resolve_datasets(CliOptions& opt) {
    for (const auto& s : opt.file_specs) {
        auto f = split_csv(s, 3);
        if (f.size() != 3 || f[0].empty() || f[1].empty() || f[2].empty()) {
            throw sgru::UsageError("--dataset expects Region,Month,path; got '" + s + "'");
        }
        sgru::DatasetSpec d;
        d.kind = sgru::DatasetSpec::Kind::kFile;
        d.region = f[0];
        d.month = f[1];
        d.path = f[2];
        opt.run.datasets.push_back(std::move(d));
    }
    for (const auto& s : opt.synth_specs) {
        auto f = split_csv(s, 3);
        if (f.size() != 3 || f[0].empty() || f[1].empty() || f[2].empty()) {
            throw sgru::UsageError("--synth expects Region,Month,days; got '" + s + "'");
        }
        sgru::DatasetSpec d;
        d.kind = sgru::DatasetSpec::Kind::kSynth;
        d.region = f[0];
        d.month = f[1];
        d.synth = opt.synth_shape;
        try {
            d.synth.days = std::stoi(f[2]);
        } catch (const std::exception&) {
            throw sgru::UsageError("--synth days must be an integer; got '" + f[2] + "'");
        }
        if (int m = month_number(d.month); m != 0) d.synth.start_month = m;
        d.synth.seed = sgru::RandomSource::derive(sgru::cell_seed(opt.run.seed, d.region, d.month),
                                                  sgru::fnv1a64("synth"));
        opt.run.datasets.push_back(std::move(d));
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stacked GRU forecasting toolkit for hourly GHI"};
    app.require_subcommand(1);
    app.set_config("--config", "",
                   "Key-value config file ([train]/[compare]/[evaluate] sections); flags win");

    CliOptions train_opt, compare_opt, eval_opt;
    sgru::SynthConfig synth_cfg;
    std::string synth_out, synth_start, eval_model;

    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic canonical CSV dataset");
    synth->add_option("--out", synth_out, "Output CSV path")->required();
    synth->add_option("--days", synth_cfg.days, "Days to generate (>= 2)");
    synth->add_option("--seed", synth_cfg.seed, "Generator seed");
    synth->add_option("--amplitude", synth_cfg.amplitude, "Clear-sky midday peak, W/m^2");
    synth->add_option("--noise", synth_cfg.noise_sd, "GHI noise sd, W/m^2");
    synth->add_option("--drift", synth_cfg.drift_amp, "Seasonal drift amplitude, W/m^2");
    synth->add_option("--cloud-strength", synth_cfg.cloud_strength, "Cloud attenuation fraction");
    synth->add_option("--cloud-tau", synth_cfg.cloud_tau_hours, "Cloud regime correlation, hours");
    synth->add_option("--start", synth_start, "Start date YYYY-MM-DD (default 2021-01-01)");

    CLI::App* train = app.add_subcommand("train", "Train one mode over the configured datasets");
    add_train_options(train, train_opt, true);

    CLI::App* compare =
        app.add_subcommand("compare", "Train both modes and emit the comparison table");
    add_train_options(compare, compare_opt, false);

    CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint on a dataset");
    add_train_options(evaluate, eval_opt, true, /*out_required=*/false);
    evaluate->add_option("--model", eval_model, "Checkpoint path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help / --version
        app.exit(e);
        return 2;
    }

    try {
        if (*synth) {
            if (!synth_start.empty()) {
                int y, m, d;
                if (std::sscanf(synth_start.c_str(), "%d-%d-%d", &y, &m, &d) != 3) {
                    throw sgru::UsageError("--start expects YYYY-MM-DD; got '" + synth_start + "'");
                }
                synth_cfg.start_year = y;
                synth_cfg.start_month = m;
                synth_cfg.start_day = d;
            }
            sgru::TimeSeriesTable table = sgru::synth_dataset(synth_cfg);
            sgru::write_canonical_csv_file(table, synth_out);
            std::cout << "wrote " << table.rows.size() << " rows to " << synth_out << "\n";
        } else if (*train) {
            train_opt.run.train.mode = sgru::mode_from_name(train_opt.mode);
            resolve_datasets(train_opt);
            sgru::run_train(train_opt.run, std::cout);
        } else if (*compare) {
            resolve_datasets(compare_opt);
            sgru::run_compare(compare_opt.run, std::cout);
        } else if (*evaluate) {
            eval_opt.run.train.mode = sgru::mode_from_name(eval_opt.mode);
            resolve_datasets(eval_opt);
            sgru::run_evaluate(eval_opt.run, eval_model, std::cout);
        }
    } catch (const sgru::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const sgru::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const sgru::DataQualityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
