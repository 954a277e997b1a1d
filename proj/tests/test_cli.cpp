#include "commands.hpp"
#include "pinn/baselines.hpp"
#include "pinn/config.hpp"
#include "pinn/error.hpp"
#include "pinn/trainer.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace pinn;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args)
{
    std::ostringstream out;
    std::ostringstream err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string tiny_config(const fs::path& out_dir, const std::string& style = "european_call",
                        const std::string& sigma_line = "\"sigma\": 0.2,")
{
    return R"({
  "option": {"style": ")" + style + R"(", "strike": 40, "rate": 0.05, )" + sigma_line + R"( "maturity": 1, "s_min": 0, "s_max": 160},
  "network": {"width": 6, "deep_layers": 2, "shallow_layers": 1, "seed": 3},
  "train": {"epochs": 6, "learning_rate": 0.001, "seed": 1},
  "sampler": {"n_interior": 40, "n_boundary": 8, "n_terminal": 16, "seed": 2},
  "output_dir": ")" + out_dir.string() + R"("
})";
}

fs::path write_config(const fs::path& dir, const std::string& text)
{
    const auto path = dir / "run.json";
    testing_support::write_file(path, text);
    return path;
}

std::vector<std::vector<double>> read_rows(const fs::path& p)
{
    std::istringstream in(testing_support::slurp(p));
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::vector<double> row;
        std::istringstream cells(line);
        std::string c;
        while (std::getline(cells, c, ',')) {
            row.push_back(std::stod(c));
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace

TEST(Config, ParsesFullFileWithDefaults)
{
    const RunConfig c = parse_run_config(tiny_config("o"));
    EXPECT_EQ(c.option.style, OptionStyle::EuropeanCall);
    EXPECT_EQ(c.network.width, 6);
    EXPECT_EQ(c.network.s_shift, 40.0);
    EXPECT_EQ(c.network.s_scale, 40.0);
    EXPECT_EQ(c.network.t_scale, 1.0);
    EXPECT_EQ(c.network.output_scale, 40.0);
    EXPECT_EQ(c.train.sampler.n_interior, 40);
    EXPECT_EQ(c.output_dir, "o");
    const RunConfig again = parse_run_config(to_json(c));
    EXPECT_EQ(to_json(again), to_json(c));
}

TEST(Config, MissingSigmaNamesTheField)
{
    try {
        parse_run_config(tiny_config("o", "european_call", ""));
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_NE(std::string(e.what()).find("option.sigma"), std::string::npos) << e.what();
    }
}

TEST(Config, OverridesAndUnknownKeys)
{
    const RunConfig c = parse_run_config(tiny_config("o"), {"train.epochs=9", "option.style=american_put"});
    EXPECT_EQ(c.train.epochs, 9);
    EXPECT_EQ(c.option.style, OptionStyle::AmericanPut);
    EXPECT_THROW(parse_run_config(tiny_config("o"), {"train.epoch=9"}), ConfigError);
    EXPECT_THROW(parse_run_config(tiny_config("o"), {"noequals"}), ConfigError);
    EXPECT_THROW(parse_run_config(tiny_config("o"), {"option.sigma=-1"}), ConfigError);
    EXPECT_THROW(parse_run_config("{not json"), ConfigError);
}

TEST(Cli, UsageErrors)
{
    EXPECT_EQ(invoke({}).code, cli::Usage);
    EXPECT_EQ(invoke({"frobnicate"}).code, cli::Usage);
    EXPECT_EQ(invoke({"train"}).code, cli::Usage);
    EXPECT_EQ(invoke({"--help"}).code, cli::Ok);
}

TEST(Cli, MissingSigmaExitsWithConfigError)
{
    const auto dir = testing_support::scratch_dir("cli_missing_sigma");
    const auto cfg = write_config(dir, tiny_config(dir / "out", "european_call", ""));
    const Outcome r = invoke({"train", "--config", cfg.string()});
    EXPECT_EQ(r.code, cli::Usage);
    EXPECT_NE(r.err.find("sigma"), std::string::npos) << r.err;
    EXPECT_FALSE(fs::exists(dir / "out" / "checkpoint.txt"));
}

TEST(Cli, TrainWritesArtifactsAndIsDeterministic)
{
    const auto dir = testing_support::scratch_dir("cli_train");
    const auto a = dir / "a";
    const auto b = dir / "b";
    testing_support::write_file(dir / "a.json", tiny_config(a));
    testing_support::write_file(dir / "b.json", tiny_config(b));
    ASSERT_EQ(invoke({"train", "--config", (dir / "a.json").string(), "--log-every", "0"}).code, cli::Ok);
    ASSERT_EQ(invoke({"train", "--config", (dir / "b.json").string(), "--log-every", "0"}).code, cli::Ok);
    for (const char* f : {"checkpoint.txt", "curve.csv", "timing.csv", "config.json"}) {
        EXPECT_TRUE(fs::exists(a / f)) << f;
    }
    EXPECT_EQ(testing_support::slurp(a / "curve.csv"), testing_support::slurp(b / "curve.csv"));
    EXPECT_EQ(testing_support::slurp(a / "checkpoint.txt"), testing_support::slurp(b / "checkpoint.txt"));
    EXPECT_EQ(read_rows(a / "curve.csv").size(), 6u);
}

TEST(Cli, ResumeContinuesEpochNumbering)
{
    const auto dir = testing_support::scratch_dir("cli_resume");
    const auto cfg = write_config(dir, tiny_config(dir / "out"));
    ASSERT_EQ(invoke({"train", "--config", cfg.string(), "--log-every", "0"}).code, cli::Ok);
    fs::copy_file(dir / "out" / "checkpoint.txt", dir / "six.txt");
    const Outcome r = invoke({"train", "--config", cfg.string(), "--set", "train.epochs=10", "--resume",
                       (dir / "six.txt").string(), "--log-every", "0"});
    ASSERT_EQ(r.code, cli::Ok) << r.err;
    const auto rows = read_rows(dir / "out" / "curve.csv");
    ASSERT_EQ(rows.size(), 4u);
    EXPECT_EQ(rows.front()[0], 7.0);
    EXPECT_EQ(rows.back()[0], 10.0);
    EXPECT_EQ(invoke({"train", "--config", cfg.string(), "--set", "network.width=7", "--resume",
                   (dir / "six.txt").string()})
                  .code,
              cli::Usage);
}

TEST(Cli, DivergenceExitsNumerical)
{
    const auto dir = testing_support::scratch_dir("cli_diverge");
    const auto cfg = write_config(dir, tiny_config(dir / "out"));
    EXPECT_EQ(invoke({"train", "--config", cfg.string(), "--set", "train.learning_rate=1e200"}).code, cli::Numerical);
}

TEST(Cli, SurfaceOnTwoByTwoGrid)
{
    const auto dir = testing_support::scratch_dir("cli_surface");
    const auto cfg = write_config(dir, tiny_config(dir / "out"));
    ASSERT_EQ(invoke({"train", "--config", cfg.string(), "--log-every", "0"}).code, cli::Ok);
    const auto ck = (dir / "out" / "checkpoint.txt").string();
    const Outcome r = invoke({"surface", "--checkpoint", ck, "--output-dir", (dir / "s").string(), "--s-points", "2",
                       "--t-points", "2"});
    ASSERT_EQ(r.code, cli::Ok) << r.err;
    const auto header = testing_support::slurp(dir / "s" / "surface.csv");
    EXPECT_EQ(header.substr(0, header.find('\n')), "S,t,V,delta,gamma,theta");
    const auto rows = read_rows(dir / "s" / "surface.csv");
    ASSERT_EQ(rows.size(), 4u);
    const Checkpoint loaded = load_checkpoint(ck);
    for (const auto& row : rows) {
        EXPECT_TRUE(row[0] == 0.0 || row[0] == 160.0);
        EXPECT_TRUE(row[1] == 0.0 || row[1] == 1.0);
        EXPECT_EQ(row[2], evaluate(loaded.state.params, row[0], row[1]));
    }
    EXPECT_EQ(invoke({"surface", "--checkpoint", (dir / "nope.txt").string()}).code, cli::Usage);
}

TEST(Cli, BenchMethodsWriteSurfaceAndConvergence)
{
    const auto dir = testing_support::scratch_dir("cli_bench");
    const auto cfg = write_config(dir, tiny_config(dir / "out"));
    const auto out = (dir / "b").string();
    ASSERT_EQ(invoke({"bench", "--config", cfg.string(), "--method", "closed_form", "--output-dir", out}).code, cli::Ok);
    ASSERT_EQ(invoke({"bench", "--config", cfg.string(), "--method", "mc", "--resolution", "2000", "--output-dir", out,
                   "--s-points", "3", "--t-points", "3"})
                  .code,
              cli::Ok);
    EXPECT_TRUE(fs::exists(dir / "b" / "bench_closed_form.csv"));
    EXPECT_TRUE(fs::exists(dir / "b" / "convergence_mc.csv"));
    const auto cf = read_surface_csv((dir / "b" / "bench_closed_form.csv").string());
    EXPECT_EQ(cf.interpolate(160.0, 1.0), 120.0);

    // A call config is not a put: tree and mesh reject it with a config-level error.
    EXPECT_EQ(invoke({"bench", "--config", cfg.string(), "--method", "binomial", "--output-dir", out}).code, cli::Usage);
    const Outcome put = invoke({"bench", "--config", cfg.string(), "--set", "option.style=american_put", "--method", "fdm",
                         "--resolution", "60", "--output-dir", out});
    ASSERT_EQ(put.code, cli::Ok) << put.err;
    const auto fdm = read_surface_csv((dir / "b" / "bench_fdm.csv").string());
    EXPECT_NEAR(fdm.interpolate(0.0, 0.0), 40.0, 1e-12);
    EXPECT_EQ(invoke({"bench", "--config", cfg.string(), "--method", "wavelet"}).code, cli::Usage);
}

TEST(Cli, BoundaryFromSurfaceCsv)
{
    const auto dir = testing_support::scratch_dir("cli_boundary");
    OptionSpec put;
    put.style = OptionStyle::AmericanPut;
    const auto surf = binomial_put(put, 400, linspace(0.0, 160.0, 81), linspace(0.0, 1.0, 11));
    write_surface_csv((dir / "s.csv").string(), surf);
    const Outcome r = invoke({"boundary", "--surface", (dir / "s.csv").string(), "--strike", "40", "--output-dir",
                       (dir / "o").string()});
    ASSERT_EQ(r.code, cli::Ok) << r.err;
    const auto text = testing_support::slurp(dir / "o" / "boundary.csv");
    EXPECT_EQ(text.substr(0, text.find('\n')), "t,S_f");
    const auto rows = read_rows(dir / "o" / "boundary.csv");
    const auto expected = extract_boundary(surf, 40.0);
    ASSERT_EQ(rows.size(), expected.times.size());
    for (std::size_t j = 0; j < rows.size(); ++j) {
        EXPECT_EQ(rows[j][1], expected.spots[j]);
    }
    testing_support::write_file(dir / "bad.csv", "S,t,V\n0,0,x\n");
    EXPECT_EQ(invoke({"boundary", "--surface", (dir / "bad.csv").string(), "--strike", "40", "--output-dir",
                   (dir / "o").string()})
                  .code,
              cli::Data);
}

TEST(Cli, EvalMarketOnSyntheticQuotes)
{
    const auto dir = testing_support::scratch_dir("cli_eval");
    const auto cfg = write_config(dir, tiny_config(dir / "out", "american_put"));
    ASSERT_EQ(invoke({"train", "--config", cfg.string(), "--log-every", "0"}).code, cli::Ok);
    ASSERT_EQ(invoke({"synth-quotes", "--config", cfg.string(), "--n", "12", "--steps", "100", "--output-dir",
                   (dir / "q").string()})
                  .code,
              cli::Ok);
    const auto quotes = (dir / "q" / "synthetic_quotes.csv").string();
    const Outcome r = invoke({"eval-market", "--checkpoint", (dir / "out" / "checkpoint.txt").string(), "--quotes", quotes,
                       "--yields", testing_support::source_path("data/yields_sample.csv"), "--binomial-steps", "100",
                       "--output-dir", (dir / "e").string()});
    ASSERT_EQ(r.code, cli::Ok) << r.err;
    const auto report = testing_support::slurp(dir / "e" / "eval_report.csv");
    EXPECT_NE(report.find("rmse_pinn,"), std::string::npos);
    EXPECT_NE(report.find("n_quotes,12"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "e" / "eval_report.txt"));

    testing_support::write_file(dir / "bad.csv", "date,bid\n");
    EXPECT_EQ(invoke({"eval-market", "--checkpoint", (dir / "out" / "checkpoint.txt").string(), "--quotes",
                   (dir / "bad.csv").string(), "--output-dir", (dir / "e").string()})
                  .code,
              cli::Data);
}
