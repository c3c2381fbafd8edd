#include <cstdlib>
#include <fstream>
#include <iterator>
#include <string>

#include <gtest/gtest.h>

#include "latentedit/io.hpp"
#include "test_util.hpp"

using namespace latentedit;
using testutil::TempDir;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(LATENTEDIT_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

const char* kTrainSmall = " --variant C --epochs 2 --hidden 16 --layers 3 --batch 64 --alpha 1 --beta 1 --lr 1e-3 --quiet";

void prepare(const TempDir& dir) {
    ASSERT_EQ(run("gen-data --out " + q(dir / "data") + " --m 12 --K 2 --q 3 --n 600 --seed 4"), 0);
    ASSERT_EQ(run("fit --data " + q(dir / "data") + " --model " + q(dir / "model") + " --d 6"), 0);
}

}  // namespace

TEST(Cli, EndToEnd) {
    TempDir dir;
    prepare(dir);
    EXPECT_TRUE(std::filesystem::exists(dir / "data" / "latents.npy"));
    EXPECT_EQ(npy::read_matrix(dir / "data" / "attrs.npy").cols(), 2);

    ASSERT_EQ(run("train --data " + q(dir / "data") + " --model " + q(dir / "model") + kTrainSmall), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "model" / "loss_history.csv"));

    npy::write_matrix(npy::read_matrix(dir / "data" / "latents.npy").topRows(100), dir / "batch.npy");
    ASSERT_EQ(run("edit --model " + q(dir / "model") + " --in " + q(dir / "batch.npy") + " --out " + q(dir / "edited.npy") +
                  " --k 1 --target 1.5"),
              0);
    const Matrix edited = npy::read_matrix(dir / "edited.npy");
    EXPECT_EQ(edited.rows(), 100);
    EXPECT_EQ(edited.cols(), 12);

    ASSERT_EQ(run("evaluate --model " + q(dir / "model") + " --data " + q(dir / "data") + " --out " + q(dir / "report.json") +
                  " --csv " + q(dir / "mat.csv") + " --n 32"),
              0);
    const io::Json report = io::read_json(dir / "report.json");
    EXPECT_EQ(report["schema"], "latentedit.report");
    EXPECT_EQ(report["methods"].size(), 2u);
    EXPECT_EQ(report["protocol"]["n"], 32);
    EXPECT_TRUE(report.contains("config"));
    EXPECT_FALSE(slurp(dir / "mat.csv").empty());
}

TEST(Cli, NoTargetReturnsReconstruction) {
    TempDir dir;
    prepare(dir);
    ASSERT_EQ(run("train --data " + q(dir / "data") + " --model " + q(dir / "model") + kTrainSmall), 0);
    npy::write_matrix(npy::read_matrix(dir / "data" / "latents.npy").topRows(10), dir / "in.npy");
    ASSERT_EQ(run("edit --model " + q(dir / "model") + " --in " + q(dir / "in.npy") + " --out " + q(dir / "plain.npy")), 0);

    EditPipeline p{io::load_pca(dir / "model"), io::load_transform(dir / "model"), io::load_model(dir / "model")};
    const Matrix in = npy::read_matrix(dir / "in.npy");
    const Matrix out = npy::read_matrix(dir / "plain.npy");
    for (Index i = 0; i < in.rows(); ++i)
        EXPECT_EQ(out.row(i).transpose(), decode(p, encode(p, in.row(i).transpose())));
}

TEST(Cli, DeterministicRuns) {
    TempDir a("_a"), b("_b");
    for (const TempDir* d : {&a, &b}) {
        prepare(*d);
        ASSERT_EQ(run("train --data " + q(*d / "data") + " --model " + q(*d / "model") + kTrainSmall + " --seed 3"), 0);
    }
    for (const char* f : {"latents.npy", "attrs.npy"}) EXPECT_EQ(slurp(a / "data" / f), slurp(b / "data" / f));
    for (const char* f : {"pca_basis.npy", "attr_table.npy", "encoder_0_weight.npy", "decoder_2_bias.npy", "loss_history.csv"})
        EXPECT_EQ(slurp(a / "model" / f), slurp(b / "model" / f)) << f;
}

TEST(Cli, DefaultHyperparametersWhenUnset) {
    TempDir dir;
    prepare(dir);
    ASSERT_EQ(run("train --data " + q(dir / "data") + " --model " + q(dir / "model") +
                  " --epochs 1 --hidden 16 --layers 2 --batch 64 --quiet"),
              0);
    const io::Json j = io::read_json(dir / "model" / "model.json");
    EXPECT_EQ(j["train_config"]["alpha"], 1e-5);
    EXPECT_EQ(j["train_config"]["beta"], 1e-5);
    EXPECT_EQ(j["corr_mode"], "identity");

    ASSERT_EQ(run("train --data " + q(dir / "data") + " --model " + q(dir / "model") +
                  " --variant A --epochs 1 --hidden 16 --layers 2 --batch 64 --quiet --force"),
              0);
    EXPECT_TRUE(io::read_json(dir / "model" / "model.json")["gamma_ref"].is_null());
}

TEST(Cli, ConfigFile) {
    TempDir dir;
    prepare(dir);
    std::ofstream(dir / "cfg.json") << R"({"train": {"epochs": 1, "hidden": 16, "layers": 2, "batch": 64, "variant": "B", "quiet": true}})";
    ASSERT_EQ(run("--config " + q(dir / "cfg.json") + " train --data " + q(dir / "data") + " --model " + q(dir / "model")), 0);
    const io::Json j = io::read_json(dir / "model" / "model.json");
    EXPECT_EQ(j["corr_mode"], "database");
    EXPECT_EQ(j["train_config"]["epochs"], 1);
}

TEST(Cli, ExitCodes) {
    TempDir dir;
    prepare(dir);
    // configuration errors
    EXPECT_EQ(run("fit --data " + q(dir / "data") + " --model " + q(dir / "model2") + " --d 40"), 2);
    EXPECT_EQ(run("gen-data --out " + q(dir / "data") + " --n 10"), 2);  // exists, no --force
    EXPECT_EQ(run("train --data " + q(dir / "data") + " --model " + q(dir / "model") + " --variant Z"), 2);
    EXPECT_EQ(run("train --data " + q(dir / "data") + " --model " + q(dir / "model") + " --batch 8 --epochs 1 --quiet"), 2);
    EXPECT_EQ(run("no-such-command"), 2);
    // data errors
    EXPECT_EQ(run("fit --data " + q(dir / "missing") + " --model " + q(dir / "model3")), 3);
    ASSERT_EQ(run("train --data " + q(dir / "data") + " --model " + q(dir / "model") + kTrainSmall), 0);
    npy::write_matrix(Matrix::Zero(3, 7), dir / "wrong.npy");
    EXPECT_EQ(run("edit --model " + q(dir / "model") + " --in " + q(dir / "wrong.npy") + " --out " + q(dir / "o.npy")), 3);
    npy::write_matrix(Matrix::Zero(3, 12), dir / "ok.npy");
    EXPECT_EQ(run("edit --model " + q(dir / "model") + " --in " + q(dir / "ok.npy") + " --out " + q(dir / "o.npy") +
                  " --k 5 --target 1"),
              2);
}
