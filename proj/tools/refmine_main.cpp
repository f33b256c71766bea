#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "refmine/extract_eval.hpp"
#include "refmine/miner.hpp"

namespace fs = std::filesystem;
using namespace refmine;

namespace {

struct RunConfig {
    std::string mode;  // seed | noseed | lock
    std::string postsPath;
    std::string seedsPath;
    std::string goldPath;
    std::string goldRefsetPath;
    std::string refsetPath;
    std::string stoplistPath;
    std::string columnNamesPath;
    std::string outDir = ".";
    double threshold = 0.75;
    std::size_t minCooccur = 1;
    std::size_t batchStart = 200;
    std::size_t batchStep = 200;
    unsigned threads = 1;
    bool singlePass = false;
};

Corpus load_posts(const RunConfig& cfg) {
    std::set<std::string> stoplist;
    const std::set<std::string>* stop = nullptr;
    if (!cfg.stoplistPath.empty()) {
        stoplist = load_stoplist(cfg.stoplistPath);
        stop = &stoplist;
    }
    if (cfg.postsPath.ends_with(".jsonl") || cfg.postsPath.ends_with(".ndjson")) {
        return load_posts_jsonl(cfg.postsPath, stop);
    }
    return load_posts_text(cfg.postsPath, stop);
}

std::optional<std::vector<std::string>> load_column_names(const std::string& path) {
    if (path.empty()) return std::nullopt;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open column-names file: " + path);
    std::vector<std::string> names;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        names.push_back(line);
    }
    return names;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << content;
}

void echo_config(const RunConfig& cfg, const fs::path& outDir) {
    nlohmann::ordered_json j;
    j["mode"] = cfg.mode;
    j["posts"] = cfg.postsPath;
    j["seeds"] = cfg.seedsPath;
    j["stoplist"] = cfg.stoplistPath;
    j["columnNames"] = cfg.columnNamesPath;
    j["threshold"] = cfg.threshold;
    j["minCooccur"] = cfg.minCooccur;
    j["batchStart"] = cfg.batchStart;
    j["batchStep"] = cfg.batchStep;
    j["threads"] = cfg.threads;
    j["singlePass"] = cfg.singlePass;
    write_file(outDir / "config.json", j.dump(2) + "\n");
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.contains("mode")) cfg.mode = j["mode"].get<std::string>();
    if (j.contains("posts")) cfg.postsPath = j["posts"].get<std::string>();
    if (j.contains("seeds")) cfg.seedsPath = j["seeds"].get<std::string>();
    if (j.contains("stoplist")) cfg.stoplistPath = j["stoplist"].get<std::string>();
    if (j.contains("columnNames")) cfg.columnNamesPath = j["columnNames"].get<std::string>();
    if (j.contains("threshold")) cfg.threshold = j["threshold"].get<double>();
    if (j.contains("minCooccur")) cfg.minCooccur = j["minCooccur"].get<std::size_t>();
    if (j.contains("batchStart")) cfg.batchStart = j["batchStart"].get<std::size_t>();
    if (j.contains("batchStep")) cfg.batchStep = j["batchStep"].get<std::size_t>();
    if (j.contains("threads")) cfg.threads = j["threads"].get<unsigned>();
    if (j.contains("singlePass")) cfg.singlePass = j["singlePass"].get<bool>();
}

int run_mine(RunConfig& cfg) {
    if (cfg.mode != "seed" && cfg.mode != "noseed" && cfg.mode != "lock") {
        throw std::runtime_error("unknown mode '" + cfg.mode + "' (use seed|noseed|lock)");
    }
    if (cfg.mode == "seed" && cfg.seedsPath.empty()) {
        throw std::runtime_error("seed mode requires --seeds");
    }
    if (cfg.mode == "lock" && (cfg.batchStart < 1 || cfg.batchStep < 1)) {
        throw std::runtime_error("lock mode requires --batch-start and --batch-step >= 1");
    }

    Corpus corpus = load_posts(cfg);
    if (corpus.empty() && cfg.mode != "lock") {
        throw std::runtime_error("empty corpus: " + cfg.postsPath);
    }
    auto columnNames = load_column_names(cfg.columnNamesPath);
    SubsumptionConfig scfg{cfg.threshold, cfg.minCooccur};

    fs::path outDir(cfg.outDir);
    fs::create_directories(outDir);
    echo_config(cfg, outDir);

    ReferenceSet refset;
    EntityForest forest;
    bool converged = true;
    std::size_t postsConsumed = corpus.size();

    if (cfg.mode == "seed") {
        SeedSet seeds{load_seeds(cfg.seedsPath)};
        if (seeds.seeds.empty()) throw std::runtime_error("seed file has no seeds");
        MineResult result = mine_seeded(corpus, seeds, scfg, cfg.threads, !cfg.singlePass);
        if (result.refset.tuples.empty()) {
            std::cerr << "warning: no seed rooted a tree\n";
        }
        forest = std::move(result.forest);
        refset = std::move(result.refset);
    } else if (cfg.mode == "noseed") {
        MineResult result = mine_unseeded(corpus, scfg, cfg.threads, !cfg.singlePass);
        forest = std::move(result.forest);
        refset = std::move(result.refset);
    } else {
        IlaResult result = ila_mine(corpus, cfg.batchStart, cfg.batchStep, scfg, cfg.threads);
        forest = std::move(result.forest);
        refset = std::move(result.refset);
        converged = result.converged;
        postsConsumed = result.postsConsumed;
        write_file(outDir / "lock_trace.jsonl", lock_trace_to_jsonl(result.trace));
    }

    const std::vector<std::string>* names = columnNames ? &*columnNames : nullptr;
    write_file(outDir / "refset.csv", refset_to_csv(refset, names));
    write_file(outDir / "refset.jsonl", refset_to_jsonl(refset, names));
    write_file(outDir / "forest.txt", forest_to_text(forest));

    std::cout << "tuples: " << refset.tuples.size() << "\n"
              << "columns: " << refset.columns << "\n"
              << "posts consumed: " << postsConsumed << "\n"
              << "converged: " << (converged ? "true" : "false") << "\n";
    return converged ? 0 : 2;
}

int run_eval(RunConfig& cfg) {
    auto gold = load_gold_jsonl(cfg.goldPath);
    if (gold.empty()) throw std::runtime_error("gold file has no posts: " + cfg.goldPath);

    std::ifstream in(cfg.refsetPath);
    if (!in) throw std::runtime_error("cannot open reference set: " + cfg.refsetPath);
    std::stringstream buf;
    buf << in.rdbuf();
    ReferenceSet refset = refset_from_csv(buf.str());

    auto columnNames = load_column_names(cfg.columnNamesPath);
    const std::vector<std::string>* names = columnNames ? &*columnNames : nullptr;

    EvalReport report = evaluate(gold, refset);
    fs::path outDir(cfg.outDir);
    fs::create_directories(outDir);
    write_file(outDir / "report.csv", report_to_csv(report, names));
    write_file(outDir / "report.txt", report_to_text(report, names));
    std::cout << report_to_text(report, names);

    if (!cfg.goldRefsetPath.empty()) {
        std::ifstream gin(cfg.goldRefsetPath);
        if (!gin) throw std::runtime_error("cannot open gold reference set: " + cfg.goldRefsetPath);
        std::stringstream gbuf;
        gbuf << gin.rdbuf();
        ReferenceSet goldRefset = refset_from_csv(gbuf.str());
        double misplaced = column_homogeneity(refset, goldRefset);
        char line[64];
        std::snprintf(line, sizeof line, "column misplacement: %.6f\n", misplaced);
        std::cout << line;
        write_file(outDir / "homogeneity.txt", line);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reference-set construction from short noisy posts"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string configPath;

    auto* mine = app.add_subcommand("mine", "construct a reference set from posts");
    mine->add_option("--config", configPath, "JSON config echo to rerun from");
    mine->add_option("--mode", cfg.mode, "seed | noseed | lock");
    mine->add_option("--posts", cfg.postsPath, "posts file (text lines or .jsonl)");
    mine->add_option("--seeds", cfg.seedsPath, "seed values, one per line");
    mine->add_option("--threshold", cfg.threshold, "subsumption threshold")
        ->default_val(0.75);
    mine->add_option("--min-cooccur", cfg.minCooccur, "minimum co-occurrence count")
        ->default_val(1);
    mine->add_option("--batch-start", cfg.batchStart, "lock mode: initial batch size")
        ->default_val(200);
    mine->add_option("--batch-step", cfg.batchStep, "lock mode: posts added per iteration")
        ->default_val(200);
    mine->add_option("--stoplist", cfg.stoplistPath, "optional stopword list");
    mine->add_option("--column-names", cfg.columnNamesPath, "relabel attribute0..K");
    mine->add_option("--out-dir", cfg.outDir, "output directory")->default_val(".");
    mine->add_option("--threads", cfg.threads, "worker threads (outputs unchanged)")
        ->default_val(1);
    mine->add_flag("--single-pass", cfg.singlePass,
                   "skip the general-token iteration");

    auto* eval = app.add_subcommand("eval", "score extraction against gold labels");
    eval->add_option("--refset", cfg.refsetPath, "reference set CSV")->required();
    eval->add_option("--gold", cfg.goldPath, "gold labels (.jsonl)")->required();
    eval->add_option("--gold-refset", cfg.goldRefsetPath,
                     "gold reference set CSV for column homogeneity");
    eval->add_option("--column-names", cfg.columnNamesPath, "relabel attribute0..K");
    eval->add_option("--out-dir", cfg.outDir, "output directory")->default_val(".");

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(mine)) {
            if (!configPath.empty()) {
                RunConfig fromFile;
                apply_config_file(fromFile, configPath);
                // explicit flags win over the config file
                if (!mine->count("--mode")) cfg.mode = fromFile.mode;
                if (!mine->count("--posts")) cfg.postsPath = fromFile.postsPath;
                if (!mine->count("--seeds")) cfg.seedsPath = fromFile.seedsPath;
                if (!mine->count("--stoplist")) cfg.stoplistPath = fromFile.stoplistPath;
                if (!mine->count("--column-names"))
                    cfg.columnNamesPath = fromFile.columnNamesPath;
                if (!mine->count("--threshold")) cfg.threshold = fromFile.threshold;
                if (!mine->count("--min-cooccur")) cfg.minCooccur = fromFile.minCooccur;
                if (!mine->count("--batch-start")) cfg.batchStart = fromFile.batchStart;
                if (!mine->count("--batch-step")) cfg.batchStep = fromFile.batchStep;
                if (!mine->count("--threads")) cfg.threads = fromFile.threads;
                if (!mine->count("--single-pass")) cfg.singlePass = fromFile.singlePass;
            }
            if (cfg.mode.empty()) throw std::runtime_error("--mode is required");
            if (cfg.postsPath.empty()) throw std::runtime_error("--posts is required");
            return run_mine(cfg);
        }
        return run_eval(cfg);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
