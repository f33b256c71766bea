#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(REFMINE_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("refmine_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    static int& counter() {
        static int n = 0;
        return n;
    }
};

const char* kCarPosts =
    "Honda civic is cool\n"
    "Look at cheap Honda civic\n"
    "Honda accord rules\n"
    "A Honda accord 4 u!\n";

}  // namespace

TEST_CASE("mine noseed writes the standard artifacts") {
    TempDir dir;
    write_file(dir.path / "posts.txt", kCarPosts);
    int code = run_cli("mine --mode noseed --posts " + (dir.path / "posts.txt").string() +
                       " --out-dir " + (dir.path / "out").string());
    CHECK(code == 0);
    for (const char* name : {"refset.csv", "refset.jsonl", "forest.txt", "config.json"}) {
        CHECK(fs::exists(dir.path / "out" / name));
    }
    std::string csv = read_file(dir.path / "out" / "refset.csv");
    CHECK(csv.starts_with("attribute0,"));
    CHECK(csv.find("honda") != std::string::npos);
}

TEST_CASE("mine seed restricts roots to the seed list") {
    TempDir dir;
    write_file(dir.path / "posts.txt", kCarPosts);
    write_file(dir.path / "seeds.txt", "Honda\n");
    int code = run_cli("mine --mode seed --posts " + (dir.path / "posts.txt").string() +
                       " --seeds " + (dir.path / "seeds.txt").string() + " --out-dir " +
                       (dir.path / "out").string());
    CHECK(code == 0);
    std::string forest = read_file(dir.path / "out" / "forest.txt");
    CHECK(forest.starts_with("honda\n"));
    CHECK(forest.find("\nlook") == std::string::npos);
}

TEST_CASE("the config echo reproduces a run byte for byte") {
    TempDir dir;
    write_file(dir.path / "posts.txt", kCarPosts);
    REQUIRE(run_cli("mine --mode noseed --posts " + (dir.path / "posts.txt").string() +
                    " --out-dir " + (dir.path / "a").string()) == 0);
    REQUIRE(run_cli("mine --config " + (dir.path / "a" / "config.json").string() +
                    " --out-dir " + (dir.path / "b").string()) == 0);
    for (const char* name : {"refset.csv", "refset.jsonl", "forest.txt"}) {
        CHECK(read_file(dir.path / "a" / name) == read_file(dir.path / "b" / name));
    }
}

TEST_CASE("errors exit with code 1") {
    TempDir dir;
    write_file(dir.path / "posts.txt", kCarPosts);
    CHECK(run_cli("mine --mode noseed --posts /nonexistent/posts.txt --out-dir " +
                  (dir.path / "out").string()) == 1);
    CHECK(run_cli("mine --mode seed --posts " + (dir.path / "posts.txt").string() +
                  " --out-dir " + (dir.path / "out").string()) == 1);
    CHECK(run_cli("mine --mode bogus --posts " + (dir.path / "posts.txt").string() +
                  " --out-dir " + (dir.path / "out").string()) == 1);
}

TEST_CASE("lock mode on an exhausted stream exits 2 and writes a trace") {
    TempDir dir;
    std::ostringstream posts;
    for (int i = 0; i < 30; ++i) {
        posts << (i % 2 ? "honda civic dx\n" : "honda accord lx\n");
    }
    write_file(dir.path / "posts.txt", posts.str());
    int code = run_cli("mine --mode lock --posts " + (dir.path / "posts.txt").string() +
                       " --batch-start 10 --batch-step 10 --out-dir " +
                       (dir.path / "out").string());
    CHECK(code == 2);
    CHECK(fs::exists(dir.path / "out" / "lock_trace.jsonl"));
    std::string trace = read_file(dir.path / "out" / "lock_trace.jsonl");
    CHECK(trace.find("\"lockedNow\":true") != std::string::npos);
}

TEST_CASE("eval writes report files and honors column names") {
    TempDir dir;
    write_file(dir.path / "refset.csv",
               "attribute0,attribute1\nhonda,accord\nhonda,civic\n");
    write_file(dir.path / "gold.jsonl",
               R"({"id": "1", "text": "honda civic", "labels": {"0": [[0, 1]], "1": [[1, 2]]}})"
               "\n");
    write_file(dir.path / "names.txt", "make\nmodel\n");
    int code = run_cli("eval --refset " + (dir.path / "refset.csv").string() + " --gold " +
                       (dir.path / "gold.jsonl").string() + " --column-names " +
                       (dir.path / "names.txt").string() + " --out-dir " +
                       (dir.path / "out").string());
    CHECK(code == 0);
    std::string report = read_file(dir.path / "out" / "report.csv");
    CHECK(report == "column,expected,attempted,correct,recall,precision,f1\n"
                    "make,1,1,1,1.000000,1.000000,1.000000\n"
                    "model,1,1,1,1.000000,1.000000,1.000000\n");
    CHECK(fs::exists(dir.path / "out" / "report.txt"));
}

TEST_CASE("eval with a gold refset reports column homogeneity") {
    TempDir dir;
    write_file(dir.path / "refset.csv", "attribute0,attribute1\nhonda,civic\n");
    write_file(dir.path / "gold_refset.csv", "attribute0,attribute1\nhonda,civic\n");
    write_file(dir.path / "gold.jsonl",
               R"({"id": "1", "text": "honda civic", "labels": {"0": [[0, 1]]}})" "\n");
    int code = run_cli("eval --refset " + (dir.path / "refset.csv").string() + " --gold " +
                       (dir.path / "gold.jsonl").string() + " --gold-refset " +
                       (dir.path / "gold_refset.csv").string() + " --out-dir " +
                       (dir.path / "out").string());
    CHECK(code == 0);
    CHECK(read_file(dir.path / "out" / "homogeneity.txt") ==
          "column misplacement: 0.000000\n");
}
