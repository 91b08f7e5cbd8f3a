// Regression of the figure datasets against subsampled golden CSVs in
// tests/golden. Set HEATWORK_UPDATE_GOLDEN=1 to rewrite them.
#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "heatwork/run.hpp"

using namespace heatwork;
namespace fs = std::filesystem;

namespace {

constexpr std::size_t kRows = 400;  // golden rows per dataset

struct Table {
    std::string header;
    std::vector<std::size_t> lines;  // data row index in the full file
    std::vector<std::vector<double>> rows;
};

std::vector<double> split(const std::string& s) {
    std::vector<double> out;
    std::stringstream ss(s);
    for (std::string cell; std::getline(ss, cell, ',');) out.push_back(std::stod(cell));
    return out;
}

// Every k-th data row of a generated CSV, always including the last one.
Table subsample(const fs::path& file) {
    std::ifstream in(file);
    std::string line;
    std::vector<std::string> data;
    Table t;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (t.header.empty()) {
            t.header = line;
            continue;
        }
        data.push_back(line);
    }
    const std::size_t step = std::max<std::size_t>(1, data.size() / kRows);
    for (std::size_t i = 0; i < data.size(); i += step) {
        t.lines.push_back(i);
        t.rows.push_back(split(data[i]));
    }
    if (t.lines.back() != data.size() - 1) {
        t.lines.push_back(data.size() - 1);
        t.rows.push_back(split(data.back()));
    }
    return t;
}

void write_golden(const fs::path& file, const Table& t) {
    std::ofstream os(file);
    os.precision(17);
    os << "row," << t.header << '\n';
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        os << t.lines[i];
        for (double v : t.rows[i]) os << ',' << v;
        os << '\n';
    }
}

Table read_golden(const fs::path& file) {
    std::ifstream in(file);
    Table t;
    std::string line;
    std::getline(in, line);
    t.header = line.substr(line.find(',') + 1);
    while (std::getline(in, line)) {
        auto v = split(line);
        t.lines.push_back(static_cast<std::size_t>(v.front()));
        t.rows.emplace_back(v.begin() + 1, v.end());
    }
    return t;
}

void check_figure(const std::string& name) {
    const fs::path golden_dir = fs::path(HEATWORK_SOURCE_DIR) / "tests" / "golden";
    const fs::path out = fs::temp_directory_path() / ("heatwork_golden_" + name);
    fs::remove_all(out);
    RunConfig c = preset(name);
    c.out = out.string();
    const RunResult r = run_figure(c, name);
    const bool update = std::getenv("HEATWORK_UPDATE_GOLDEN") != nullptr;
    int compared = 0;
    for (const auto& file : r.files) {
        if (fs::path(file).extension() != ".csv") continue;
        const Table now = subsample(file);
        const fs::path golden = golden_dir / fs::path(file).filename();
        if (update) {
            fs::create_directories(golden_dir);
            write_golden(golden, now);
            continue;
        }
        ASSERT_TRUE(fs::exists(golden)) << golden;
        const Table ref = read_golden(golden);
        EXPECT_EQ(now.header, ref.header) << golden;
        ASSERT_EQ(now.lines, ref.lines) << golden;
        for (std::size_t i = 0; i < ref.rows.size(); ++i) {
            ASSERT_EQ(now.rows[i].size(), ref.rows[i].size());
            for (std::size_t k = 0; k < ref.rows[i].size(); ++k)
                EXPECT_NEAR(now.rows[i][k], ref.rows[i][k], 1e-8)
                    << golden.filename() << " row " << ref.lines[i] << " column " << k;
        }
        ++compared;
    }
    if (!update) EXPECT_GT(compared, 0);
    fs::remove_all(out);
}

}  // namespace

TEST(Golden, Fig2a) { check_figure("fig2a"); }
TEST(Golden, Fig2c) { check_figure("fig2c"); }
TEST(Golden, Fig3) { check_figure("fig3"); }
TEST(Golden, Fig4) { check_figure("fig4"); }
