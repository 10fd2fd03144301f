#include <cmath>

#include <gtest/gtest.h>

#include <cbrl/io.hpp>
#include <cbrl/stats.hpp>

namespace cbrl {
namespace {

TEST(Csv, QuotesOnlyWhenNeeded) {
    io::CsvWriter csv({"a", "b"});
    csv.row({"plain", "with,comma"});
    csv.row({"say \"hi\"", "two\nlines"});
    EXPECT_EQ(csv.str(), "a,b\nplain,\"with,comma\"\n\"say \"\"hi\"\"\",\"two\nlines\"\n");
}

TEST(FormatNumber, ShortestRoundTrip) {
    for (double v : {0.1, 1.0 / 3.0, 1e-300, -2.5, 0.30000000000000004, 123456789.125}) {
        EXPECT_EQ(std::stod(io::format_number(v)), v);
    }
    EXPECT_EQ(io::format_number(0.1), "0.1");
    EXPECT_EQ(io::format_number(2.0), "2");
}

TEST(Sha256, KnownVectors) {
    EXPECT_EQ(io::sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    EXPECT_EQ(io::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Svg, HeatmapHasOneCellPerValue) {
    const std::vector<double> xs{0.1, 0.2, 0.3}, ys{0.5, 0.6};
    const std::vector<std::vector<double>> v{{0.0, 0.5, 1.0}, {0.2, 0.4, 0.6}};
    const auto svg = io::heatmap_svg(xs, ys, v, "t <&>", "x", "y");
    EXPECT_EQ(svg.rfind("<?xml", 0), 0u);
    EXPECT_NE(svg.find("version=\"1.1\""), std::string::npos);
    EXPECT_NE(svg.find("t &lt;&amp;&gt;"), std::string::npos);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
    std::size_t titles = 0;
    for (auto p = svg.find("<title>"); p != std::string::npos; p = svg.find("<title>", p + 1)) ++titles;
    EXPECT_EQ(titles, 6u);
}

TEST(Stats, RanksAverageTies) {
    const std::vector<double> xs{10.0, 20.0, 10.0, 30.0};
    EXPECT_EQ(stats::ranks(xs), (std::vector<double>{1.5, 3.0, 1.5, 4.0}));
}

TEST(Stats, CorrelationExamples) {
    const std::vector<double> x{1, 2, 3, 4, 5};
    const std::vector<double> up{2, 4, 6, 8, 10};
    const std::vector<double> mono{1, 8, 27, 64, 125};
    const std::vector<double> down{5, 4, 3, 2, 1};
    EXPECT_NEAR(stats::pearson(x, up), 1.0, 1e-15);
    EXPECT_NEAR(stats::spearman(x, mono), 1.0, 1e-15);
    EXPECT_LT(stats::pearson(x, mono), 1.0);
    EXPECT_NEAR(stats::spearman(x, down), -1.0, 1e-15);
    EXPECT_DOUBLE_EQ(stats::mean(x), 3.0);
}

}  // namespace
}  // namespace cbrl
