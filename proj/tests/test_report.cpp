#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "rowcalc/report.hpp"
#include "rowcalc/sortio.hpp"
#include "rowcalc/value.hpp"
#include "support.hpp"

using namespace rowcalc;
using rowcalc::testkit::Rng;
using rowcalc::testkit::uniform;

namespace {

const std::vector<std::string> kHeader{"Id", "Item", "Colour", "Number", "Amount"};

HeaderTranslation translation() { return HeaderTranslation::from_header(kHeader); }

SubtotalJob job(std::vector<std::string> measures, std::vector<std::string> group_by,
                Aggregate aggregate = Aggregate::Sum) {
    SubtotalJob j;
    j.measures = std::move(measures);
    j.group_by = std::move(group_by);
    j.aggregate = aggregate;
    resolve_job(j, translation());
    return j;
}

std::vector<Record> random_records(Rng& rng, std::size_t n) {
    static const char* items[] = {"Toga", "Tunic", "Sandals", "Cloak"};
    static const char* colours[] = {"Purple", "White", "Red"};
    std::vector<Record> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back({std::to_string(i + 1), items[uniform(rng, 0, 3)], colours[uniform(rng, 0, 2)],
                       std::to_string(uniform(rng, -50, 3999)), std::to_string(uniform(rng, 0, 100000))});
    }
    return out;
}

}  // namespace

TEST(ParseSubtotalSpec, TwoJobRows) {
    const std::vector<std::vector<std::string>> block{{"Subtotal these Amounts", "for Column Names"},
                                                      {"Number", "Item, Colour"},
                                                      {"Number, Amount", "Item"}};
    const auto spec = parse_subtotal_spec(block, translation());
    ASSERT_EQ(spec.jobs.size(), 2u);
    EXPECT_EQ(spec.jobs[0].measures, (std::vector<std::string>{"Number"}));
    EXPECT_EQ(spec.jobs[0].group_by, (std::vector<std::string>{"Item", "Colour"}));
    EXPECT_EQ(spec.jobs[0].measure_columns, (std::vector<std::size_t>{3}));
    EXPECT_EQ(spec.jobs[0].group_columns, (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(spec.jobs[1].measures, (std::vector<std::string>{"Number", "Amount"}));
    EXPECT_EQ(spec.jobs[1].group_by, (std::vector<std::string>{"Item"}));
    EXPECT_TRUE(spec.warnings.empty());
}

TEST(ParseSubtotalSpec, SpacesAndCase) {
    const std::vector<std::vector<std::string>> block{{" number ", "item,  colour", "count"}};
    const auto spec = parse_subtotal_spec(block, translation());
    ASSERT_EQ(spec.jobs.size(), 1u);
    EXPECT_EQ(spec.jobs[0].aggregate, Aggregate::Count);
    EXPECT_EQ(spec.jobs[0].group_columns, (std::vector<std::size_t>{1, 2}));
    EXPECT_EQ(spec.warnings.size(), 2u);
}

TEST(ParseSubtotalSpec, Errors) {
    try {
        parse_subtotal_spec({{"Weight", "Item"}}, translation());
        FAIL() << "no UnknownColumn";
    } catch (const UnknownColumn& e) {
        EXPECT_EQ(e.column, "Weight");
    }
    EXPECT_THROW(parse_subtotal_spec({{"Number", "Number"}}, translation()), BadControlTable);
    EXPECT_THROW(parse_subtotal_spec({{"Number", "Item", "average"}}, translation()), BadControlTable);
    EXPECT_THROW(parse_subtotal_spec({{"", "Item"}}, translation()), BadControlTable);
}

TEST(HeaderTranslation, AliasesAndFirstOccurrence) {
    auto t = HeaderTranslation::from_header(std::vector<std::string>{" Id", "Colour", "colour"});
    EXPECT_EQ(t.resolve("ID"), 0u);
    EXPECT_EQ(t.resolve("COLOUR"), 1u);
    t.add_alias("Color", "Colour");
    EXPECT_EQ(t.resolve("color"), 1u);
    EXPECT_THROW(t.add_alias("Hue", "Shade"), UnknownColumn);
    EXPECT_FALSE(t.find("Shade").has_value());
}

TEST(Aggregate, SingleRecord) {
    const std::vector<Record> records{{"1", "Toga", "Purple", "1459", "0"}};
    const auto table = aggregate(records, job({"Number"}, {"Item", "Colour"}));
    EXPECT_EQ(table.key_names, (std::vector<std::string>{"Item", "Colour"}));
    EXPECT_EQ(table.value_names, (std::vector<std::string>{"Sum of Number"}));
    ASSERT_EQ(table.rows.size(), 1u);
    EXPECT_EQ(table.rows[0], (ReportRow{{"Toga", "Purple"}, {1459}}));
    EXPECT_EQ(render_report(table, ReportFormat::Csv), "Item,Colour,Sum of Number\nToga,Purple,1459\n");
}

TEST(Aggregate, EmptyTable) {
    const auto table = aggregate({}, job({"Number"}, {"Item"}));
    EXPECT_TRUE(table.rows.empty());
    EXPECT_EQ(render_report(table, ReportFormat::Csv), "Item,Sum of Number\n");
    EXPECT_EQ(render_report(table, ReportFormat::AlignedText), "Item  Sum of Number\n");
}

TEST(Aggregate, NonNumericMeasure) {
    const std::vector<Record> records{{"1", "Toga", "Purple", "12", "0"}, {"2", "Toga", "Purple", "XII", "0"}};
    try {
        aggregate(records, job({"Number"}, {"Item"}));
        FAIL() << "no NonNumericMeasure";
    } catch (const NonNumericMeasure& e) {
        EXPECT_EQ(e.record, 2u);
        EXPECT_EQ(e.column, "Number");
    }
    AggregateStats stats;
    std::ostringstream diag;
    const auto table = aggregate(records, job({"Number"}, {"Item"}), RecordErrorPolicy::SkipAndLog, &stats, &diag);
    EXPECT_EQ(stats.errored, 1u);
    EXPECT_EQ(table.rows[0].values[0], 12);
    EXPECT_FALSE(diag.str().empty());
}

TEST(Aggregate, AlignedText) {
    const std::vector<Record> records{{"1", "Toga", "Purple", "1459", "0"}, {"2", "Sandals", "Brown", "42", "0"}};
    const auto table = aggregate(records, job({"Number"}, {"Item"}));
    EXPECT_EQ(render_report(table, ReportFormat::AlignedText),
              "Item     Sum of Number\n"
              "Sandals             42\n"
              "Toga              1459\n");
}

TEST(AggregateProperty, MatchesBruteForceGroupBy) {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const auto records = random_records(rng, 100);
        const auto sum_job = job({"Number", "Amount"}, {"Item", "Colour"});
        const auto count_job = job({"Number"}, {"Colour"}, Aggregate::Count);

        // Two passes: collect the distinct keys, then total each one.
        std::vector<std::vector<std::string>> keys;
        for (const auto& r : records) {
            const std::vector<std::string> k{r[1], r[2]};
            if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
        }
        std::sort(keys.begin(), keys.end());
        const auto table = aggregate(records, sum_job);
        ASSERT_EQ(table.rows.size(), keys.size());
        double grand = 0, grand_table = 0;
        for (std::size_t i = 0; i < keys.size(); ++i) {
            double number = 0, amount = 0;
            for (const auto& r : records) {
                if (r[1] == keys[i][0] && r[2] == keys[i][1]) {
                    number += std::stod(r[3]);
                    amount += std::stod(r[4]);
                }
            }
            ASSERT_EQ(table.rows[i].key, keys[i]);
            ASSERT_EQ(table.rows[i].values, (std::vector<double>{number, amount}));
            grand_table += table.rows[i].values[0];
        }
        for (const auto& r : records) grand += std::stod(r[3]);
        EXPECT_EQ(grand_table, grand);

        const auto counts = aggregate(records, count_job);
        double total = 0;
        for (const auto& row : counts.rows) total += row.values[0];
        EXPECT_EQ(total, static_cast<double>(records.size()));

        auto shuffled = records;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        EXPECT_EQ(aggregate(shuffled, sum_job).rows, table.rows);
    }
}

TEST(AggregateProperty, GeneralDoublesSumWithinTolerance) {
    Rng rng(32);
    std::uniform_real_distribution<double> dist(-1e6, 1e6);
    std::vector<Record> records;
    double total = 0;
    for (int i = 0; i < 1000; ++i) {
        const double v = dist(rng);
        records.push_back({std::to_string(i), i % 3 ? "Toga" : "Tunic", "White", render_number(v), "0"});
        total += std::stod(records.back()[3]);
    }
    const auto table = aggregate(records, job({"Number"}, {"Item"}));
    double sum = 0;
    for (const auto& row : table.rows) sum += row.values[0];
    EXPECT_NEAR(sum, total, 1e-9 * std::abs(total) + 1e-9);
}

TEST(RenderProperty, CsvReparsesToSameValues) {
    Rng rng(33);
    for (int trial = 0; trial < 50; ++trial) {
        auto records = random_records(rng, static_cast<std::size_t>(uniform(rng, 1, 60)));
        for (auto& r : records) {
            if (testkit::chance(rng, 0.2)) r[1] += ", \"deluxe\"";
            r[4] = render_number(uniform(rng, -1000, 1000) / 7.0);
        }
        const auto table = aggregate(records, job({"Number", "Amount"}, {"Item"}));
        std::istringstream in(render_report(table, ReportFormat::Csv));
        const auto back = read_all(in, CsvMode::Rfc4180);
        ASSERT_EQ(back.size(), table.rows.size() + 1);
        EXPECT_EQ(back[0], (Record{"Item", "Sum of Number", "Sum of Amount"}));
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            ASSERT_EQ(back[i + 1][0], table.rows[i].key[0]);
            ASSERT_EQ(std::stod(back[i + 1][1]), table.rows[i].values[0]);
            ASSERT_EQ(std::stod(back[i + 1][2]), table.rows[i].values[1]);
        }
    }
}
