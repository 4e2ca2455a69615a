#include <gtest/gtest.h>

#include "rowcalc/workbook.hpp"
#include "support.hpp"

using namespace rowcalc;

namespace {

// Column names by counting in bijective base 26, one increment at a time.
std::vector<std::string> odometer_columns(int n) {
    std::vector<std::string> out;
    std::string current = "A";
    for (int i = 0; i < n; ++i) {
        out.push_back(current);
        int pos = static_cast<int>(current.size()) - 1;
        while (pos >= 0 && current[static_cast<std::size_t>(pos)] == 'Z') {
            current[static_cast<std::size_t>(pos)] = 'A';
            --pos;
        }
        if (pos < 0) {
            current.insert(current.begin(), 'A');
        } else {
            ++current[static_cast<std::size_t>(pos)];
        }
    }
    return out;
}

Workbook caesar_sheet() {
    Workbook wb;
    wb.add_sheet("Main");
    return wb;
}

}  // namespace

TEST(ParseA1, Basics) {
    EXPECT_EQ(parse_a1("A1"), (CellAddress{"", 1, 1}));
    EXPECT_EQ(parse_a1("D2"), (CellAddress{"", 2, 4}));
    EXPECT_EQ(parse_a1("AA10"), (CellAddress{"", 10, 27}));
    EXPECT_EQ(parse_a1("Main!$B$7"), (CellAddress{"Main", 7, 2}));
    EXPECT_EQ(parse_a1("xfd1048576"), (CellAddress{"", 1048576, 16384}));
}

TEST(ParseA1, Rejects) {
    for (const char* bad : {"", "1A", "A", "A0", "A01", "!A1", "A1B", "Main!", "A-1"}) {
        EXPECT_THROW(parse_a1(bad), BadAddress) << bad;
    }
}

TEST(ParseA1, ColumnBijectionAgainstEnumeration) {
    const auto names = odometer_columns(1000);
    for (int i = 0; i < 1000; ++i) {
        const std::string& letters = names[static_cast<std::size_t>(i)];
        ASSERT_EQ(column_index(letters), i + 1) << letters;
        ASSERT_EQ(column_letters(i + 1), letters);
        const CellAddress a = parse_a1(letters + "10");
        ASSERT_EQ(a.col, i + 1);
        ASSERT_EQ(format_a1(a), letters + "10");
    }
    EXPECT_EQ(names[26], "AA");
    EXPECT_EQ(names[701], "ZZ");
    EXPECT_EQ(names[702], "AAA");
}

TEST(ParseRange, NormalisesInvertedCorners) {
    const CellRange r = parse_range("Main!B2:A1");
    EXPECT_EQ(format_range(r), "Main!A1:B2");
    EXPECT_EQ(r.rows(), 2);
    EXPECT_EQ(r.cols(), 2);
}

TEST(Workbook, SetAndGet) {
    Workbook wb = caesar_sheet();
    wb.set_cell(parse_a1("B2"), std::string("Toga"));
    EXPECT_EQ(wb.get_value(parse_a1("B2")), CellValue("Toga"));
    EXPECT_TRUE(wb.get_value(parse_a1("Z999")).is_blank());
    EXPECT_EQ(wb.get_value(parse_a1("main!B2")), CellValue("Toga"));
}

TEST(Workbook, OutOfBoundsAndUnknownSheet) {
    Workbook wb = caesar_sheet();
    EXPECT_THROW(wb.set_cell(parse_a1("XFE1"), 1), BadAddress);
    EXPECT_THROW(wb.set_cell(parse_a1("A1048577"), 1), BadAddress);
    EXPECT_THROW(wb.set_cell(parse_a1("Other!A1"), 1), BadAddress);
}

TEST(Workbook, LimitsConfigurableUpward) {
    Workbook wb(Limits{4'000'000, 20'000});
    wb.add_sheet("Big");
    wb.set_cell(parse_a1("A3000000"), 1);
    EXPECT_EQ(wb.get_value(parse_a1("A3000000")), CellValue(1));
}

TEST(Workbook, SparseStorage) {
    Workbook wb = caesar_sheet();
    wb.set_cell(parse_a1("XFD1048576"), 7);
    EXPECT_EQ(wb.cell_count(), 1u);
    EXPECT_EQ(wb.get_value(parse_a1("XFD1048576")), CellValue(7));
    EXPECT_TRUE(wb.get_value(parse_a1("XFD1048575")).is_blank());
}

TEST(Workbook, NamesAreCaseInsensitive) {
    Workbook wb = caesar_sheet();
    wb.define_name("InputCells", parse_range("Main!A2:D2"));
    for (const char* key : {"InputCells", "inputcells", "INPUTCELLS", "iNpUtCeLlS"}) {
        EXPECT_EQ(format_range(wb.resolve_name(key)), "Main!A2:D2") << key;
    }
    EXPECT_THROW(wb.define_name("INPUTcells", parse_range("Main!A1")), DuplicateName);
    EXPECT_THROW(wb.resolve_name("OutputCells"), UnknownName);
}

TEST(Workbook, NameMustObeyNameGrammar) {
    Workbook wb = caesar_sheet();
    EXPECT_THROW(wb.define_name("A1", parse_range("Main!A1")), ConfigError);
    EXPECT_THROW(wb.define_name("1abc", parse_range("Main!A1")), ConfigError);
    EXPECT_NO_THROW(wb.define_name("_tax.rate2", parse_range("Main!A1")));
}

TEST(Workbook, WriteRangeReadRange) {
    Workbook wb = caesar_sheet();
    const CellRange input = parse_range("Main!A2:D2");
    const Matrix row = Matrix::row({1, std::string("Toga"), std::string("Purple"), std::string("MCDLIX")});
    wb.write_range(input, row);
    EXPECT_EQ(wb.read_range(input), row);
    EXPECT_EQ(wb.get_value(parse_a1("D2")), CellValue("MCDLIX"));
    EXPECT_FALSE(wb.find_cell(wb.key_of(parse_a1("D2")))->is_formula());
}

TEST(Workbook, ReadBlankRange) {
    Workbook wb = caesar_sheet();
    const Matrix m = wb.read_range(parse_range("C3:D4"));
    EXPECT_EQ(m.rows, 2);
    EXPECT_EQ(m.cols, 2);
    for (const auto& v : m.values) EXPECT_TRUE(v.is_blank());
}

TEST(Workbook, WriteRangeShapeMismatch) {
    Workbook wb = caesar_sheet();
    EXPECT_THROW(wb.write_range(parse_range("A2:D2"), Matrix(2, 2)), ShapeMismatch);
}

TEST(Workbook, WriteOverFormulaNeedsDeclaration) {
    Workbook wb = caesar_sheet();
    wb.set_formula(parse_a1("B1"), "=A1+1");
    const CellRange r = parse_range("A1:B1");
    EXPECT_THROW(wb.write_range(r, Matrix::row({1, 2})), FormulaOverwrite);
    EXPECT_TRUE(wb.get_value(parse_a1("A1")).is_blank()) << "nothing written on failure";
    wb.declare_writable(r);
    wb.write_range(r, Matrix::row({1, 2}));
    EXPECT_EQ(wb.get_value(parse_a1("B1")), CellValue(2));
}

TEST(WorkbookProperty, WriteThenReadIsIdentity) {
    testkit::Rng rng(99);
    for (int trial = 0; trial < 500; ++trial) {
        Workbook wb = caesar_sheet();
        const int r = testkit::uniform(rng, 1, 50), c = testkit::uniform(rng, 1, 50);
        const int h = testkit::uniform(rng, 1, 4), w = testkit::uniform(rng, 1, 4);
        const CellRange range{{"", r, c}, {"", r + h - 1, c + w - 1}};
        Matrix m(h, w);
        for (auto& v : m.values) v = testkit::random_literal(rng);
        wb.write_range(range, m);
        ASSERT_EQ(wb.read_range(range), m);
    }
}
