#pragma once

#include <string>

#include "tom/model.hpp"

namespace tom {

// How product appeal relates to quality in the 50-item catalog.
enum class AppealSetting {
    Independent,     // appeals as listed in the products file
    AntiCorrelated,  // appeal_i = 1 - quality_i
};

struct DatasetBundle {
    MarketSpec spec;
    AppealSetting setting = AppealSetting::Independent;
    std::string provenance;  // free-form note on where the numbers came from
};

// Reads the 50-product catalog (index,quality,appeal) and the position
// visibility profile (position,visibility).  Schema violations report the
// offending row number.
DatasetBundle load_dataset(const std::string& products_csv,
                           const std::string& visibility_csv,
                           AppealSetting setting);

void write_dataset(const DatasetBundle& bundle,
                   const std::string& products_csv,
                   const std::string& visibility_csv);

struct BuiltinExamples {
    MarketSpec five_song;
    MarketSpec six_song;
    MarketSpec example_7_1;
    MarketSpec example_7_2;
};

BuiltinExamples builtin_examples();

// Resolves a market by builtin name (five_song, six_song, example_7_1,
// example_7_2) or, failing that, by loading `name` as a products CSV.  A
// companion visibility CSV can be supplied; without one every position is
// equally visible.
MarketSpec resolve_market(const std::string& name, AppealSetting setting,
                          const std::string& visibility_csv = "");

}  // namespace tom
