#include "tom/dataset.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace tom {
namespace {

std::string trimmed(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return "";
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(trimmed(field));
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

[[noreturn]] void schema_error(const std::string& path, std::size_t line,
                               const std::string& what) {
    throw std::runtime_error(path + " row " + std::to_string(line) + ": " + what);
}

double parse_number(const std::string& field, const std::string& path,
                    std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        schema_error(path, line, "expected a number, got '" + field + "'");
    }
}

// Rows of a two-or-three column CSV keyed by a 1-based running index in the
// first column. Comment lines start with '#'.
std::vector<std::vector<double>> read_indexed_csv(const std::string& path,
                                                  const std::string& header,
                                                  std::size_t columns) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);

    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string body = trimmed(line);
        if (body.empty() || body.front() == '#') continue;
        if (!header_seen) {
            if (body != header)
                schema_error(path, lineno, "expected header '" + header + "'");
            header_seen = true;
            continue;
        }
        const std::vector<std::string> fields = split_fields(body);
        if (fields.size() != columns)
            schema_error(path, lineno,
                         "expected " + std::to_string(columns) + " fields, got " +
                             std::to_string(fields.size()));
        std::vector<double> row;
        row.reserve(columns);
        for (const std::string& f : fields) row.push_back(parse_number(f, path, lineno));
        if (row[0] != static_cast<double>(rows.size() + 1))
            schema_error(path, lineno,
                         "indices must run 1.." + std::to_string(rows.size() + 1));
        rows.push_back(std::move(row));
    }
    if (!header_seen) throw std::runtime_error(path + ": missing header row");
    if (rows.empty()) throw std::runtime_error(path + ": no data rows");
    return rows;
}

void apply_setting(MarketSpec& spec, AppealSetting setting) {
    if (setting == AppealSetting::AntiCorrelated)
        for (std::size_t i = 0; i < spec.n(); ++i)
            spec.appeal[i] = 1.0 - spec.quality[i];
}

MarketSpec make_spec(std::vector<double> q, std::vector<double> a,
                     std::vector<double> v) {
    MarketSpec spec;
    spec.quality = std::move(q);
    spec.appeal = std::move(a);
    spec.visibility = std::move(v);
    spec.validate();
    return spec;
}

}  // namespace

DatasetBundle load_dataset(const std::string& products_csv,
                           const std::string& visibility_csv,
                           AppealSetting setting) {
    const auto products = read_indexed_csv(products_csv, "index,quality,appeal", 3);
    const auto positions = read_indexed_csv(visibility_csv, "position,visibility", 2);
    if (positions.size() != products.size())
        throw std::runtime_error(visibility_csv + ": " + std::to_string(positions.size()) +
                                 " positions for " + std::to_string(products.size()) +
                                 " products");

    DatasetBundle bundle;
    bundle.setting = setting;
    bundle.spec.quality.reserve(products.size());
    bundle.spec.appeal.reserve(products.size());
    bundle.spec.visibility.reserve(products.size());
    for (const auto& row : products) {
        bundle.spec.quality.push_back(row[1]);
        bundle.spec.appeal.push_back(row[2]);
    }
    for (const auto& row : positions) bundle.spec.visibility.push_back(row[1]);
    apply_setting(bundle.spec, setting);
    bundle.spec.validate();
    bundle.provenance =
        products_csv + " + " + visibility_csv +
        (setting == AppealSetting::AntiCorrelated ? ", appeals set to 1 - quality"
                                                  : ", appeals as listed");
    return bundle;
}

void write_dataset(const DatasetBundle& bundle, const std::string& products_csv,
                   const std::string& visibility_csv) {
    std::ofstream prod(products_csv);
    if (!prod) throw std::runtime_error("cannot open " + products_csv);
    prod << std::setprecision(17) << "index,quality,appeal\n";
    for (std::size_t i = 0; i < bundle.spec.n(); ++i)
        prod << i + 1 << "," << bundle.spec.quality[i] << "," << bundle.spec.appeal[i]
             << "\n";
    if (!prod) throw std::runtime_error("write failed for " + products_csv);

    std::ofstream vis(visibility_csv);
    if (!vis) throw std::runtime_error("cannot open " + visibility_csv);
    vis << std::setprecision(17) << "position,visibility\n";
    for (std::size_t i = 0; i < bundle.spec.n(); ++i)
        vis << i + 1 << "," << bundle.spec.visibility[i] << "\n";
    if (!vis) throw std::runtime_error("write failed for " + visibility_csv);
}

BuiltinExamples builtin_examples() {
    BuiltinExamples ex;
    ex.five_song = make_spec({0.80, 0.72, 0.68, 0.65, 0.60},
                             {0.38, 0.35, 0.46, 0.27, 0.62},
                             {0.80, 0.75, 0.69, 0.62, 0.58});
    ex.six_song = make_spec({0.80, 0.72, 0.65, 0.57, 0.52, 0.49},
                            {0.38, 0.36, 0.27, 0.60, 0.77, 0.78},
                            {0.80, 0.75, 0.62, 0.48, 0.40, 0.35});
    ex.example_7_1 = make_spec({1.0, 0.4}, {1.0, 0.3}, {1.0, 1.0});
    ex.example_7_2 = make_spec({1.0, 0.261, 0.002}, {1.0, 1.0, 1.0},
                               {1.0, 0.720, 0.229});
    return ex;
}

MarketSpec resolve_market(const std::string& name, AppealSetting setting,
                          const std::string& visibility_csv) {
    const BuiltinExamples ex = builtin_examples();
    MarketSpec spec;
    if (name == "five_song") spec = ex.five_song;
    else if (name == "six_song") spec = ex.six_song;
    else if (name == "example_7_1") spec = ex.example_7_1;
    else if (name == "example_7_2") spec = ex.example_7_2;
    else if (!visibility_csv.empty()) {
        return load_dataset(name, visibility_csv, setting).spec;
    } else {
        const auto products = read_indexed_csv(name, "index,quality,appeal", 3);
        for (const auto& row : products) {
            spec.quality.push_back(row[1]);
            spec.appeal.push_back(row[2]);
        }
        spec.visibility.assign(products.size(), 1.0);
    }
    apply_setting(spec, setting);
    spec.validate();
    return spec;
}

}  // namespace tom
