#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <fstream>
#include <sstream>

#include <fmt/core.h>

#include "fewsim/core/dataset.hpp"
#include "fewsim/core/errors.hpp"

namespace fewsim {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    while (true) {
        auto next = line.find(sep, pos);
        out.push_back(line.substr(pos, next - pos));
        if (next == std::string_view::npos) break;
        pos = next + 1;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
    while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
    auto res = std::from_chars(text.data(), text.data() + text.size(), out);
    return res.ec == std::errc{} && res.ptr == text.data() + text.size();
}

constexpr std::array<std::string_view, 5> kRequired = {"year", "month", "tmean_C", "precip_mm",
                                                       "population"};

Unit unit_for_column(std::string_view column) {
    if (column == "population") return Unit::persons;
    if (column.ends_with("_m3")) return Unit::m3_per_month;
    return Unit::dimensionless;
}

}  // namespace

const MonthlySeries& ClimateFile::column(const std::string& column_name) const {
    auto it = columns.find(column_name);
    if (it == columns.end()) {
        throw NotFoundError(fmt::format("climate '{}' has no column '{}'", name, column_name));
    }
    return it->second;
}

double ClimateFile::value(const std::string& column_name, YearMonth ym) const {
    return column(column_name).at(ym);
}

double ClimateFile::annual_sum(const std::string& column_name, int year) const {
    const auto& s = column(column_name);
    double total = 0.0;
    for (int m = 1; m <= 12; ++m) total += s.at({year, m});
    return total;
}

double ClimateFile::annual_mean(const std::string& column_name, int year) const {
    return annual_sum(column_name, year) / 12.0;
}

ClimateFile read_climate_csv(const std::filesystem::path& path, std::string name,
                             const Horizon& horizon) {
    std::ifstream in(path);
    if (!in) {
        throw DatasetError(DatasetError::Kind::missing_file, path.string(),
                           fmt::format("climate file '{}' not found", path.string()));
    }
    const std::string field = path.filename().string();

    std::string line;
    if (!std::getline(in, line)) {
        throw DatasetError(DatasetError::Kind::schema, field, fmt::format("{}: empty file", field));
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto header = split(line, ',');
    for (std::size_t i = 0; i < kRequired.size(); ++i) {
        if (i >= header.size() || header[i] != kRequired[i]) {
            throw DatasetError(DatasetError::Kind::schema, field + ":" + std::string(kRequired[i]),
                               fmt::format("{}: header column {} must be '{}'", field, i + 1,
                                           kRequired[i]));
        }
    }

    ClimateFile climate;
    climate.name = std::move(name);
    climate.horizon = horizon;
    std::vector<std::string> names;
    for (std::size_t i = 2; i < header.size(); ++i) names.emplace_back(header[i]);
    std::vector<std::vector<double>> values(names.size());

    std::optional<YearMonth> first;
    YearMonth expected{};
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split(line, ',');
        if (cells.size() != header.size()) {
            throw DatasetError(DatasetError::Kind::schema, fmt::format("{}:row {}", field, row),
                               fmt::format("{} row {}: expected {} cells, got {}", field, row,
                                           header.size(), cells.size()));
        }
        YearMonth ym;
        if (!parse_number(cells[0], ym.year) || !parse_number(cells[1], ym.month) || ym.month < 1 ||
            ym.month > 12) {
            throw DatasetError(DatasetError::Kind::schema, fmt::format("{}:row {}", field, row),
                               fmt::format("{} row {}: bad year/month", field, row));
        }
        if (!first) {
            first = ym;
        } else if (ym != expected) {
            throw DatasetError(DatasetError::Kind::horizon, fmt::format("{}:row {}", field, row),
                               fmt::format("{} row {}: expected {}, found {} (gap or disorder)",
                                           field, row, expected.to_string(), ym.to_string()));
        }
        expected = ym.plus_months(1);
        for (std::size_t c = 0; c < names.size(); ++c) {
            double v = 0.0;
            if (!parse_number(cells[c + 2], v) || !std::isfinite(v)) {
                throw DatasetError(DatasetError::Kind::schema, field + ":" + names[c],
                                   fmt::format("{} row {}: column '{}' is not a finite number",
                                               field, row, names[c]));
            }
            values[c].push_back(v);
        }
    }
    if (!first) {
        throw DatasetError(DatasetError::Kind::schema, field, fmt::format("{}: no data rows", field));
    }

    YearMonth last = expected.plus_months(-1);
    long in_horizon = std::min(last.serial(), horizon.end.serial()) -
                      std::max(first->serial(), horizon.start.serial()) + 1;
    if (*first > horizon.start || last != horizon.end) {
        throw DatasetError(
            DatasetError::Kind::horizon, field,
            fmt::format("{}: covers {} months of the {}..{} horizon ({} expected); rows span {}..{}",
                        field, std::max(0L, in_horizon), horizon.start.to_string(),
                        horizon.end.to_string(), horizon.months(), first->to_string(),
                        last.to_string()));
    }

    climate.first = *first;
    for (std::size_t c = 0; c < names.size(); ++c) {
        MonthlySeries s{*first, unit_for_column(names[c]), std::move(values[c])};
        climate.columns.emplace(names[c], std::move(s));
    }
    for (const auto& [col, s] : climate.columns) {
        bool non_negative = col != "tmean_C";
        try {
            s.validate(col, non_negative);
        } catch (const ValidationError& e) {
            throw DatasetError(DatasetError::Kind::schema, field + ":" + col,
                               fmt::format("{}: {}", field, e.what()));
        }
    }
    return climate;
}

void write_climate_csv(const ClimateFile& climate, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
    std::vector<std::string> order = {"tmean_C", "precip_mm", "population"};
    for (const auto& [col, s] : climate.columns) {
        if (std::find(order.begin(), order.end(), col) == order.end()) order.push_back(col);
    }
    out << "year,month";
    for (const auto& col : order) out << ',' << col;
    out << '\n';
    std::size_t rows = climate.columns.empty() ? 0 : climate.columns.begin()->second.size();
    for (std::size_t i = 0; i < rows; ++i) {
        YearMonth ym = climate.first.plus_months(static_cast<long>(i));
        out << ym.year << ',' << ym.month;
        for (const auto& col : order) out << ',' << fmt::format("{}", climate.column(col).values[i]);
        out << '\n';
    }
}

}  // namespace fewsim
