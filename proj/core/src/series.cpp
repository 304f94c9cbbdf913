#include "sfn/series.hpp"

#include <algorithm>
#include <charconv>
#include <optional>

#include "sfn/error.hpp"
#include "sfn/model_io.hpp"

namespace sfn {
namespace {

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view cell) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size()) return std::nullopt;
  return value;
}

std::vector<std::string_view> split_cells(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

struct Line {
  std::size_t number;
  std::string_view text;
};

std::vector<Line> nonblank_lines(std::string_view text) {
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    const std::string_view line = text.substr(start, nl == std::string_view::npos ? nl : nl - start);
    ++number;
    if (!trim(line).empty()) lines.push_back({number, line});
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return lines;
}

std::optional<std::size_t> as_index(std::string_view column) {
  if (column.empty() || !std::all_of(column.begin(), column.end(), [](char c) {
        return c >= '0' && c <= '9';
      })) {
    return std::nullopt;
  }
  std::size_t k = 0;
  std::from_chars(column.data(), column.data() + column.size(), k);
  return k;
}

}  // namespace

std::size_t embedded_rows(std::size_t length, std::size_t lags) {
  return length > lags ? length - lags : 0;
}

Dataset embed_all(std::span<const double> series, std::size_t lags) {
  if (lags == 0) throw DataError("lag count must be >= 1");
  const std::size_t rows = embedded_rows(series.size(), lags);
  if (rows == 0) {
    throw DataError("series of " + std::to_string(series.size()) + " values is too short for " +
                    std::to_string(lags) + " lags");
  }
  Dataset out;
  out.inputs = Matrix(0, lags);
  out.targets.reserve(rows);
  for (std::size_t t = 0; t < rows; ++t) {
    out.inputs.push_row(series.subspan(t, lags));
    out.targets.push_back(series[t + lags]);
  }
  return out;
}

SplitDataset lag_embed(std::span<const double> series, const SeriesSpec& spec) {
  if (spec.horizon != 1) throw DataError("only one-step-ahead embedding is supported");
  const Dataset all = embed_all(series, spec.lags);
  if (spec.learning_prefix > all.size()) {
    throw DataError("learning prefix of " + std::to_string(spec.learning_prefix) +
                    " rows exceeds the " + std::to_string(all.size()) +
                    " embedded rows available");
  }
  const Dataset learn = slice(all, 0, spec.learning_prefix);
  SplitDataset out;
  std::tie(out.train, out.validation) = split_contiguous(learn, spec.train_fraction);
  out.test = slice(all, spec.learning_prefix, all.size() - spec.learning_prefix);
  return out;
}

std::vector<double> load_series_csv(std::string_view text, std::string_view column) {
  const std::vector<Line> lines = nonblank_lines(text);
  if (lines.empty()) throw DataError("empty series: no data lines");

  std::optional<std::size_t> index = as_index(column);
  std::size_t first = 0;
  if (!index) {
    const auto header = split_cells(lines[0].text);
    const auto it = std::find(header.begin(), header.end(), column);
    if (it == header.end()) throw DataError("missing column '" + std::string(column) + "'");
    index = static_cast<std::size_t>(it - header.begin());
    first = 1;
  } else {
    const auto cells = split_cells(lines[0].text);
    if (*index < cells.size() && !parse_number(cells[*index])) first = 1;
  }

  std::vector<double> values;
  for (std::size_t i = first; i < lines.size(); ++i) {
    const auto cells = split_cells(lines[i].text);
    if (*index >= cells.size()) {
      throw DataError("line " + std::to_string(lines[i].number) + ": missing column " +
                      std::string(column));
    }
    const auto value = parse_number(cells[*index]);
    if (!value) {
      throw DataError("line " + std::to_string(lines[i].number) + ": non-numeric value '" +
                      std::string(cells[*index]) + "'");
    }
    values.push_back(*value);
  }
  if (values.empty()) throw DataError("empty series: no data rows");
  return values;
}

std::vector<double> load_series_csv_file(const std::filesystem::path& path,
                                         std::string_view column) {
  return load_series_csv(read_text_file(path), column);
}

Matrix load_matrix_csv(std::string_view text) {
  const std::vector<Line> lines = nonblank_lines(text);
  Matrix out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto cells = split_cells(lines[i].text);
    std::vector<double> row;
    bool numeric = true;
    for (std::string_view c : cells) {
      const auto v = parse_number(c);
      if (!v) {
        numeric = false;
        break;
      }
      row.push_back(*v);
    }
    if (!numeric) {
      if (i == 0) continue;
      throw DataError("line " + std::to_string(lines[i].number) + ": non-numeric value");
    }
    out.push_row(row);
  }
  return out;
}

}  // namespace sfn
