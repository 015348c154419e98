#include "adsgd/libsvm.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "adsgd/errors.hpp"

namespace adsgd {
namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

std::string_view next_token(std::string_view& rest) {
  std::size_t begin = 0;
  while (begin < rest.size() && is_space(rest[begin])) ++begin;
  std::size_t end = begin;
  while (end < rest.size() && !is_space(rest[end])) ++end;
  const std::string_view token = rest.substr(begin, end - begin);
  rest.remove_prefix(end);
  return token;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

void binarize_labels(std::vector<double>& labels) {
  const bool already_binary = std::all_of(labels.begin(), labels.end(),
                                          [](double v) { return v == 0.0 || v == 1.0; });
  if (already_binary) return;
  std::vector<double> classes = labels;
  std::sort(classes.begin(), classes.end());
  classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
  const std::size_t negative_classes = classes.size() / 2;
  for (double& v : labels) {
    const auto rank = static_cast<std::size_t>(
        std::lower_bound(classes.begin(), classes.end(), v) - classes.begin());
    v = rank < negative_classes ? 0.0 : 1.0;
  }
}

}  // namespace

std::shared_ptr<const Dataset> parse_libsvm(std::istream& in, LossKind model, Index min_features) {
  std::vector<Entry> entries;
  std::vector<double> labels;
  Index d = std::max<Index>(min_features, 0);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view rest(line);
    if (const auto hash = rest.find('#'); hash != std::string_view::npos) rest = rest.substr(0, hash);
    const std::string_view label_token = next_token(rest);
    if (label_token.empty()) continue;

    double label = 0.0;
    if (!parse_number(label_token, label)) throw ParseError("invalid label '" + std::string(label_token) + "'", line_no);
    const auto row = static_cast<Index>(labels.size());
    labels.push_back(label);

    long long previous = 0;
    for (std::string_view token = next_token(rest); !token.empty(); token = next_token(rest)) {
      const std::size_t colon = token.find(':');
      if (colon == std::string_view::npos)
        throw ParseError("expected index:value, got '" + std::string(token) + "'", line_no);
      long long index = 0;
      double value = 0.0;
      if (!parse_number(token.substr(0, colon), index))
        throw ParseError("invalid feature index in '" + std::string(token) + "'", line_no);
      if (!parse_number(token.substr(colon + 1), value))
        throw ParseError("invalid feature value in '" + std::string(token) + "'", line_no);
      if (index < 1) throw ParseError("feature indices are 1-based", line_no);
      if (index <= previous) throw ParseError("feature indices must be strictly ascending", line_no);
      previous = index;
      d = std::max<Index>(d, static_cast<Index>(index));
      if (value != 0.0) entries.push_back({row, static_cast<Index>(index - 1), value});
    }
  }
  if (in.bad()) throw InvalidArgument("libsvm: read error");
  if (labels.empty()) throw InvalidArgument("libsvm: no samples");
  if (d == 0) d = 1;
  if (model == LossKind::Logistic) binarize_labels(labels);
  const Vector y = Eigen::Map<const Vector>(labels.data(), static_cast<Index>(labels.size()));
  return std::make_shared<const Dataset>(static_cast<Index>(labels.size()), d, std::move(entries), y);
}

std::shared_ptr<const Dataset> load_libsvm(const std::filesystem::path& path, LossKind model,
                                           Index min_features) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  return parse_libsvm(in, model, min_features);
}

}  // namespace adsgd
