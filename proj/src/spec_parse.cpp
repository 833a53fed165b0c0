#include "eqport/spec_parse.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <vector>

#include "eqport/errors.hpp"

namespace eqport {

namespace {

// A slice of the top-level input with its 0-based offset.
struct Piece {
  std::string_view text;
  std::size_t offset;

  [[noreturn]] void fail(const std::string& what, std::size_t at = 0) const {
    throw ParseError(what, 1, offset + at + 1);
  }
};

std::optional<double> to_number(std::string_view s) {
  double v = 0.0;
  const char* end = s.data() + s.size();
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end || s.empty()) return std::nullopt;
  return v;
}

double number(const Piece& p, const std::string& what) {
  const auto v = to_number(p.text);
  if (!v) p.fail("expected a number for " + what + ", got '" + std::string(p.text) + "'");
  return *v;
}

// Splits at commas at parenthesis depth 0.
std::vector<Piece> split_commas(const Piece& p) {
  std::vector<Piece> out;
  int depth = 0;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= p.text.size(); ++i) {
    const char c = i < p.text.size() ? p.text[i] : ',';
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      out.push_back({p.text.substr(start, i - start), p.offset + start});
      start = i + 1;
    }
  }
  return out;
}

struct KeyValue {
  std::string key;
  Piece key_piece;
  Piece value;
};

KeyValue key_value(const Piece& p) {
  const auto eq = p.text.find('=');
  if (eq == std::string_view::npos) p.fail("expected key=value, got '" + std::string(p.text) + "'");
  return {std::string(p.text.substr(0, eq)), {p.text.substr(0, eq), p.offset},
          {p.text.substr(eq + 1), p.offset + eq + 1}};
}

// key=value pairs restricted to `allowed`; all of `required` must appear.
std::map<std::string, Piece> keyed(const Piece& body, const std::set<std::string>& allowed,
                                   const std::set<std::string>& required,
                                   const std::string& family) {
  std::map<std::string, Piece> out;
  if (body.text.empty()) body.fail(family + " needs parameters");
  for (const auto& item : split_commas(body)) {
    const auto kv = key_value(item);
    if (!allowed.count(kv.key)) kv.key_piece.fail("unknown key '" + kv.key + "' for " + family);
    if (out.count(kv.key)) kv.key_piece.fail("duplicate key '" + kv.key + "'");
    out.emplace(kv.key, kv.value);
  }
  for (const auto& r : required)
    if (!out.count(r)) body.fail(family + " is missing key '" + r + "'");
  return out;
}

RiskAversionDistribution parse_dist(Piece p) {
  // Parentheses group a nested spec.
  while (p.text.size() >= 2 && p.text.front() == '(' && p.text.back() == ')')
    p = {p.text.substr(1, p.text.size() - 2), p.offset + 1};
  const auto colon = p.text.find(':');
  if (colon == std::string_view::npos) p.fail("expected family:parameters");
  const std::string family(p.text.substr(0, colon));
  const Piece body{p.text.substr(colon + 1), p.offset + colon + 1};

  if (family == "point") {
    if (to_number(body.text)) return RiskAversionDistribution::point(*to_number(body.text));
    const auto kv = keyed(body, {"gamma"}, {"gamma"}, family);
    return RiskAversionDistribution::point(number(kv.at("gamma"), "gamma"));
  }
  if (family == "gamma") {
    const auto kv = keyed(body, {"alpha", "beta"}, {"alpha", "beta"}, family);
    return RiskAversionDistribution::gamma(number(kv.at("alpha"), "alpha"),
                                           number(kv.at("beta"), "beta"));
  }
  if (family == "poisson") {
    const auto kv = keyed(body, {"theta"}, {"theta"}, family);
    return RiskAversionDistribution::poisson(number(kv.at("theta"), "theta"));
  }
  if (family == "stable") {
    const auto kv = keyed(body, {"alpha"}, {"alpha"}, family);
    return RiskAversionDistribution::stable(number(kv.at("alpha"), "alpha"));
  }
  if (family == "discrete") {
    if (body.text.empty()) body.fail("discrete needs atoms");
    std::vector<double> pts, probs;
    for (const auto& item : split_commas(body)) {
      const auto kv = key_value(item);
      pts.push_back(number(kv.key_piece, "atom"));
      probs.push_back(number(kv.value, "probability"));
    }
    return RiskAversionDistribution::discrete(pts, probs);
  }
  if (family == "mix") {
    // Components are `w*spec`; a comma starts a new component only when it is
    // followed by a number and '*'.
    std::vector<Piece> parts;
    std::size_t start = 0;
    int depth = 0;
    for (std::size_t i = 0; i <= body.text.size(); ++i) {
      const char c = i < body.text.size() ? body.text[i] : ',';
      if (c == '(') ++depth;
      if (c == ')') --depth;
      if (c != ',' || depth != 0) continue;
      if (i < body.text.size()) {
        const auto star = body.text.find('*', i + 1);
        const auto next_comma = body.text.find_first_of(",:", i + 1);
        if (star == std::string_view::npos || (next_comma != std::string_view::npos && next_comma < star) ||
            !to_number(body.text.substr(i + 1, star - i - 1)))
          continue;
      }
      parts.push_back({body.text.substr(start, i - start), body.offset + start});
      start = i + 1;
    }
    std::vector<double> weights;
    std::vector<RiskAversionDistribution> comps;
    for (const auto& part : parts) {
      const auto star = part.text.find('*');
      if (star == std::string_view::npos) part.fail("mix component needs weight*spec");
      weights.push_back(number({part.text.substr(0, star), part.offset}, "weight"));
      comps.push_back(parse_dist({part.text.substr(star + 1), part.offset + star + 1}));
    }
    return RiskAversionDistribution::combination(weights, comps);
  }
  if (family == "mean") {
    // `base=` takes the rest of the string, so it may contain commas.
    std::optional<int> n;
    std::optional<Piece> base;
    std::size_t pos = 0;
    while (pos < body.text.size()) {
      const Piece rest{body.text.substr(pos), body.offset + pos};
      const auto eq = rest.text.find('=');
      if (eq == std::string_view::npos) rest.fail("expected key=value");
      const std::string key(rest.text.substr(0, eq));
      if (key == "base") {
        if (base) rest.fail("duplicate key 'base'");
        base = Piece{rest.text.substr(eq + 1), rest.offset + eq + 1};
        break;
      }
      if (key != "n") rest.fail("unknown key '" + key + "' for mean");
      if (n) rest.fail("duplicate key 'n'");
      auto comma = rest.text.find(',', eq);
      if (comma == std::string_view::npos) comma = rest.text.size();
      const Piece val{rest.text.substr(eq + 1, comma - eq - 1), rest.offset + eq + 1};
      const double v = number(val, "n");
      if (v != static_cast<int>(v) || v < 1) val.fail("n must be a positive integer");
      n = static_cast<int>(v);
      pos += comma + 1;
    }
    if (!n) body.fail("mean is missing key 'n'");
    if (!base) body.fail("mean is missing key 'base'");
    return RiskAversionDistribution::sample_mean(parse_dist(*base), *n);
  }
  p.fail("unknown distribution family '" + family + "'");
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

RiskAversionDistribution parse_distribution(std::string_view spec) {
  return parse_dist({spec, 0});
}

MarketModel parse_market(std::string_view spec, const std::filesystem::path& base_dir) {
  const Piece p{spec, 0};
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) p.fail("expected const:... or piecewise:...");
  const std::string family(spec.substr(0, colon));
  const Piece body{spec.substr(colon + 1), colon + 1};
  if (family == "const") {
    const auto kv = keyed(body, {"lambda", "sigma", "T", "d"}, {"lambda", "sigma", "T"}, family);
    int d = 1;
    if (kv.count("d")) {
      const double v = number(kv.at("d"), "d");
      if (v != static_cast<int>(v) || v < 1) kv.at("d").fail("d must be a positive integer");
      d = static_cast<int>(v);
    }
    return MarketModel::constant(number(kv.at("lambda"), "lambda"),
                                 number(kv.at("sigma"), "sigma"), number(kv.at("T"), "T"), d);
  }
  if (family == "piecewise") {
    const auto kv = keyed(body, {"file", "T"}, {"file", "T"}, family);
    std::filesystem::path file(std::string(kv.at("file").text));
    if (file.is_relative() && !base_dir.empty()) file = base_dir / file;
    return read_market_csv(file, number(kv.at("T"), "T"));
  }
  p.fail("unknown market family '" + family + "'");
}

MarketModel read_market_csv(const std::filesystem::path& file, double horizon) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open market file " + file.string(), 0, 0);
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    header = split_csv_line(line);
  }
  if (header.empty()) throw ParseError("market file is empty", lineno, 1);
  const std::size_t cols = header.size();
  int d = 0;
  while (static_cast<std::size_t>(1 + d + d * d) < cols) ++d;
  if (static_cast<std::size_t>(1 + d + d * d) != cols || d == 0)
    throw ParseError("market header needs t_start, lambda_1..d, sigma_11..dd", lineno, 1);
  std::vector<std::string> expect{"t_start"};
  for (int i = 1; i <= d; ++i) expect.push_back("lambda_" + std::to_string(i));
  for (int i = 1; i <= d; ++i)
    for (int j = 1; j <= d; ++j) expect.push_back("sigma_" + std::to_string(i) + std::to_string(j));
  std::size_t col = 1;
  for (std::size_t c = 0; c < cols; ++c) {
    if (header[c] != expect[c])
      throw ParseError("expected column '" + expect[c] + "', got '" + header[c] + "'", lineno, col);
    col += header[c].size() + 1;
  }
  std::vector<MarketModel::Segment> segs;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != cols)
      throw ParseError("expected " + std::to_string(cols) + " fields", lineno, 1);
    std::vector<double> v;
    col = 1;
    for (const auto& c : cells) {
      const auto x = to_number(c);
      if (!x) throw ParseError("expected a number, got '" + c + "'", lineno, col);
      v.push_back(*x);
      col += c.size() + 1;
    }
    MarketModel::Segment s{v[0], Eigen::VectorXd(d), Eigen::MatrixXd(d, d)};
    for (int i = 0; i < d; ++i) s.lambda[i] = v[1 + i];
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) s.sigma(i, j) = v[1 + d + i * d + j];
    segs.push_back(std::move(s));
  }
  if (segs.empty()) throw ParseError("market file has no rows", lineno, 1);
  return MarketModel(std::move(segs), horizon);
}

NumericConfig parse_config(std::string_view text, NumericConfig cfg) {
  std::map<std::string, double*> reals{
      {"quad_rel_tol", &cfg.quad_rel_tol},
      {"quad_abs_floor", &cfg.quad_abs_floor},
      {"y_max", &cfg.y_max},
      {"inverse_rel_tol", &cfg.inverse_rel_tol},
      {"zero_fit_lo", &cfg.zero_fit_lo},
      {"zero_fit_hi", &cfg.zero_fit_hi},
      {"rh_quantile_lo", &cfg.rh_quantile_lo},
      {"crossing_time_tol", &cfg.crossing_time_tol},
      {"reversal_t_start", &cfg.reversal_t_start},
      {"reversal_t_max", &cfg.reversal_t_max},
      {"reversal_rel_width", &cfg.reversal_rel_width},
      {"fixed_point_tol", &cfg.fixed_point_tol},
      {"certificate_tol", &cfg.certificate_tol},
  };
  std::map<std::string, std::size_t*> counts{
      {"grid_intervals", &cfg.grid_intervals},
      {"eta_points", &cfg.eta_points},
      {"rh_grid_points", &cfg.rh_grid_points},
  };
  std::size_t lineno = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    ++lineno;
    pos = nl + 1;
    if (const auto hash = line.find('#'); hash != std::string_view::npos)
      line = line.substr(0, hash);
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError("expected key = value", lineno, b + 1);
    auto trim = [](std::string_view s, std::size_t& lead) {
      lead = s.find_first_not_of(" \t\r");
      if (lead == std::string_view::npos) {
        lead = 0;
        return std::string_view{};
      }
      const auto e = s.find_last_not_of(" \t\r");
      return s.substr(lead, e - lead + 1);
    };
    std::size_t kl = 0, vl = 0;
    const std::string key(trim(line.substr(0, eq), kl));
    const std::string_view val = trim(line.substr(eq + 1), vl);
    const std::size_t vcol = eq + 2 + vl;
    const auto x = to_number(val);
    if (!x) throw ParseError("expected a number for '" + key + "'", lineno, vcol);
    if (auto it = reals.find(key); it != reals.end()) {
      *it->second = *x;
    } else if (auto jt = counts.find(key); jt != counts.end()) {
      if (*x < 0 || *x != static_cast<double>(static_cast<std::size_t>(*x)))
        throw ParseError("'" + key + "' must be a nonnegative integer", lineno, vcol);
      *jt->second = static_cast<std::size_t>(*x);
    } else {
      throw ParseError("unknown config key '" + key + "'", lineno, kl + 1);
    }
  }
  return cfg;
}

NumericConfig read_config_file(const std::filesystem::path& file, NumericConfig base) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open config file " + file.string(), 0, 0);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), base);
}

}  // namespace eqport
