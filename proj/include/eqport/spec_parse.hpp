#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "eqport/config.hpp"
#include "eqport/market.hpp"
#include "eqport/riskdist.hpp"

namespace eqport {

/// Distribution spec string; grammar in README. Throws ParseError with the
/// 1-based column of the offending token.
RiskAversionDistribution parse_distribution(std::string_view spec);

/// `const:lambda=..,sigma=..,T=..[,d=..]` or `piecewise:file=..,T=..`.
/// Relative CSV paths resolve against `base_dir`.
MarketModel parse_market(std::string_view spec,
                         const std::filesystem::path& base_dir = {});

/// CSV with header t_start,lambda_1..lambda_d,sigma_11..sigma_dd (row-major).
MarketModel read_market_csv(const std::filesystem::path& file, double horizon);

/// `key = value` lines; `#` starts a comment. Keys are NumericConfig fields.
NumericConfig parse_config(std::string_view text, NumericConfig base = {});
NumericConfig read_config_file(const std::filesystem::path& file,
                               NumericConfig base = {});

}  // namespace eqport
