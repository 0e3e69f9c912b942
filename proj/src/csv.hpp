#pragma once

#include "core.hpp"

#include <string>
#include <vector>

namespace arq {

struct CsvLoad {
    Dataset data;
    std::string digest; // "fnv1a64:..." over the raw file bytes
    std::vector<std::string> covariate_names; // includes "(intercept)" when prepended
    std::string response_name;
};

// Delimited text with a header row; rows in file order define t = 1..N.
// Parse failures name the offending row and column.
CsvLoad load_csv(const std::string &path, const std::string &response,
                 const std::vector<std::string> &covariates, bool intercept,
                 char delimiter = ',');

std::string fnv1a64_hex(const std::string &bytes);

} // namespace arq
