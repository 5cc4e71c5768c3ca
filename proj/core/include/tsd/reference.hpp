// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace tsd {

// One published benchmark result, kept verbatim as a rendering fixture.
// These rows are joined into comparison reports; they are never training
// targets or pass/fail gates for the local model.
struct ReferenceRow {
    std::string dataset;   // etth1 | etth2 | ettm1 | ili | exchange
    std::string mode;      // multivariate | univariate
    std::size_t horizon;
    std::string model;
    double mse;
    double mae;
    std::string source;    // citation tag, e.g. "paper-table-1"
};

const std::vector<ReferenceRow>& paper_reference_rows();

std::vector<ReferenceRow> reference_rows_for(const std::string& dataset,
                                             const std::string& mode,
                                             std::size_t horizon);

// Full fixture as CSV: dataset,mode,horizon,model,mse,mae,source
std::string reference_csv();

}  // namespace tsd
