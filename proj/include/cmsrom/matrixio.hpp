#pragma once

#include "cmsrom/types.hpp"

#include <string>

namespace cmsrom {

/// Plain-text matrix container. Header line: "<rows> <cols> <symmetric|general>",
/// body row-major numeric; '#' starts a comment. Symmetric matrices are
/// verified and symmetrized on load.
Matrix load_matrix(const std::string& path);
void save_matrix(const std::string& path, const Matrix& m, bool symmetric = false);

Matrix parse_matrix(const std::string& text, const std::string& origin = "<string>");
std::string format_matrix(const Matrix& m, bool symmetric = false);

} // namespace cmsrom
