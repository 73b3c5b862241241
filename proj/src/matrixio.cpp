#include "cmsrom/matrixio.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cmsrom {

Matrix parse_matrix(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int rows = -1, cols = -1;
    std::string flag;
    std::vector<double> values;

    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        if (rows < 0) {
            if (ls >> rows >> cols >> flag) {
                if (rows < 0 || cols < 0)
                    throw std::runtime_error(origin + ": bad matrix dimensions");
                if (flag != "symmetric" && flag != "general")
                    throw std::runtime_error(origin + ": symmetry flag must be 'symmetric' or 'general'");
                values.reserve(static_cast<size_t>(rows) * cols);
            } else if (!line.empty() && line.find_first_not_of(" \t\r") != std::string::npos) {
                throw std::runtime_error(origin + ": malformed header line");
            }
            continue;
        }
        double v;
        while (ls >> v) values.push_back(v);
    }
    if (rows < 0) throw std::runtime_error(origin + ": missing matrix header");
    if (values.size() != static_cast<size_t>(rows) * cols)
        throw std::runtime_error(origin + ": expected " + std::to_string(rows * cols) +
                                 " values, got " + std::to_string(values.size()));

    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = values[static_cast<size_t>(i) * cols + j];

    if (flag == "symmetric") {
        if (rows != cols) throw std::runtime_error(origin + ": symmetric matrix must be square");
        if (symmetry_deviation(m) > 1e-12)
            throw std::runtime_error(origin + ": matrix flagged symmetric is not");
        m = 0.5 * (m + m.transpose().eval());
    }
    return m;
}

Matrix load_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open matrix file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_matrix(buf.str(), path);
}

std::string format_matrix(const Matrix& m, bool symmetric) {
    std::string out;
    out += std::to_string(m.rows()) + " " + std::to_string(m.cols()) + " " +
           (symmetric ? "symmetric" : "general") + "\n";
    char buf[32];
    for (int i = 0; i < m.rows(); ++i) {
        for (int j = 0; j < m.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", m(i, j));
            out += buf;
            out += (j + 1 == m.cols()) ? '\n' : ' ';
        }
    }
    return out;
}

void save_matrix(const std::string& path, const Matrix& m, bool symmetric) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write matrix file: " + path);
    out << format_matrix(m, symmetric);
}

} // namespace cmsrom
