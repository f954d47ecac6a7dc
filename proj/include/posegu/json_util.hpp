#pragma once

#include <Eigen/Core>

#include <string>

#include "json.hpp"
#include "posegu/error.hpp"

namespace posegu {

// Nested array, one inner array per row.
template <typename Derived>
nlohmann::json rows_to_json(const Eigen::MatrixBase<Derived>& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

template <typename Derived>
nlohmann::json vector_to_json(const Eigen::MatrixBase<Derived>& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

// Reads a rows x Cols array; `rows` < 0 accepts any row count.
template <typename Matrix>
Matrix rows_from_json(const nlohmann::json& doc, Eigen::Index rows, const std::string& field) {
  constexpr int kCols = Matrix::ColsAtCompileTime;
  if (!doc.is_array()) throw DataError("'" + field + "' must be an array");
  if (rows >= 0 && static_cast<Eigen::Index>(doc.size()) != rows) {
    throw DimensionError("'" + field + "' has " + std::to_string(doc.size()) +
                         " rows, expected " + std::to_string(rows));
  }
  Matrix m(static_cast<Eigen::Index>(doc.size()), kCols);
  for (std::size_t r = 0; r < doc.size(); ++r) {
    const auto& row = doc[r];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(kCols)) {
      throw DimensionError("'" + field + "' row " + std::to_string(r) + " must have " +
                           std::to_string(kCols) + " values");
    }
    for (int c = 0; c < kCols; ++c) {
      if (!row[c].is_number()) throw DataError("'" + field + "' holds a non-number");
      m(static_cast<Eigen::Index>(r), c) = row[c].get<double>();
    }
  }
  return m;
}

inline Eigen::VectorXd vector_from_json(const nlohmann::json& doc, Eigen::Index size,
                                        const std::string& field) {
  if (!doc.is_array()) throw DataError("'" + field + "' must be an array");
  if (size >= 0 && static_cast<Eigen::Index>(doc.size()) != size) {
    throw DimensionError("'" + field + "' has " + std::to_string(doc.size()) +
                         " values, expected " + std::to_string(size));
  }
  Eigen::VectorXd v(static_cast<Eigen::Index>(doc.size()));
  for (std::size_t i = 0; i < doc.size(); ++i) {
    if (!doc[i].is_number()) throw DataError("'" + field + "' holds a non-number");
    v(static_cast<Eigen::Index>(i)) = doc[i].get<double>();
  }
  return v;
}

}  // namespace posegu
