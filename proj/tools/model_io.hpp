#pragma once

#include <Eigen/Dense>

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "infodensity/error.hpp"
#include "infodensity/model.hpp"
#include "json.hpp"

namespace infodensity::io {

using json = nlohmann::json;

/// Comma-separated positive integers, e.g. "1,2,3".
[[nodiscard]] inline std::vector<Index> parse_index_list(const std::string& text) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto first = item.find_first_not_of(" \t");
    if (first == std::string::npos) throw Error(ErrorCode::InvalidInput, "empty entry in list \"" + text + "\"");
    item = item.substr(first, item.find_last_not_of(" \t") - first + 1);
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw Error(ErrorCode::InvalidInput, "not an integer: \"" + item + "\"");
    out.push_back(static_cast<Index>(v));
  }
  if (out.empty()) throw Error(ErrorCode::InvalidInput, "empty list");
  return out;
}

/// Model document: {"covariance": [[...], ...], "partition": [n1, ...], "mean": [...]?}.
[[nodiscard]] inline GaussianModel model_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::InvalidInput, "model file must hold a JSON object");
  if (!doc.contains("covariance") || !doc.contains("partition")) {
    throw Error(ErrorCode::InvalidInput, "model file needs \"covariance\" and \"partition\"");
  }
  const json& cov = doc.at("covariance");
  if (!cov.is_array() || cov.empty()) throw Error(ErrorCode::InvalidInput, "\"covariance\" must be a non-empty array");
  const auto rows = static_cast<Index>(cov.size());
  Index cols = -1;
  Eigen::MatrixXd sigma;
  for (Index i = 0; i < rows; ++i) {
    const json& row = cov[static_cast<std::size_t>(i)];
    if (!row.is_array()) throw Error(ErrorCode::InvalidInput, "covariance row " + std::to_string(i) + " is not an array");
    if (cols < 0) {
      cols = static_cast<Index>(row.size());
      sigma.resize(rows, cols);
    } else if (static_cast<Index>(row.size()) != cols) {
      throw Error(ErrorCode::DimensionMismatch, "covariance rows have different lengths");
    }
    for (Index j = 0; j < cols; ++j) {
      const json& v = row[static_cast<std::size_t>(j)];
      if (!v.is_number()) throw Error(ErrorCode::InvalidInput, "covariance entries must be numbers");
      sigma(i, j) = v.get<double>();
    }
  }
  const json& part = doc.at("partition");
  if (!part.is_array()) throw Error(ErrorCode::InvalidInput, "\"partition\" must be an array");
  std::vector<Index> sizes;
  for (const json& v : part) {
    if (!v.is_number_integer()) throw Error(ErrorCode::InvalidInput, "partition entries must be integers");
    sizes.push_back(v.get<Index>());
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(rows);
  if (doc.contains("mean")) {
    const json& mu = doc.at("mean");
    if (!mu.is_array()) throw Error(ErrorCode::InvalidInput, "\"mean\" must be an array");
    mean.resize(static_cast<Index>(mu.size()));
    for (std::size_t i = 0; i < mu.size(); ++i) {
      if (!mu[i].is_number()) throw Error(ErrorCode::InvalidInput, "mean entries must be numbers");
      mean(static_cast<Index>(i)) = mu[i].get<double>();
    }
  }
  return validate_model(std::move(mean), std::move(sigma), std::move(sizes));
}

[[nodiscard]] inline json model_to_json(const GaussianModel& model) {
  json doc;
  doc["partition"] = model.partition().block_sizes();
  doc["mean"] = std::vector<double>(model.mean().data(), model.mean().data() + model.dimension());
  json cov = json::array();
  for (Index i = 0; i < model.dimension(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(model.dimension()));
    for (Index j = 0; j < model.dimension(); ++j) row[static_cast<std::size_t>(j)] = model.covariance()(i, j);
    cov.push_back(row);
  }
  doc["covariance"] = cov;
  return doc;
}

[[nodiscard]] inline GaussianModel read_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open model file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidInput, std::string("malformed JSON in ") + path + ": " + e.what());
  }
  return model_from_json(doc);
}

/// Headerless d x d CSV covariance with a partition string; zero mean.
[[nodiscard]] inline GaussianModel read_matrix_csv(const std::string& path, const std::string& partition) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidInput, "cannot open matrix file " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidInput, "not a number in " + path + ": \"" + cell + "\"");
      }
      if (cell.find_first_not_of(" \t\r", used) != std::string::npos) {
        throw Error(ErrorCode::InvalidInput, "not a number in " + path + ": \"" + cell + "\"");
      }
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::DimensionMismatch, "CSV rows have different lengths");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw Error(ErrorCode::InvalidInput, "empty matrix file " + path);
  Eigen::MatrixXd sigma(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < sigma.rows(); ++i)
    for (Index j = 0; j < sigma.cols(); ++j) sigma(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  const Index d = sigma.rows();
  return validate_model(Eigen::VectorXd::Zero(d), std::move(sigma), parse_index_list(partition));
}

}  // namespace infodensity::io
