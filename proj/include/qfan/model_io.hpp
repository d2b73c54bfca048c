#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>

#include "qfan/baselines.hpp"
#include "qfan/dataset.hpp"
#include "qfan/features.hpp"
#include "qfan/network.hpp"

namespace qfan {

inline constexpr int kModelSchemaVersion = 1;

/// A trained forecaster plus the standardization it expects its inputs in.
struct ModelFile {
  std::variant<SpnnModel, LinearQuantileModel> model;
  std::optional<Standardizer> standardizer;

  std::size_t input_width() const;
  const QuantileLevels& levels() const;
};

/// Serializes to a single JSON document. Doubles are written in shortest
/// round-trip form, so load(save(m)) reproduces every weight bit for bit.
/// Linear models use the same schema with n_h = 0, empty w1/b1, and the
/// weights in w2.
std::string save_model(const ModelFile& file);
ModelFile load_model(const std::string& json_text);

void save_model_file(const ModelFile& file, const std::string& path);
ModelFile load_model_file(const std::string& path);

QuantileFan predict_fan(const ModelFile& file, const Matrix& standardized_features);

/// Levels as fan-CSV headers: q0.050, q0.100, ...
std::string level_header(double tau);

/// `timestamp,q0.050,...` then one row per forecast time.
void write_fan_csv(std::ostream& out, std::span<const Timestamp> timestamps,
                   const QuantileFan& fan);

}  // namespace qfan
