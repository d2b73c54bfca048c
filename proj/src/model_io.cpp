#include "qfan/model_io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "qfan/error.hpp"

namespace qfan {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, std::size_t rows, std::size_t cols, const char* name) {
  if (!j.is_array() || j.size() != rows) {
    throw DataError(std::string("model file: '") + name + "' should have " + std::to_string(rows) +
                    " rows");
  }
  std::vector<double> data;
  data.reserve(rows * cols);
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != cols) {
      throw DataError(std::string("model file: '") + name + "' rows should have " +
                      std::to_string(cols) + " entries");
    }
    for (const auto& v : row) data.push_back(v.get<double>());
  }
  return Matrix(rows, cols, std::move(data));
}

std::vector<double> vector_from_json(const json& j, std::size_t n, const char* name) {
  auto v = j.get<std::vector<double>>();
  if (v.size() != n) {
    throw DataError(std::string("model file: '") + name + "' should have " + std::to_string(n) +
                    " entries");
  }
  return v;
}

json hyper_to_json(const HyperParams& h) {
  return {{"iterations", h.iterations}, {"hidden_nodes", h.hidden_nodes},
          {"learning_rate", h.learning_rate}, {"alpha", h.alpha},
          {"lambda1", h.lambda1}, {"lambda2", h.lambda2}, {"seed", h.seed}};
}

HyperParams hyper_from_json(const json& j) {
  HyperParams h;
  h.iterations = j.at("iterations").get<int>();
  h.hidden_nodes = j.at("hidden_nodes").get<int>();
  h.learning_rate = j.at("learning_rate").get<double>();
  h.alpha = j.at("alpha").get<double>();
  h.lambda1 = j.at("lambda1").get<double>();
  h.lambda2 = j.at("lambda2").get<double>();
  h.seed = j.at("seed").get<std::uint64_t>();
  return h;
}

}  // namespace

std::size_t ModelFile::input_width() const {
  if (const auto* spnn = std::get_if<SpnnModel>(&model)) return spnn->input_width();
  return std::get<LinearQuantileModel>(model).weights.cols();
}

const QuantileLevels& ModelFile::levels() const {
  if (const auto* spnn = std::get_if<SpnnModel>(&model)) return spnn->levels;
  return std::get<LinearQuantileModel>(model).levels;
}

std::string save_model(const ModelFile& file) {
  json doc;
  doc["schema_version"] = kModelSchemaVersion;
  if (const auto* spnn = std::get_if<SpnnModel>(&file.model)) {
    doc["kind"] = "spnn";
    doc["n_x"] = spnn->input_width();
    doc["n_h"] = spnn->hidden_width();
    doc["levels"] = std::vector<double>(spnn->levels.begin(), spnn->levels.end());
    doc["hyper"] = hyper_to_json(spnn->hyper);
    doc["w1"] = matrix_to_json(spnn->w1);
    doc["b1"] = spnn->b1;
    doc["w2"] = matrix_to_json(spnn->w2);
    doc["b2"] = spnn->b2;
    doc["seed"] = spnn->hyper.seed;
  } else {
    const auto& lin = std::get<LinearQuantileModel>(file.model);
    doc["kind"] = "mqr";
    doc["n_x"] = lin.weights.cols();
    doc["n_h"] = 0;
    doc["levels"] = std::vector<double>(lin.levels.begin(), lin.levels.end());
    doc["hyper"] = hyper_to_json(lin.hyper);
    doc["w1"] = json::array();
    doc["b1"] = json::array();
    doc["w2"] = matrix_to_json(lin.weights);
    doc["b2"] = lin.bias;
    doc["seed"] = lin.hyper.seed;
  }
  if (file.standardizer) {
    doc["standardizer"] = {{"means", file.standardizer->means},
                           {"stds", file.standardizer->stds}};
  }
  return doc.dump(1) + "\n";
}

ModelFile load_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: invalid JSON: ") + e.what());
  }
  try {
    const int version = doc.at("schema_version").get<int>();
    if (version != kModelSchemaVersion) {
      throw DataError("model file: schema_version " + std::to_string(version) +
                      " is not supported (expected " + std::to_string(kModelSchemaVersion) + ")");
    }
    const auto n_x = doc.at("n_x").get<std::size_t>();
    const auto n_h = doc.at("n_h").get<std::size_t>();
    QuantileLevels levels(doc.at("levels").get<std::vector<double>>());
    const std::size_t m = levels.size();
    const HyperParams hyper = hyper_from_json(doc.at("hyper"));

    ModelFile file;
    if (n_h == 0) {
      file.model = LinearQuantileModel{matrix_from_json(doc.at("w2"), m, n_x, "w2"),
                                       vector_from_json(doc.at("b2"), m, "b2"), levels, hyper};
    } else {
      SpnnModel model{matrix_from_json(doc.at("w1"), n_h, n_x, "w1"),
                      vector_from_json(doc.at("b1"), n_h, "b1"),
                      matrix_from_json(doc.at("w2"), m, n_h, "w2"),
                      vector_from_json(doc.at("b2"), m, "b2"), levels, hyper};
      model.check_shapes();
      file.model = std::move(model);
    }
    if (doc.contains("standardizer")) {
      const auto& s = doc.at("standardizer");
      Standardizer st{vector_from_json(s.at("means"), n_x, "standardizer.means"),
                      vector_from_json(s.at("stds"), n_x, "standardizer.stds"),
                      std::vector<bool>(n_x, false)};
      file.standardizer = std::move(st);
    }
    return file;
  } catch (const json::exception& e) {
    throw DataError(std::string("model file: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("model file: ") + e.what());
  }
}

void save_model_file(const ModelFile& file, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write model file '" + path + "'");
  out << save_model(file);
}

ModelFile load_model_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_model(ss.str());
}

QuantileFan predict_fan(const ModelFile& file, const Matrix& standardized_features) {
  return std::visit([&](const auto& m) { return predict_fan(m, standardized_features); },
                    file.model);
}

std::string level_header(double tau) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "q%.3f", tau);
  return buf;
}

void write_fan_csv(std::ostream& out, std::span<const Timestamp> timestamps,
                   const QuantileFan& fan) {
  if (timestamps.size() != fan.rows()) {
    throw std::invalid_argument("write_fan_csv: timestamp count differs from fan rows");
  }
  out << "timestamp";
  for (double tau : fan.levels) out << ',' << level_header(tau);
  out << '\n';
  char buf[32];
  for (std::size_t t = 0; t < fan.rows(); ++t) {
    out << format_timestamp(timestamps[t]);
    for (double v : fan.values.row(t)) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace qfan
