#include "cropcast/archive.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "cropcast/error.hpp"
#include "json.hpp"

namespace cropcast::archive {

using nlohmann::json;

namespace {

json matrix_to_json(const Matrix& m) { return m.to_rows(); }

Matrix matrix_from_json(const json& j) {
  return Matrix::from_rows(j.get<std::vector<std::vector<double>>>());
}

json params_to_json(const hmm::HmmParams& p) {
  return {{"pi", p.pi}, {"A", matrix_to_json(p.A)}, {"B", matrix_to_json(p.B)}};
}

hmm::HmmParams params_from_json(const json& j) {
  hmm::HmmParams p;
  p.pi = j.at("pi").get<std::vector<double>>();
  p.A = matrix_from_json(j.at("A"));
  p.B = matrix_from_json(j.at("B"));
  return p;
}

json reals_to_json(const std::vector<double>& values) {
  json out = json::array();
  for (double v : values) {
    if (std::isfinite(v)) {
      out.push_back(v);
    } else {
      out.push_back(nullptr);
    }
  }
  return out;
}

std::vector<double> reals_from_json(const json& j) {
  std::vector<double> out;
  for (const auto& v : j) {
    out.push_back(v.is_null() ? -std::numeric_limits<double>::infinity() : v.get<double>());
  }
  return out;
}

json hmm_to_json(const HmmSnapshot& s) {
  json thresholds = nullptr;
  if (s.series.thresholds) {
    const auto& t = *s.series.thresholds;
    thresholds = {{"rainfall_split", t.rainfall_split},
                  {"temperature_split", t.temperature_split},
                  {"yield_low_cut", t.yield_low_cut},
                  {"yield_high_cut", t.yield_high_cut}};
  }
  return {
      {"states", s.states},
      {"symbols", s.symbols},
      {"counts",
       {{"transitions", s.counts.transitions},
        {"emissions", s.counts.emissions},
        {"state_counts", s.counts.state_counts},
        {"length", s.counts.length}}},
      {"count_based", params_to_json(s.count_based)},
      {"initial", params_to_json(s.initial)},
      {"trained", params_to_json(s.trained)},
      {"series",
       {{"years", s.series.years},
        {"states", s.series.states},
        {"observations", s.series.observations},
        {"thresholds", thresholds}}},
      {"symbol_values", s.symbol_values},
      {"training",
       {{"max_iterations", s.options.max_iterations},
        {"tolerance", s.options.tolerance},
        {"smoothing", s.options.smoothing},
        {"update_initial", s.options.update_initial},
        {"iterations", s.iterations},
        {"converged", s.converged},
        {"log_likelihood_trace", reals_to_json(s.log_likelihood_trace)},
        {"frozen_transition_rows", s.frozen_transition_rows},
        {"frozen_emission_rows", s.frozen_emission_rows}}},
  };
}

HmmSnapshot hmm_from_json(const json& j) {
  HmmSnapshot s;
  s.states = j.at("states").get<std::vector<std::string>>();
  s.symbols = j.at("symbols").get<std::vector<std::string>>();
  const auto& counts = j.at("counts");
  s.counts.transitions = counts.at("transitions").get<estimation::CountMatrix>();
  s.counts.emissions = counts.at("emissions").get<estimation::CountMatrix>();
  s.counts.state_counts = counts.at("state_counts").get<std::vector<std::size_t>>();
  s.counts.length = counts.at("length").get<std::size_t>();
  s.count_based = params_from_json(j.at("count_based"));
  s.initial = params_from_json(j.at("initial"));
  s.trained = params_from_json(j.at("trained"));
  const auto& series = j.at("series");
  s.series.years = series.at("years").get<std::vector<int>>();
  s.series.states = series.at("states").get<std::vector<std::size_t>>();
  s.series.observations = series.at("observations").get<std::vector<std::size_t>>();
  if (const auto& t = series.at("thresholds"); !t.is_null()) {
    s.series.thresholds = estimation::Thresholds{
        t.at("rainfall_split").get<double>(), t.at("temperature_split").get<double>(),
        t.at("yield_low_cut").get<double>(), t.at("yield_high_cut").get<double>()};
  }
  s.symbol_values = j.at("symbol_values").get<std::vector<double>>();
  const auto& training = j.at("training");
  s.options.max_iterations = training.at("max_iterations").get<std::size_t>();
  s.options.tolerance = training.at("tolerance").get<double>();
  s.options.smoothing = training.at("smoothing").get<double>();
  s.options.update_initial = training.at("update_initial").get<bool>();
  s.iterations = training.at("iterations").get<std::size_t>();
  s.converged = training.at("converged").get<bool>();
  s.log_likelihood_trace = reals_from_json(training.at("log_likelihood_trace"));
  s.frozen_transition_rows = training.at("frozen_transition_rows").get<std::vector<std::size_t>>();
  s.frozen_emission_rows = training.at("frozen_emission_rows").get<std::vector<std::size_t>>();
  return s;
}

json lstm_to_json(const LstmSnapshot& s) {
  const auto& c = s.config;
  const auto values = s.params.values();
  return {
      {"config",
       {{"hidden_size", c.hidden_size},
        {"input_size", c.input_size},
        {"window_length", c.window_length},
        {"epochs", c.epochs},
        {"batch_size", c.batch_size},
        {"dense_size", c.dense_size},
        {"learning_rate", c.learning_rate},
        {"adam_beta1", c.adam_beta1},
        {"adam_beta2", c.adam_beta2},
        {"adam_epsilon", c.adam_epsilon},
        {"seed", c.seed},
        {"train_fraction", c.train_fraction}}},
      {"parameters", std::vector<double>(values.begin(), values.end())},
      {"scaler", {{"min", s.scaler.minimum()}, {"max", s.scaler.maximum()}}},
      {"use_climate", s.use_climate},
      {"train_loss", s.train_loss},
      {"validation_loss", s.validation_loss},
      {"split", {{"train", s.split.train}, {"test", s.split.test}}},
      {"test_years", s.test_years},
      {"test_targets", s.test_targets},
      {"test_predictions", s.test_predictions},
  };
}

LstmSnapshot lstm_from_json(const json& j) {
  LstmSnapshot s;
  const auto& c = j.at("config");
  s.config.hidden_size = c.at("hidden_size").get<std::size_t>();
  s.config.input_size = c.at("input_size").get<std::size_t>();
  s.config.window_length = c.at("window_length").get<std::size_t>();
  s.config.epochs = c.at("epochs").get<std::size_t>();
  s.config.batch_size = c.at("batch_size").get<std::size_t>();
  s.config.dense_size = c.at("dense_size").get<std::size_t>();
  s.config.learning_rate = c.at("learning_rate").get<double>();
  s.config.adam_beta1 = c.at("adam_beta1").get<double>();
  s.config.adam_beta2 = c.at("adam_beta2").get<double>();
  s.config.adam_epsilon = c.at("adam_epsilon").get<double>();
  s.config.seed = c.at("seed").get<std::uint64_t>();
  s.config.train_fraction = c.at("train_fraction").get<double>();

  s.params = lstm::LstmParams(s.config.hidden_size, s.config.input_size, s.config.dense_size);
  const auto values = j.at("parameters").get<std::vector<double>>();
  if (values.size() != s.params.size()) {
    throw InputError("archive parameter count " + std::to_string(values.size()) +
                     " does not match the configured shape (" +
                     std::to_string(s.params.size()) + ")");
  }
  std::copy(values.begin(), values.end(), s.params.values().begin());

  s.scaler = lstm::MinMaxScaler(j.at("scaler").at("min").get<std::vector<double>>(),
                                j.at("scaler").at("max").get<std::vector<double>>());
  s.use_climate = j.at("use_climate").get<bool>();
  s.train_loss = j.at("train_loss").get<std::vector<double>>();
  s.validation_loss = j.at("validation_loss").get<std::vector<double>>();
  s.split.train = j.at("split").at("train").get<std::size_t>();
  s.split.test = j.at("split").at("test").get<std::size_t>();
  s.test_years = j.at("test_years").get<std::vector<int>>();
  s.test_targets = j.at("test_targets").get<std::vector<double>>();
  s.test_predictions = j.at("test_predictions").get<std::vector<double>>();
  return s;
}

json payload_json(const ModelArchive& archive) {
  if (const auto* h = std::get_if<HmmSnapshot>(&archive.payload)) return hmm_to_json(*h);
  return lstm_to_json(std::get<LstmSnapshot>(archive.payload));
}

}  // namespace

const char* to_string(ModelKind kind) { return kind == ModelKind::kHmm ? "hmm" : "lstm"; }

ModelKind ModelArchive::kind() const noexcept {
  return std::holds_alternative<HmmSnapshot>(payload) ? ModelKind::kHmm : ModelKind::kLstm;
}

std::string payload_bytes(const ModelArchive& archive) { return payload_json(archive).dump(); }

std::string dump(const ModelArchive& archive) {
  const json doc = {{"format_version", archive.format_version},
                    {"kind", to_string(archive.kind())},
                    {"created_utc", archive.created_utc},
                    {"payload", payload_json(archive)}};
  return doc.dump(2) + "\n";
}

ModelArchive parse(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("model archive is not valid JSON: ") + e.what());
  }
  try {
    ModelArchive archive;
    archive.format_version = doc.at("format_version").get<int>();
    if (archive.format_version != kFormatVersion) {
      throw InputError("unsupported model archive version " +
                       std::to_string(archive.format_version) + " (expected " +
                       std::to_string(kFormatVersion) + ")");
    }
    archive.created_utc = doc.value("created_utc", "");
    const auto kind = doc.at("kind").get<std::string>();
    if (kind == "hmm") {
      archive.payload = hmm_from_json(doc.at("payload"));
    } else if (kind == "lstm") {
      archive.payload = lstm_from_json(doc.at("payload"));
    } else {
      throw InputError("unknown model archive kind '" + kind + "'");
    }
    return archive;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed model archive: ") + e.what());
  }
}

void save(const std::filesystem::path& path, const ModelArchive& archive) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write model archive " + path.string());
  out << dump(archive);
  if (!out) throw InputError("failed writing model archive " + path.string());
}

ModelArchive load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open model archive " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

namespace {

[[noreturn]] void kind_mismatch(ModelKind wanted, ModelKind found) {
  throw ConfigError(std::string("model archive kind mismatch: expected ") + to_string(wanted) +
                    ", found " + to_string(found));
}

}  // namespace

const HmmSnapshot& expect_hmm(const ModelArchive& archive) {
  if (archive.kind() != ModelKind::kHmm) kind_mismatch(ModelKind::kHmm, archive.kind());
  return std::get<HmmSnapshot>(archive.payload);
}

const LstmSnapshot& expect_lstm(const ModelArchive& archive) {
  if (archive.kind() != ModelKind::kLstm) kind_mismatch(ModelKind::kLstm, archive.kind());
  return std::get<LstmSnapshot>(archive.payload);
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

}  // namespace cropcast::archive
