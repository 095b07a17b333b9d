#pragma once

// JSON and CSV serialisation of trains, dictionaries, ensembles, datasets,
// training histories and result rows.

#include "dynlaw/als.hpp"
#include "dynlaw/rank_theory.hpp"
#include "dynlaw/selection.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace dynlaw {

using Json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

Json to_json(const TensorTrain& tt);
TensorTrain tensor_train_from_json(const Json& j);

Json to_json(const Dictionary& dict);
Dictionary dictionary_from_json(const Json& j);

Json to_json(const SelectionTable& table);
SelectionTable selection_table_from_json(const Json& j);

/// Pattern metadata of every core of a chain.
Json patterns_to_json(const ModelEnsemble& ens);

Json to_json(const ModelEnsemble& ens);
ModelEnsemble model_from_json(const Json& j);

/// Doubles are printed in their shortest round-trip decimal form.
std::string dump_json(const Json& j, int indent = 1);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
void write_json_file(const std::filesystem::path& path, const Json& j);

/// 16 hex digits of FNV-1a over the compact dump.
std::string config_hash(const Json& j);

std::string base64_encode(const std::vector<unsigned char>& bytes);
std::vector<unsigned char> base64_decode(const std::string& text);

/// Column-major doubles, little endian, base64.
std::string encode_matrix(const Matrix& m);
Matrix decode_matrix(const std::string& text, Eigen::Index rows, Eigen::Index cols);

struct DatasetFile {
  Json header;  // system, sampler, M, sigma, seed, schema_version, config_hash
  TrainingSet data;
};

Json dataset_to_json(const DatasetFile& file);
DatasetFile dataset_from_json(const Json& j);
void write_dataset(const std::filesystem::path& path, const DatasetFile& file);
DatasetFile read_dataset(const std::filesystem::path& path);
/// x_1..x_d, y_1..y_d per row.
void write_dataset_csv(const std::filesystem::path& path, const TrainingSet& data);

/// sweep, step, ell, type, restricted_loss, full_loss, millis, kind,
/// left_type, loss_before, flags, proposed_loss.
std::string history_csv(const TrainHistory& history);

struct ResultRow {
  std::string system;
  std::size_t d = 0;
  std::size_t M = 0;
  double sigma = 0.0;
  std::size_t rho = 0;
  int L = 0;
  int restart = 0;
  double residuum = 0.0;
  double seconds = 0.0;
  std::string status;
  std::string config_hash;
};

inline constexpr const char* kResultsHeader = "system,d,M,sigma,rho,L,restart,residuum,seconds,status,config_hash";

std::string result_csv_line(const ResultRow& row);
ResultRow parse_result_line(const std::string& line);
std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);
/// Writes the header first when the file is new or empty.
void append_result_row(const std::filesystem::path& path, const ResultRow& row);

Json to_json(const InterfaceDiagnostics& diag);

} // namespace dynlaw
