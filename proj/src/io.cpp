#include "dynlaw/io.hpp"

#include "dynlaw/errors.hpp"
#include "dynlaw/random.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace dynlaw {

namespace {

template <class T>
T field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(where + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(where + ": bad field '" + key + "': " + e.what());
  }
}

std::string degree_mode_name(DegreeMode m) { return m == DegreeMode::Bounded ? "bounded" : "fixed"; }

DegreeMode degree_mode_from(const std::string& s) {
  if (s == "bounded") return DegreeMode::Bounded;
  if (s == "fixed") return DegreeMode::Fixed;
  throw ConfigError("unknown degree mode '" + s + "'");
}

} // namespace

Json to_json(const TensorTrain& tt) {
  Json j;
  j["dims"] = tt.dims();
  j["ranks"] = tt.ranks();
  j["label_dim"] = tt.label_dim() ? Json(*tt.label_dim()) : Json(nullptr);
  Json cores = Json::array();
  for (const Core& c : tt.cores()) cores.push_back(std::vector<double>(c.data().begin(), c.data().end()));
  j["cores"] = std::move(cores);
  return j;
}

TensorTrain tensor_train_from_json(const Json& j) {
  const std::string where = "tensor train";
  const auto dims = field<std::vector<std::size_t>>(j, "dims", where);
  const auto ranks = field<std::vector<std::size_t>>(j, "ranks", where);
  const auto cores_json = field<std::vector<std::vector<double>>>(j, "cores", where);
  std::optional<std::size_t> label;
  if (j.contains("label_dim") && !j.at("label_dim").is_null()) label = j.at("label_dim").get<std::size_t>();
  if (ranks.size() != dims.size() + 1 || cores_json.size() != dims.size())
    throw DimensionError("tensor train: dims, ranks and cores disagree in length");
  std::vector<Core> cores;
  for (std::size_t l = 0; l < dims.size(); ++l) {
    if (cores_json[l].size() != ranks[l] * dims[l] * ranks[l + 1])
      throw DimensionError("tensor train: core " + std::to_string(l + 1) + " has the wrong entry count");
    cores.emplace_back(ranks[l], dims[l], ranks[l + 1], cores_json[l]);
  }
  return TensorTrain(std::move(cores), label);
}

Json to_json(const Dictionary& dict) {
  Json domains = Json::array();
  for (const Interval& iv : dict.domains()) domains.push_back({iv.lo, iv.hi});
  return {{"kind", to_string(dict.kind())},
          {"p", dict.size()},
          {"weights", dict.degree_map().weights()},
          {"domains", std::move(domains)}};
}

Dictionary dictionary_from_json(const Json& j) {
  const std::string where = "dictionary";
  const DictionaryKind kind = dictionary_kind_from_string(field<std::string>(j, "kind", where));
  const auto p = field<std::size_t>(j, "p", where);
  std::vector<Interval> domains;
  for (const auto& pair : field<std::vector<std::vector<double>>>(j, "domains", where)) {
    if (pair.size() != 2) throw ConfigError("dictionary: each domain needs two endpoints");
    domains.push_back({pair[0], pair[1]});
  }
  Dictionary dict(kind, p, std::move(domains));
  if (j.contains("weights") && j.at("weights").get<std::vector<int>>() != dict.degree_map().weights())
    throw ConfigError("dictionary: stored weights do not match the dictionary kind");
  return dict;
}

Json to_json(const SelectionTable& table) {
  Json j{{"d", table.order()}, {"alpha", table.alpha()}};
  if (table.interaction_length()) j["L"] = *table.interaction_length();
  else j["entries"] = table.entries();
  return j;
}

SelectionTable selection_table_from_json(const Json& j) {
  const std::string where = "selection table";
  const auto d = field<std::size_t>(j, "d", where);
  if (j.contains("L")) return local_selection_table(d, j.at("L").get<int>());
  return SelectionTable(d, field<int>(j, "alpha", where), field<std::vector<int>>(j, "entries", where));
}

Json patterns_to_json(const ModelEnsemble& ens) {
  Json labels = Json::array();
  Json blocks = Json::array();
  for (std::size_t l = 1; l <= ens.order(); ++l) {
    const BlockPattern& pat = ens.pattern(l);
    if (l == 1) labels.push_back({{"labels", pat.left().labels}, {"sizes", pat.left().sizes}});
    labels.push_back({{"labels", pat.right().labels}, {"sizes", pat.right().sizes}});
    Json core_blocks = Json::array();
    for (const BlockSpec& b : pat.blocks())
      core_blocks.push_back({{"i", b.phys + 1},
                             {"left_label", pat.left().labels[b.row]},
                             {"right_label", pat.right().labels[b.col]},
                             {"shape", {b.rows, b.cols}}});
    blocks.push_back(std::move(core_blocks));
  }
  return {{"lambda", ens.lambda()},
          {"rho", ens.rho()},
          {"degree_mode", degree_mode_name(ens.pattern(1).degree_mode())},
          {"labels", std::move(labels)},
          {"blocks", std::move(blocks)}};
}

Json to_json(const ModelEnsemble& ens) {
  Json cores = Json::array();
  for (std::size_t l = 1; l <= ens.order(); ++l) {
    Json per_type = Json::array();
    for (int t = 1; t <= ens.alpha(); ++t) {
      const Vector params = ens.core(l, t).parameters();
      per_type.push_back(std::vector<double>(params.data(), params.data() + params.size()));
    }
    cores.push_back(std::move(per_type));
  }
  return {{"schema_version", kSchemaVersion},
          {"dictionary", to_json(ens.dictionary())},
          {"table", to_json(ens.table())},
          {"pattern", patterns_to_json(ens)},
          {"cores", std::move(cores)}};
}

ModelEnsemble model_from_json(const Json& j) {
  const std::string where = "model";
  Dictionary dict = dictionary_from_json(field<Json>(j, "dictionary", where));
  SelectionTable table = selection_table_from_json(field<Json>(j, "table", where));
  const Json pat = field<Json>(j, "pattern", where);
  const int lambda = field<int>(pat, "lambda", "pattern");
  const auto rho = field<std::size_t>(pat, "rho", "pattern");
  const DegreeMode mode =
      pat.contains("degree_mode") ? degree_mode_from(pat.at("degree_mode").get<std::string>()) : DegreeMode::Bounded;
  auto patterns = chain_patterns(dict.degree_map(), lambda, table.order(), rho, mode);
  const auto params = field<std::vector<std::vector<std::vector<double>>>>(j, "cores", where);
  if (params.size() != table.order()) throw DimensionError("model: one core list per mode expected");
  std::vector<std::vector<BlockSparseCore>> cores(table.order());
  for (std::size_t l = 0; l < table.order(); ++l) {
    if (params[l].size() != static_cast<std::size_t>(table.alpha()))
      throw DimensionError("model: mode " + std::to_string(l + 1) + " needs one core per activation type");
    for (const auto& p : params[l]) {
      BlockSparseCore core(patterns[l]);
      if (p.size() != patterns[l]->free_count())
        throw DimensionError("model: core at mode " + std::to_string(l + 1) + " has the wrong parameter count");
      core.set_parameters(Eigen::Map<const Vector>(p.data(), static_cast<Eigen::Index>(p.size())));
      cores[l].push_back(std::move(core));
    }
  }
  return ModelEnsemble(std::move(dict), std::move(table), lambda, rho, std::move(patterns), std::move(cores));
}

std::string dump_json(const Json& j, int indent) { return j.dump(indent); }

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

void write_json_file(const std::filesystem::path& path, const Json& j) { write_text_file(path, dump_json(j) + "\n"); }

std::string config_hash(const Json& j) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash_tag(j.dump())));
  return buf;
}

namespace {
constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
}

std::string base64_encode(const std::vector<unsigned char>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i < bytes.size()) {
    unsigned v = bytes[i] << 16;
    if (i + 1 < bytes.size()) v |= bytes[i + 1] << 8;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += i + 1 < bytes.size() ? kAlphabet[(v >> 6) & 63] : '=';
    out += '=';
  }
  return out;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw InputError("base64: length is not a multiple of 4");
  auto value = [](char c) -> unsigned {
    if (c >= 'A' && c <= 'Z') return static_cast<unsigned>(c - 'A');
    if (c >= 'a' && c <= 'z') return static_cast<unsigned>(c - 'a' + 26);
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0' + 52);
    if (c == '+') return 62;
    if (c == '/') return 63;
    throw InputError(std::string("base64: invalid character '") + c + "'");
  };
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    const int pad = (text[i + 3] == '=') + (text[i + 2] == '=');
    if (pad > 0 && i + 4 != text.size()) throw InputError("base64: padding before the end");
    unsigned v = (value(text[i]) << 18) | (value(text[i + 1]) << 12);
    if (pad < 2) v |= value(text[i + 2]) << 6;
    if (pad < 1) v |= value(text[i + 3]);
    out.push_back(static_cast<unsigned char>((v >> 16) & 255));
    if (pad < 2) out.push_back(static_cast<unsigned char>((v >> 8) & 255));
    if (pad < 1) out.push_back(static_cast<unsigned char>(v & 255));
  }
  return out;
}

std::string encode_matrix(const Matrix& m) {
  std::vector<unsigned char> bytes(static_cast<std::size_t>(m.size()) * 8);
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    const auto bits = std::bit_cast<std::uint64_t>(m.data()[k]);
    for (int b = 0; b < 8; ++b) bytes[static_cast<std::size_t>(k) * 8 + b] = static_cast<unsigned char>(bits >> (8 * b));
  }
  return base64_encode(bytes);
}

Matrix decode_matrix(const std::string& text, Eigen::Index rows, Eigen::Index cols) {
  const auto bytes = base64_decode(text);
  if (bytes.size() != static_cast<std::size_t>(rows * cols) * 8)
    throw DimensionError("decode_matrix: payload does not hold " + std::to_string(rows) + "x" + std::to_string(cols) +
                         " doubles");
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) {
    std::uint64_t bits = 0;
    for (int b = 0; b < 8; ++b) bits |= std::uint64_t{bytes[static_cast<std::size_t>(k) * 8 + b]} << (8 * b);
    m.data()[k] = std::bit_cast<double>(bits);
  }
  return m;
}

Json dataset_to_json(const DatasetFile& file) {
  Json domains = Json::array();
  for (const Interval& iv : file.data.domains) domains.push_back({iv.lo, iv.hi});
  Json j = file.header;
  j["schema_version"] = kSchemaVersion;
  j["rows"] = file.data.samples();
  j["cols"] = file.data.modes();
  j["domains"] = std::move(domains);
  j["X"] = encode_matrix(file.data.X);
  j["Y"] = encode_matrix(file.data.Y);
  return j;
}

DatasetFile dataset_from_json(const Json& j) {
  const std::string where = "dataset";
  DatasetFile file;
  const auto rows = field<Eigen::Index>(j, "rows", where);
  const auto cols = field<Eigen::Index>(j, "cols", where);
  file.data.X = decode_matrix(field<std::string>(j, "X", where), rows, cols);
  file.data.Y = decode_matrix(field<std::string>(j, "Y", where), rows, cols);
  for (const auto& pair : field<std::vector<std::vector<double>>>(j, "domains", where)) {
    if (pair.size() != 2) throw ConfigError("dataset: each domain needs two endpoints");
    file.data.domains.push_back({pair[0], pair[1]});
  }
  file.header = j;
  for (const char* key : {"X", "Y", "rows", "cols", "domains"}) file.header.erase(key);
  file.data.validate();
  return file;
}

void write_dataset(const std::filesystem::path& path, const DatasetFile& file) {
  write_json_file(path, dataset_to_json(file));
}

DatasetFile read_dataset(const std::filesystem::path& path) { return dataset_from_json(read_json_file(path)); }

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

} // namespace

void write_dataset_csv(const std::filesystem::path& path, const TrainingSet& data) {
  std::ostringstream os;
  const auto d = static_cast<Eigen::Index>(data.modes());
  for (Eigen::Index k = 0; k < d; ++k) os << (k ? "," : "") << "x_" << k + 1;
  for (Eigen::Index k = 0; k < d; ++k) os << ",y_" << k + 1;
  os << '\n';
  for (Eigen::Index m = 0; m < data.X.rows(); ++m) {
    for (Eigen::Index k = 0; k < d; ++k) os << (k ? "," : "") << fmt(data.X(m, k));
    for (Eigen::Index k = 0; k < d; ++k) os << ',' << fmt(data.Y(m, k));
    os << '\n';
  }
  write_text_file(path, os.str());
}

std::string history_csv(const TrainHistory& history) {
  std::ostringstream os;
  os << "sweep,step,ell,type,restricted_loss,full_loss,millis,kind,left_type,loss_before,flags,proposed_loss,target_energy\n";
  for (const StepRecord& s : history.steps)
    os << s.sweep << ',' << s.step << ',' << s.ell << ',' << s.type << ',' << fmt(s.restricted_loss) << ','
       << fmt(s.full_loss) << ',' << fmt(s.millis) << ',' << s.kind << ',' << s.left_type << ','
       << fmt(s.loss_before) << ',' << s.flags << ',' << fmt(s.proposed_loss) << ',' << fmt(s.target_energy) << '\n';
  return os.str();
}

std::string result_csv_line(const ResultRow& r) {
  std::ostringstream os;
  os << r.system << ',' << r.d << ',' << r.M << ',' << fmt(r.sigma) << ',' << r.rho << ',' << r.L << ','
     << r.restart << ',' << fmt(r.residuum) << ',' << fmt(r.seconds) << ',' << r.status << ',' << r.config_hash;
  return os.str();
}

ResultRow parse_result_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (cells.size() != 11) throw InputError("results row needs 11 columns: '" + line + "'");
  try {
    ResultRow r;
    r.system = cells[0];
    r.d = std::stoul(cells[1]);
    r.M = std::stoul(cells[2]);
    r.sigma = std::stod(cells[3]);
    r.rho = std::stoul(cells[4]);
    r.L = std::stoi(cells[5]);
    r.restart = std::stoi(cells[6]);
    r.residuum = std::stod(cells[7]);
    r.seconds = std::stod(cells[8]);
    r.status = cells[9];
    r.config_hash = cells[10];
    return r;
  } catch (const std::logic_error&) {
    throw InputError("malformed results row: '" + line + "'");
  }
}

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path) {
  std::vector<ResultRow> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (!line.empty()) rows.push_back(parse_result_line(line));
  }
  return rows;
}

void append_result_row(const std::filesystem::path& path, const ResultRow& row) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path) == 0;
  std::ofstream out(path, std::ios::app);
  if (!out) throw ConfigError("cannot append to '" + path.string() + "'");
  if (fresh) out << kResultsHeader << '\n';
  out << result_csv_line(row) << '\n';
}

Json to_json(const InterfaceDiagnostics& diag) {
  Json renyi = Json::object();
  for (const auto& [alpha, s] : diag.renyi) renyi[fmt(alpha)] = s;
  Json weak = Json::object();
  for (const auto& [p, n] : diag.weak_lp) weak[fmt(p)] = n;
  return {{"interface", diag.interface},
          {"singular_values", diag.singular_values},
          {"rank", diag.rank},
          {"renyi", std::move(renyi)},
          {"weak_lp", std::move(weak)}};
}

} // namespace dynlaw
