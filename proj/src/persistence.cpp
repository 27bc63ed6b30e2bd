#include <bit>
#include <cstring>
#include <fstream>

#include "json.hpp"
#include "namerec/model.hpp"

namespace namerec {

static_assert(std::endian::native == std::endian::little, "model archives are written in host byte order");

using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'N', 'A', 'M', 'E', 'R', 'E', 'C', '1'};

void write_matrix(std::ofstream& out, const MatrixX<double>& m) {
  out.write(reinterpret_cast<const char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
}

MatrixX<double> read_matrix(std::ifstream& in, long rows, long cols) {
  MatrixX<double> m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!in) throw Error(ErrorCode::ParseError, "model archive truncated");
  return m;
}

std::string adapter_digest(const std::vector<LoraAdapter<double>>& adapters) {
  Sha256 h;
  for (const auto& a : adapters) {
    h.update(to_string(a.target));
    h.update(a.A.data(), sizeof(double) * static_cast<std::size_t>(a.A.size()));
    h.update(a.B.data(), sizeof(double) * static_cast<std::size_t>(a.B.size()));
  }
  return h.hex();
}

}  // namespace

std::size_t lora_param_count(const std::vector<MatrixShape>& shapes, int rank) {
  if (rank < 1) throw Error(ErrorCode::InvalidConfig, "LoRA rank must be at least 1");
  std::size_t total = 0;
  for (const auto& s : shapes) {
    total += static_cast<std::size_t>(s.rows) * static_cast<std::size_t>(rank) +
             static_cast<std::size_t>(rank) * static_cast<std::size_t>(s.cols);
  }
  return total;
}

std::vector<MatrixId> parse_matrix_ids(const std::vector<std::string>& names) {
  std::vector<MatrixId> out;
  for (const auto& n : names) out.push_back(parse_matrix_id(n));
  return out;
}

void save_model(const std::string& path, const SurrogateModel<double>& model) {
  const auto d = model.dims();
  json header;
  header["format"] = "namerec-model";
  header["version"] = 1;
  header["dims"] = {{"hidden", d.hidden}, {"embedding", d.embedding}, {"feature_width", d.feature_width},
                    {"vocab", d.vocab}};
  json vocab = json::array();
  for (int i = 0; i < model.tokenizer.size(); ++i) vocab.push_back(model.tokenizer.symbol(i));
  header["vocabulary"] = vocab;
  header["categories"] = model.categories.names();
  header["frozen"] = model.frozen;
  json matrices = json::array();
  for (MatrixId id : kAllMatrices) {
    const auto& m = model.base.get(id);
    matrices.push_back({{"id", to_string(id)}, {"rows", m.rows()}, {"cols", m.cols()}});
  }
  header["matrices"] = matrices;
  json adapters = json::array();
  for (const auto& a : model.adapters) {
    adapters.push_back({{"target", to_string(a.target)},
                        {"rank", a.rank()},
                        {"A", {a.A.rows(), a.A.cols()}},
                        {"B", {a.B.rows(), a.B.cols()}}});
  }
  header["adapters"] = adapters;
  header["base_digest"] = base_digest(model.base);
  header["adapter_digest"] = adapter_digest(model.adapters);
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write model " + path);
  out.write(kMagic, sizeof kMagic);
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (MatrixId id : kAllMatrices) write_matrix(out, model.base.get(id));
  for (const auto& a : model.adapters) {
    write_matrix(out, a.A);
    write_matrix(out, a.B);
  }
  if (!out) throw Error(ErrorCode::Io, "failed writing model " + path);
}

SurrogateModel<double> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open model " + path);
  char magic[8];
  in.read(magic, sizeof magic);
  if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0) throw Error(ErrorCode::ParseError, path + " is not a model archive");
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || len > (1u << 26)) throw Error(ErrorCode::ParseError, "bad model header length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));

  SurrogateModel<double> model;
  try {
    const json header = json::parse(text);
    if (header.at("format") != "namerec-model") throw Error(ErrorCode::ParseError, "unknown archive format");
    model.categories = CategorySet(header.at("categories").get<std::vector<std::string>>());
    model.frozen = header.at("frozen").get<bool>();
    if (static_cast<int>(header.at("vocabulary").size()) != model.tokenizer.size()) {
      throw Error(ErrorCode::ParseError, "vocabulary size mismatch");
    }
    for (const auto& m : header.at("matrices")) {
      const MatrixId id = parse_matrix_id(m.at("id").get<std::string>());
      model.base.get(id) = read_matrix(in, m.at("rows").get<long>(), m.at("cols").get<long>());
    }
    for (const auto& a : header.at("adapters")) {
      LoraAdapter<double> adapter;
      adapter.target = parse_matrix_id(a.at("target").get<std::string>());
      adapter.A = read_matrix(in, a.at("A")[0].get<long>(), a.at("A")[1].get<long>());
      adapter.B = read_matrix(in, a.at("B")[0].get<long>(), a.at("B")[1].get<long>());
      model.adapters.push_back(std::move(adapter));
    }
    if (base_digest(model.base) != header.at("base_digest").get<std::string>()) {
      throw Error(ErrorCode::ParseError, "base digest mismatch in " + path);
    }
    if (adapter_digest(model.adapters) != header.at("adapter_digest").get<std::string>()) {
      throw Error(ErrorCode::ParseError, "adapter digest mismatch in " + path);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path + ": " + e.what());
  }
  return model;
}

}  // namespace namerec
