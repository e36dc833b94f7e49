#pragma once

// Experiment configuration: strict JSON config files, CLI flag overlays,
// and the fully resolved record embedded into every report. Unknown fields
// are rejected; every accepted field lands in the resolved config, which is
// what the report hash covers.

#include <ncglab/dirac.hpp>
#include <ncglab/models.hpp>
#include <ncglab/opcore.hpp>
#include <ncglab/report.hpp>

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace ncglab {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace cfgdetail {

using nlohmann::json;

inline void reject_unknown(const json& obj, const std::vector<std::string>& allowed,
                           const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool ok = false;
    for (const auto& k : allowed) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw UsageError("unknown config field \"" + it.key() + "\" in " + where);
  }
}

inline std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char c : s) {
    if (c == '(' || c == '[') ++depth;
    if (c == ')' || c == ']') --depth;
    if (c == ',' && depth == 0) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

inline std::size_t parse_positive(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(trim(s), &pos);
    if (pos != trim(s).size() || v < 1) throw std::invalid_argument("");
    return static_cast<std::size_t>(v);
  } catch (...) {
    throw UsageError("expected a positive integer for " + what + ", got \"" + s + "\"");
  }
}

inline double parse_real(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(trim(s), &pos);
    if (pos != trim(s).size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw UsageError("expected a number for " + what + ", got \"" + s + "\"");
  }
}

// "default" | "r1,r2,..." | "a..b" (inclusive unit-step range)
inline std::vector<std::size_t> parse_rank_list(const std::string& text, const std::string& what) {
  std::vector<std::size_t> out;
  const std::string t = trim(text);
  const auto dots = t.find("..");
  if (dots != std::string::npos) {
    const std::size_t a = parse_positive(t.substr(0, dots), what);
    const std::size_t b = parse_positive(t.substr(dots + 2), what);
    if (b < a) throw UsageError(what + ": range upper bound below lower bound");
    for (std::size_t r = a; r <= b; ++r) out.push_back(r);
    return out;
  }
  for (const auto& part : split_csv(t)) {
    if (trim(part).empty()) continue;
    out.push_back(parse_positive(part, what));
  }
  if (out.empty()) throw UsageError(what + ": empty list");
  return out;
}

}  // namespace cfgdetail

/// Flag values as given on the command line; empty string means absent.
struct CliOverrides {
  std::string config_path;
  std::string model;
  std::string elements;
  std::string closure_depth;
  std::string alpha;
  std::string chain;
  std::string dims;
  std::string tail_index;
  std::string p;
  std::string k_max;
  std::string multiplicities;
  std::string n;
  std::string reference_dim;
  std::string budget;
  std::string symbol;
  std::string samples;
  std::string out;
  std::string format;
  std::string assert_verdict;
};

struct ExperimentConfig {
  std::string command;
  std::optional<RepresentationModel> model;
  std::vector<ElementDescriptor> elements;
  std::vector<std::string> element_texts;
  std::size_t closure_depth = 3;
  std::optional<AlphaSequence> alpha;
  std::vector<std::size_t> chain_ranks;  // empty -> model default at ambient
  bool chain_default = true;
  std::vector<std::size_t> dims;
  std::size_t tail_index = 2;
  std::vector<double> p_values;
  std::size_t k_max = 1u << 20;
  std::vector<std::size_t> multiplicities;
  std::vector<std::size_t> n_values;
  std::size_t reference_dim = 0;  // 0 -> 2x ambient
  std::size_t budget = 0;         // 0 -> chain length
  std::vector<std::string> symbol_texts;
  std::size_t samples = 4096;
  Tolerance tol;
  std::string format = "json";
  std::string out_path;
  std::string assert_verdict;

  nlohmann::json resolved;  // canonical record, hash-covered
  std::string config_hash;

  /// Ambient truncation for select/qd (single entry of dims).
  std::size_t ambient() const {
    return dims.empty() ? 0 : dims.front();
  }

  ProjectionChain make_chain() const {
    const std::size_t N = ambient();
    if (N == 0) throw UsageError("command needs an ambient dimension (--dims N)");
    if (chain_default) return ProjectionChain(N, default_chain(*model, N));
    return ProjectionChain(N, chain_ranks);
  }
};

namespace cfgdetail {

inline RepresentationModel parse_model_json(const json& j) {
  if (j.is_string()) {
    const std::string name = j.get<std::string>();
    if (name == "toeplitz") return RepresentationModel::toeplitz();
    if (name == "compacts_unit") return RepresentationModel::compacts_unit();
    if (name == "diagonal") return RepresentationModel::diagonal();
    throw UsageError("unknown model name \"" + name + "\" (rfd needs a parameter object)");
  }
  if (!j.is_object()) throw UsageError("model must be a name or an object");
  reject_unknown(j, {"name", "sequence", "blocks"}, "model");
  if (!j.contains("name")) throw UsageError("model object needs a \"name\"");
  const std::string name = j["name"].get<std::string>();
  if (name == "toeplitz") return RepresentationModel::toeplitz();
  if (name == "compacts_unit") return RepresentationModel::compacts_unit();
  if (name == "diagonal") {
    DiagonalSequence seq;
    if (j.contains("sequence")) {
      const auto& s = j["sequence"];
      if (s.is_string()) {
        if (s.get<std::string>() != "inv_index") {
          throw UsageError("diagonal sequence must be \"inv_index\" or a number list");
        }
      } else if (s.is_array()) {
        seq.kind = DiagonalSequence::Kind::custom;
        for (const auto& v : s) seq.values.push_back(v.get<double>());
        if (seq.values.empty()) throw UsageError("diagonal sequence list is empty");
      } else {
        throw UsageError("diagonal sequence must be \"inv_index\" or a number list");
      }
    }
    return RepresentationModel::diagonal(std::move(seq));
  }
  if (name == "rfd") {
    if (!j.contains("blocks")) throw UsageError("rfd model needs \"blocks\"");
    std::vector<RfdBlock> blocks;
    for (const auto& b : j["blocks"]) {
      RfdBlock rb;
      if (b.is_array() && b.size() == 2) {
        rb.dim = b[0].get<std::size_t>();
        rb.count = b[1].get<std::size_t>();
      } else if (b.is_object()) {
        reject_unknown(b, {"dim", "count"}, "rfd block");
        rb.dim = b.at("dim").get<std::size_t>();
        rb.count = b.contains("count") ? b["count"].get<std::size_t>() : 1;
      } else if (b.is_number_unsigned()) {
        rb.dim = b.get<std::size_t>();
      } else {
        throw UsageError("rfd block must be dim, [dim,count], or {dim,count}");
      }
      blocks.push_back(rb);
    }
    try {
      return RepresentationModel::rfd(std::move(blocks));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  throw UsageError("unknown model name \"" + name + "\"");
}

// Flag form: "toeplitz" | "diagonal" | "diagonal:v1,v2,..." | "rfd:2x3,3"
inline RepresentationModel parse_model_text(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = trim(colon == std::string::npos ? text : text.substr(0, colon));
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  if (name == "toeplitz" || name == "compacts_unit") {
    if (!arg.empty()) throw UsageError("model " + name + " takes no parameters");
    return name == "toeplitz" ? RepresentationModel::toeplitz()
                              : RepresentationModel::compacts_unit();
  }
  if (name == "diagonal") {
    if (arg.empty() || trim(arg) == "inv_index") return RepresentationModel::diagonal();
    DiagonalSequence seq;
    seq.kind = DiagonalSequence::Kind::custom;
    for (const auto& part : split_csv(arg)) seq.values.push_back(parse_real(part, "diagonal sequence"));
    return RepresentationModel::diagonal(std::move(seq));
  }
  if (name == "rfd") {
    if (arg.empty()) throw UsageError("rfd model needs blocks, e.g. rfd:2x3,3");
    std::vector<RfdBlock> blocks;
    for (const auto& part : split_csv(arg)) {
      const std::string t = trim(part);
      const auto x = t.find('x');
      RfdBlock rb;
      if (x == std::string::npos) {
        rb.dim = parse_positive(t, "rfd block dim");
      } else {
        rb.dim = parse_positive(t.substr(0, x), "rfd block dim");
        rb.count = parse_positive(t.substr(x + 1), "rfd block count");
      }
      blocks.push_back(rb);
    }
    try {
      return RepresentationModel::rfd(std::move(blocks));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  throw UsageError("unknown model \"" + name + "\"");
}

// "harmonic" | "power:1.5" | "geometric:2" | "custom:1,2,3"
inline AlphaSequence parse_alpha_text(const std::string& text) {
  const auto colon = text.find(':');
  const std::string name = trim(colon == std::string::npos ? text : text.substr(0, colon));
  const std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  try {
    if (name == "harmonic") {
      if (!arg.empty()) throw UsageError("harmonic alpha takes no parameter");
      return AlphaSequence::harmonic();
    }
    if (name == "power") return AlphaSequence::power(parse_real(arg, "alpha exponent"));
    if (name == "geometric") return AlphaSequence::geometric(parse_real(arg, "alpha ratio"));
    if (name == "custom") {
      std::vector<double> vals;
      for (const auto& part : split_csv(arg)) vals.push_back(parse_real(part, "alpha value"));
      return AlphaSequence::custom(std::move(vals));
    }
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  throw UsageError("unknown alpha kind \"" + name + "\"");
}

inline AlphaSequence parse_alpha_json(const json& j) {
  if (j.is_string()) return parse_alpha_text(j.get<std::string>());
  if (!j.is_object()) throw UsageError("alpha must be a string or an object");
  reject_unknown(j, {"kind", "exponent", "ratio", "values", "signs"}, "alpha");
  const std::string kind = j.at("kind").get<std::string>();
  AlphaSequence base = [&] {
    try {
      if (kind == "harmonic") return AlphaSequence::harmonic();
      if (kind == "power") return AlphaSequence::power(j.at("exponent").get<double>());
      if (kind == "geometric") return AlphaSequence::geometric(j.at("ratio").get<double>());
      if (kind == "custom") {
        std::vector<double> vals;
        for (const auto& v : j.at("values")) vals.push_back(v.get<double>());
        return AlphaSequence::custom(std::move(vals));
      }
      throw UsageError("unknown alpha kind \"" + kind + "\"");
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }();
  if (j.contains("signs")) {
    std::vector<int> signs;
    for (const auto& v : j["signs"]) signs.push_back(v.get<int>());
    try {
      base = base.with_signs(std::move(signs));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  return base;
}

inline json alpha_to_json(const AlphaSequence& a) {
  json j;
  switch (a.kind()) {
    case AlphaSequence::Kind::harmonic: j["kind"] = "harmonic"; break;
    case AlphaSequence::Kind::power:
      j["kind"] = "power";
      j["exponent"] = a.parameter();
      break;
    case AlphaSequence::Kind::geometric:
      j["kind"] = "geometric";
      j["ratio"] = a.parameter();
      break;
    case AlphaSequence::Kind::custom: {
      j["kind"] = "custom";
      const std::size_t len = *a.finite_length();
      j["values"] = json::array();
      for (double v : a.values(len)) j["values"].push_back(v);
      break;
    }
  }
  return j;
}

inline json model_to_json(const RepresentationModel& m) {
  json j;
  j["name"] = m.name();
  if (m.kind() == ModelKind::diagonal) {
    const auto& seq = m.diagonal_sequence();
    if (seq.kind == DiagonalSequence::Kind::inv_index) j["sequence"] = "inv_index";
    else j["sequence"] = seq.values;
  }
  if (m.kind() == ModelKind::rfd) {
    j["blocks"] = json::array();
    for (const auto& b : m.rfd_blocks()) j["blocks"].push_back({b.dim, b.count});
  }
  return j;
}

inline ElementDescriptor parse_element_json(const json& j) {
  if (j.is_string()) {
    try {
      return parse_element(j.get<std::string>());
    } catch (const DescriptorError& e) {
      throw UsageError(e.what());
    }
  }
  if (!j.is_object()) throw UsageError("element must be a string or a block object");
  reject_unknown(j, {"kind", "index", "matrix"}, "element");
  if (j.at("kind").get<std::string>() != "block") {
    throw UsageError("element objects support only kind \"block\"");
  }
  const std::size_t index = j.at("index").get<std::size_t>();
  const auto& rows = j.at("matrix");
  if (!rows.is_array() || rows.empty()) throw UsageError("block element matrix must be a nonempty array");
  const std::size_t n = rows.size();
  CMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < n; ++r) {
    if (!rows[r].is_array() || rows[r].size() != n) {
      throw UsageError("block element matrix must be square");
    }
    for (std::size_t c = 0; c < n; ++c) {
      const auto& cell = rows[r][c];
      if (cell.is_number()) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = cell.get<double>();
      } else if (cell.is_array() && cell.size() == 2) {
        m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            Complex{cell[0].get<double>(), cell[1].get<double>()};
      } else {
        throw UsageError("block matrix entries must be numbers or [re, im] pairs");
      }
    }
  }
  try {
    return ElementDescriptor::block_element(index, std::move(m));
  } catch (const DescriptorError& e) {
    throw UsageError(e.what());
  }
}

inline json element_to_json(const ElementDescriptor& e, const json& original) {
  // Block elements keep their structured form; everything else round-trips
  // through the canonical label.
  if (original.is_object()) return original;
  return e.label();
}

}  // namespace cfgdetail

/// Loads (optional) config file, overlays flags, validates per command, and
/// produces the resolved record plus its hash.
inline ExperimentConfig load_config(const std::string& command, const CliOverrides& ov) {
  using cfgdetail::json;
  ExperimentConfig cfg;
  cfg.command = command;

  json file = json::object();
  if (!ov.config_path.empty()) {
    std::ifstream in(ov.config_path);
    if (!in) throw UsageError("cannot open config file: " + ov.config_path);
    try {
      in >> file;
    } catch (const std::exception& e) {
      throw UsageError("config file is not valid JSON: " + std::string(e.what()));
    }
    if (!file.is_object()) throw UsageError("config file must hold a JSON object");
    cfgdetail::reject_unknown(
        file,
        {"command", "model", "elements", "closure_depth", "alpha", "chain", "dims", "tail_index",
         "p", "Kmax", "multiplicities", "n", "reference_dim", "budget", "symbols", "samples",
         "tolerance", "format", "out", "assert"},
        "config file");
    if (file.contains("command") && file["command"].get<std::string>() != command) {
      throw UsageError("config file command \"" + file["command"].get<std::string>() +
                       "\" does not match subcommand \"" + command + "\"");
    }
  }

  // model
  std::vector<json> element_sources;
  if (!ov.model.empty()) cfg.model = cfgdetail::parse_model_text(ov.model);
  else if (file.contains("model")) cfg.model = cfgdetail::parse_model_json(file["model"]);

  // elements
  if (!ov.elements.empty()) {
    for (const auto& part : cfgdetail::split_csv(ov.elements)) {
      const std::string t = cfgdetail::trim(part);
      if (t.empty()) continue;
      try {
        cfg.elements.push_back(parse_element(t));
      } catch (const DescriptorError& e) {
        throw UsageError(e.what());
      }
      element_sources.push_back(t);
    }
  } else if (file.contains("elements")) {
    if (!file["elements"].is_array()) throw UsageError("elements must be an array");
    for (const auto& ej : file["elements"]) {
      cfg.elements.push_back(cfgdetail::parse_element_json(ej));
      element_sources.push_back(ej);
    }
  }
  for (std::size_t i = 0; i < cfg.elements.size(); ++i) {
    cfg.element_texts.push_back(cfg.elements[i].label());
  }

  // scalars and lists
  if (!ov.closure_depth.empty()) cfg.closure_depth = cfgdetail::parse_positive(ov.closure_depth, "--closure-depth");
  else if (file.contains("closure_depth")) cfg.closure_depth = file["closure_depth"].get<std::size_t>();

  if (!ov.alpha.empty()) cfg.alpha = cfgdetail::parse_alpha_text(ov.alpha);
  else if (file.contains("alpha")) cfg.alpha = cfgdetail::parse_alpha_json(file["alpha"]);

  if (!ov.chain.empty()) {
    if (cfgdetail::trim(ov.chain) == "default") cfg.chain_default = true;
    else {
      cfg.chain_default = false;
      cfg.chain_ranks = cfgdetail::parse_rank_list(ov.chain, "--chain");
    }
  } else if (file.contains("chain")) {
    if (file["chain"].is_string()) {
      if (file["chain"].get<std::string>() == "default") cfg.chain_default = true;
      else {
        cfg.chain_default = false;
        cfg.chain_ranks = cfgdetail::parse_rank_list(file["chain"].get<std::string>(), "chain");
      }
    } else if (file["chain"].is_array()) {
      cfg.chain_default = false;
      for (const auto& v : file["chain"]) cfg.chain_ranks.push_back(v.get<std::size_t>());
    } else {
      throw UsageError("chain must be \"default\", a rank array, or a range string");
    }
  }

  if (!ov.dims.empty()) cfg.dims = cfgdetail::parse_rank_list(ov.dims, "--dims");
  else if (file.contains("dims")) {
    for (const auto& v : file["dims"]) cfg.dims.push_back(v.get<std::size_t>());
  }

  if (!ov.tail_index.empty()) cfg.tail_index = cfgdetail::parse_positive(ov.tail_index, "--tail-index");
  else if (file.contains("tail_index")) cfg.tail_index = file["tail_index"].get<std::size_t>();

  if (!ov.p.empty()) {
    for (const auto& part : cfgdetail::split_csv(ov.p)) cfg.p_values.push_back(cfgdetail::parse_real(part, "--p"));
  } else if (file.contains("p")) {
    if (file["p"].is_array()) {
      for (const auto& v : file["p"]) cfg.p_values.push_back(v.get<double>());
    } else {
      cfg.p_values.push_back(file["p"].get<double>());
    }
  }

  if (!ov.k_max.empty()) cfg.k_max = cfgdetail::parse_positive(ov.k_max, "--Kmax");
  else if (file.contains("Kmax")) cfg.k_max = file["Kmax"].get<std::size_t>();

  if (!ov.multiplicities.empty()) {
    for (const auto& part : cfgdetail::split_csv(ov.multiplicities)) {
      cfg.multiplicities.push_back(cfgdetail::parse_positive(part, "--multiplicities"));
    }
  } else if (file.contains("multiplicities")) {
    for (const auto& v : file["multiplicities"]) cfg.multiplicities.push_back(v.get<std::size_t>());
  }

  if (!ov.n.empty()) cfg.n_values = cfgdetail::parse_rank_list(ov.n, "--n");
  else if (file.contains("n")) {
    for (const auto& v : file["n"]) cfg.n_values.push_back(v.get<std::size_t>());
  }

  if (!ov.reference_dim.empty()) cfg.reference_dim = cfgdetail::parse_positive(ov.reference_dim, "--reference-dim");
  else if (file.contains("reference_dim")) cfg.reference_dim = file["reference_dim"].get<std::size_t>();

  if (!ov.budget.empty()) cfg.budget = cfgdetail::parse_positive(ov.budget, "--budget");
  else if (file.contains("budget")) cfg.budget = file["budget"].get<std::size_t>();

  if (!ov.symbol.empty()) {
    for (const auto& part : cfgdetail::split_csv(ov.symbol)) {
      const std::string t = cfgdetail::trim(part);
      if (!t.empty()) cfg.symbol_texts.push_back(t);
    }
  } else if (file.contains("symbols")) {
    for (const auto& v : file["symbols"]) cfg.symbol_texts.push_back(v.get<std::string>());
  }

  if (!ov.samples.empty()) cfg.samples = cfgdetail::parse_positive(ov.samples, "--samples");
  else if (file.contains("samples")) cfg.samples = file["samples"].get<std::size_t>();

  if (file.contains("tolerance")) {
    const auto& t = file["tolerance"];
    cfgdetail::reject_unknown(t, {"exact_eq", "bound_slack"}, "tolerance");
    if (t.contains("exact_eq")) cfg.tol.exact_eq = t["exact_eq"].get<double>();
    if (t.contains("bound_slack")) cfg.tol.bound_slack = t["bound_slack"].get<double>();
    try {
      cfg.tol.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }

  if (!ov.format.empty()) cfg.format = ov.format;
  else if (file.contains("format")) cfg.format = file["format"].get<std::string>();
  if (cfg.format != "json" && cfg.format != "csv") {
    throw UsageError("format must be json or csv, got \"" + cfg.format + "\"");
  }

  if (!ov.out.empty()) cfg.out_path = ov.out;
  else if (file.contains("out")) cfg.out_path = file["out"].get<std::string>();

  if (!ov.assert_verdict.empty()) cfg.assert_verdict = ov.assert_verdict;
  else if (file.contains("assert")) cfg.assert_verdict = file["assert"].get<std::string>();

  // Per-command validation.
  auto need_model = [&] {
    if (!cfg.model) throw UsageError(command + " needs --model");
  };
  auto need_alpha = [&] {
    if (!cfg.alpha) throw UsageError(command + " needs --alpha");
  };
  auto need_elements = [&] {
    if (cfg.elements.empty()) throw UsageError(command + " needs --elements");
  };
  auto need_single_ambient = [&] {
    if (cfg.dims.size() != 1) {
      throw UsageError(command + " needs exactly one ambient dimension (--dims N)");
    }
  };
  if (command == "verify") {
    need_model();
    need_elements();
    need_alpha();
    if (cfg.dims.empty()) throw UsageError("verify needs --dims");
    if (cfg.tail_index < 1 || cfg.tail_index >= cfg.dims.front()) {
      throw UsageError("verify needs 1 <= tail_index < min(dims)");
    }
  } else if (command == "summability") {
    need_alpha();
    if (cfg.p_values.empty()) throw UsageError("summability needs --p");
  } else if (command == "select") {
    need_model();
    need_elements();
    need_alpha();
    need_single_ambient();
  } else if (command == "qd") {
    need_model();
    need_elements();
    need_single_ambient();
    if (cfg.n_values.empty()) throw UsageError("qd needs --n");
  } else if (command == "index") {
    if (cfg.symbol_texts.empty()) throw UsageError("index needs --symbol");
  } else if (command != "models") {
    throw UsageError("unknown command \"" + command + "\"");
  }

  // Resolved canonical record (nlohmann keeps object keys sorted).
  json r;
  r["command"] = command;
  if (cfg.model) r["model"] = cfgdetail::model_to_json(*cfg.model);
  if (!cfg.elements.empty()) {
    r["elements"] = json::array();
    for (std::size_t i = 0; i < cfg.elements.size(); ++i) {
      r["elements"].push_back(cfgdetail::element_to_json(
          cfg.elements[i], i < element_sources.size() ? element_sources[i] : json{}));
    }
  }
  if (command == "select") r["closure_depth"] = cfg.closure_depth;
  if (cfg.alpha) r["alpha"] = cfgdetail::alpha_to_json(*cfg.alpha);
  if (command == "select" || command == "qd") {
    r["chain"] = cfg.chain_default ? json("default") : json(cfg.chain_ranks);
  }
  if (!cfg.dims.empty()) r["dims"] = cfg.dims;
  if (command == "verify") r["tail_index"] = cfg.tail_index;
  if (command == "summability") {
    r["p"] = cfg.p_values;
    r["Kmax"] = cfg.k_max;
    if (!cfg.multiplicities.empty()) r["multiplicities"] = cfg.multiplicities;
  }
  if (command == "qd") {
    r["n"] = cfg.n_values;
    r["reference_dim"] = cfg.reference_dim == 0 ? 2 * cfg.ambient() : cfg.reference_dim;
  }
  if (command == "select") {
    std::size_t budget = cfg.budget;
    if (budget == 0) {
      budget = cfg.chain_default ? default_chain(*cfg.model, cfg.ambient()).size()
                                 : cfg.chain_ranks.size();
    }
    r["budget"] = budget;
  }
  if (command == "index") {
    r["symbols"] = cfg.symbol_texts;
    r["samples"] = cfg.samples;
  }
  r["tolerance"] = {{"exact_eq", cfg.tol.exact_eq}, {"bound_slack", cfg.tol.bound_slack}};
  r["format"] = cfg.format;
  cfg.resolved = std::move(r);
  cfg.config_hash = hex64(fnv1a(cfg.resolved.dump()));
  return cfg;
}

}  // namespace ncglab
