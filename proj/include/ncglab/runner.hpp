#pragma once

// Experiment dispatch and report serialization. A run produces a
// ReportBundle; to_json / to_csv render it byte-deterministically (fixed key
// order, 17 significant digits, no timestamps in the payload).

#include <ncglab/config.hpp>
#include <ncglab/dirac.hpp>
#include <ncglab/models.hpp>
#include <ncglab/qdiag.hpp>
#include <ncglab/report.hpp>
#include <ncglab/verify.hpp>
#include <ncglab/version.hpp>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace ncglab {

namespace rundetail {

inline std::size_t thread_cap() {
  const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
  const char* env = std::getenv("NCGLAB_THREADS");
  if (!env || !*env) return hw;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || v < 1) return hw;
  return std::min<std::size_t>(hw, static_cast<std::size_t>(v));
}

/// Runs body(0..jobs-1) on up to NCGLAB_THREADS workers. Results must be
/// written into pre-sized slots so ordering never depends on scheduling.
template <typename F>
inline void parallel_for(std::size_t jobs, F&& body) {
  const std::size_t workers = std::min(jobs, thread_cap());
  if (workers <= 1) {
    for (std::size_t i = 0; i < jobs; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

/// Replays an nlohmann value through the deterministic writer so config
/// floats render with the same 17-digit format as everything else.
inline void write_json_value(JsonWriter& w, const nlohmann::json& j) {
  using nlohmann::json;
  switch (j.type()) {
    case json::value_t::object: {
      w.begin_object();
      for (auto it = j.begin(); it != j.end(); ++it) {
        w.key(it.key());
        write_json_value(w, it.value());
      }
      w.end_object();
      break;
    }
    case json::value_t::array: {
      w.begin_array();
      for (const auto& v : j) write_json_value(w, v);
      w.end_array();
      break;
    }
    case json::value_t::string: w.value(j.get<std::string>()); break;
    case json::value_t::boolean: w.value(j.get<bool>()); break;
    case json::value_t::number_unsigned: w.value(j.get<std::uint64_t>()); break;
    case json::value_t::number_integer: w.value(j.get<std::int64_t>()); break;
    case json::value_t::number_float: w.value(j.get<double>()); break;
    default: w.raw("null"); break;
  }
}

}  // namespace rundetail

struct SelectFailure {
  std::size_t failed_step = 0;
  std::vector<SelectionProbe> probes;
  std::string message;
};

struct IndexReport {
  std::string symbol;
  WindingResult result;
};

struct ModelRow {
  std::string name;
  ModelMetadata meta;
};

struct ReportBundle {
  std::string version;
  std::string timestamp;  // log metadata only, never serialized into the payload
  std::string config_hash;
  nlohmann::json config;
  std::vector<ScanReport> scans;
  std::vector<SummabilityReport> summability;
  std::optional<DefectTable> qd;
  std::optional<SelectionCertificate> certificate;
  std::optional<SelectFailure> select_failure;
  std::vector<IndexReport> index_reports;
  std::vector<ModelRow> model_rows;
  std::vector<std::string> verdicts;
  int exit_code = 0;
};

inline ReportBundle run(const ExperimentConfig& cfg) {
  ReportBundle bundle;
  bundle.version = kVersion;
  bundle.config = cfg.resolved;
  bundle.config_hash = cfg.config_hash.empty() ? hex64(fnv1a(cfg.resolved.dump()))
                                               : cfg.config_hash;

  if (cfg.command == "verify") {
    const std::size_t L = cfg.elements.size();
    bundle.scans.resize(2 * L);
    rundetail::parallel_for(2 * L, [&](std::size_t job) {
      const std::size_t i = job / 2;
      if (job % 2 == 0) {
        bundle.scans[job] = boundedness_scan(*cfg.model, cfg.elements[i], *cfg.alpha, cfg.dims);
      } else {
        bundle.scans[job] =
            compactness_scan(*cfg.model, cfg.elements[i], *cfg.alpha, cfg.dims, cfg.tail_index);
      }
    });
    for (const auto& s : bundle.scans) bundle.verdicts.push_back(to_string(s.verdict));
  } else if (cfg.command == "summability") {
    bundle.summability =
        summability_profile(*cfg.alpha, cfg.multiplicities, cfg.p_values, cfg.k_max);
    for (const auto& r : bundle.summability) bundle.verdicts.push_back(to_string(r.verdict));
  } else if (cfg.command == "select") {
    const ProjectionChain chain = cfg.make_chain();
    const std::size_t budget = cfg.budget == 0 ? chain.length() : cfg.budget;
    const auto closed = close_elements(cfg.elements, cfg.closure_depth);
    try {
      bundle.certificate = select_chain(closed, *cfg.model, chain, *cfg.alpha, budget);
      bundle.verdicts.push_back("selected");
    } catch (const NoProgressError& e) {
      SelectFailure f;
      f.failed_step = e.failed_step;
      f.probes = e.probes;
      f.message = e.what();
      bundle.select_failure = std::move(f);
      bundle.verdicts.push_back("no_progress");
      bundle.exit_code = 3;
    }
  } else if (cfg.command == "qd") {
    const ProjectionChain chain = cfg.make_chain();
    const std::size_t ref =
        cfg.reference_dim == 0 ? 2 * chain.ambient_dim() : cfg.reference_dim;
    bundle.qd = qd_scan(*cfg.model, cfg.elements, chain, cfg.n_values, ref);
    bundle.verdicts.push_back(to_string(bundle.qd->verdict));
  } else if (cfg.command == "index") {
    const std::size_t S = cfg.symbol_texts.size();
    bundle.index_reports.resize(S);
    rundetail::parallel_for(S, [&](std::size_t i) {
      IndexReport rep;
      rep.symbol = cfg.symbol_texts[i];
      rep.result = winding_details(parse_symbol(cfg.symbol_texts[i]), cfg.samples);
      bundle.index_reports[i] = std::move(rep);
    });
    for (const auto& r : bundle.index_reports) {
      bundle.verdicts.push_back(std::to_string(r.result.index));
    }
  } else if (cfg.command == "models") {
    const std::pair<const char*, ModelMetadata> rows[] = {
        {"toeplitz", RepresentationModel::toeplitz().metadata()},
        {"compacts_unit", RepresentationModel::compacts_unit().metadata()},
        {"diagonal", RepresentationModel::diagonal().metadata()},
        {"rfd", RepresentationModel::rfd({RfdBlock{1, 1}}).metadata()},
    };
    for (const auto& [name, meta] : rows) bundle.model_rows.push_back(ModelRow{name, meta});
  } else {
    throw UsageError("unknown command \"" + cfg.command + "\"");
  }
  return bundle;
}

namespace rundetail {

inline void write_scan(JsonWriter& w, const ScanReport& s) {
  w.begin_object();
  w.key("scan").value(s.scan);
  w.key("element").value(s.element);
  w.key("alpha").value(s.alpha);
  const bool compact = s.scan == "compactness";
  if (compact) w.key("tail_index").value(s.tail_index);
  w.key("records").begin_array();
  for (const auto& r : s.records) {
    w.begin_object();
    w.key("dim").value(r.dim);
    w.key("value").value(r.value);
    if (compact) {
      w.key("singular_values").begin_array();
      for (double sv : r.singular_values) w.value(sv);
      w.end_array();
    }
    w.end_object();
  }
  w.end_array();
  w.key("evidence").begin_object();
  if (compact) {
    w.key("nonincreasing").value(s.evidence.nonincreasing);
    w.key("tail_reference").value(s.evidence.tail_reference);
    w.key("zero_reference").value(s.evidence.zero_reference);
    w.key("tail_ok").value(s.evidence.tail_ok);
    w.key("tail_hit").value(s.evidence.tail_hit);
  } else {
    w.key("last").value(s.evidence.last);
    w.key("previous").value(s.evidence.previous);
    w.key("window").value(s.evidence.window);
  }
  w.end_object();
  w.key("thresholds").begin_object();
  if (compact) {
    w.key("monotone_slack").value(kMonotoneSlack);
    w.key("zero_reference").value(kZeroReference);
  } else {
    w.key("stability_window").value(kStabilityWindow);
  }
  w.end_object();
  w.key("verdict").value(to_string(s.verdict));
  w.end_object();
}

inline void write_summability(JsonWriter& w, const SummabilityReport& r) {
  w.begin_object();
  w.key("p").value(r.p);
  w.key("alpha").value(r.alpha);
  w.key("Kmax").value(r.k_max);
  w.key("K_used").value(r.k_used);
  w.key("checkpoints").begin_array();
  for (const auto& cp : r.checkpoints) {
    w.begin_object();
    w.key("K").value(cp.K);
    w.key("partial_sum").value(cp.partial_sum);
    w.key("tail_bound").value(cp.tail_bound);
    w.end_object();
  }
  w.end_array();
  w.key("final_sum").value(r.final_sum);
  w.key("final_tail_bound").value(r.final_tail_bound);
  w.key("last_increments").begin_array();
  for (double d : r.last_increments) w.value(d);
  w.end_array();
  if (!r.note.empty()) w.key("note").value(r.note);
  w.key("thresholds").begin_object();
  w.key("convergence_window").value(kConvergedWindow);
  w.key("divergence_increment").value(kDivergingIncrement);
  w.end_object();
  w.key("verdict").value(to_string(r.verdict));
  w.end_object();
}

inline void write_selection(JsonWriter& w, const ReportBundle& b) {
  w.begin_object();
  if (b.certificate) {
    const auto& c = *b.certificate;
    w.key("status").value("selected");
    w.key("elements").begin_array();
    for (const auto& l : c.element_labels) w.value(l);
    w.end_array();
    w.key("chosen").begin_array();
    for (auto n : c.chosen) w.value(n);
    w.end_array();
    w.key("multiplicities").begin_array();
    for (auto m : c.multiplicities) w.value(m);
    w.end_array();
    w.key("steps").begin_array();
    for (const auto& st : c.steps) {
      w.begin_object();
      w.key("step").value(st.step);
      w.key("chain_index").value(st.chain_index);
      w.key("rank").value(st.rank);
      w.key("envelope").value(st.envelope);
      w.key("max_active_norm").value(st.max_active_norm);
      w.key("element_norms").begin_array();
      for (double v : st.element_norms) w.value(v);
      w.end_array();
      w.end_object();
    }
    w.end_array();
    w.key("per_element_series").begin_array();
    for (double v : c.per_element_series) w.value(v);
    w.end_array();
    w.key("pre_activation_terms").begin_array();
    for (double v : c.pre_activation_terms) w.value(v);
    w.end_array();
    w.key("pre_activation_total").value(c.pre_activation_total);
    w.key("constrained_total").value(c.constrained_total);
    w.key("certified_total").value(c.certified_total);
  } else {
    const auto& f = *b.select_failure;
    w.key("status").value("no_progress");
    w.key("failed_step").value(f.failed_step);
    w.key("message").value(f.message);
    w.key("probes").begin_array();
    for (const auto& p : f.probes) {
      w.begin_object();
      w.key("step").value(p.step);
      w.key("chain_index").value(p.chain_index);
      w.key("rank").value(p.rank);
      w.key("max_active_norm").value(p.max_active_norm);
      w.key("envelope").value(p.envelope);
      w.key("accepted").value(p.accepted);
      w.end_object();
    }
    w.end_array();
  }
  w.end_object();
}

inline void write_defects(JsonWriter& w, const DefectTable& t) {
  const std::size_t L = t.element_labels.size();
  w.begin_object();
  w.key("elements").begin_array();
  for (const auto& l : t.element_labels) w.value(l);
  w.end_array();
  w.key("reference_dim").value(t.reference_dim);
  w.key("reference_norms").begin_array();
  for (double v : t.reference_norms) w.value(v);
  w.end_array();
  w.key("thresholds").begin_object();
  w.key("abs_threshold").value(t.abs_threshold);
  w.key("decay_factor").value(t.decay_factor);
  w.key("persistence_floor").value(t.persistence_floor);
  w.end_object();
  w.key("records").begin_array();
  for (const auto& rec : t.records) {
    w.begin_object();
    w.key("n").value(rec.n);
    w.key("rank").value(rec.rank);
    w.key("mult_defects").begin_array();
    for (std::size_t i = 0; i < L; ++i) {
      w.begin_array();
      for (std::size_t j = 0; j < L; ++j) w.value(rec.mult_defects[i * L + j]);
      w.end_array();
    }
    w.end_array();
    w.key("norm_defects").begin_array();
    for (double v : rec.norm_defects) w.value(v);
    w.end_array();
    w.key("comm_norms").begin_array();
    for (double v : rec.comm_norms) w.value(v);
    w.end_array();
    w.end_object();
  }
  w.end_array();
  w.key("verdict").value(to_string(t.verdict));
  w.end_object();
}

}  // namespace rundetail

inline std::string to_json(const ReportBundle& b) {
  JsonWriter w;
  w.begin_object();
  w.key("version").value(b.version);
  w.key("config_hash").value(b.config_hash);
  w.key("config");
  rundetail::write_json_value(w, b.config);
  if (!b.scans.empty()) {
    w.key("scans").begin_array();
    for (const auto& s : b.scans) rundetail::write_scan(w, s);
    w.end_array();
  }
  if (!b.summability.empty()) {
    w.key("profiles").begin_array();
    for (const auto& r : b.summability) rundetail::write_summability(w, r);
    w.end_array();
  }
  if (b.certificate || b.select_failure) {
    w.key("selection");
    rundetail::write_selection(w, b);
  }
  if (b.qd) {
    w.key("defects");
    rundetail::write_defects(w, *b.qd);
  }
  if (!b.index_reports.empty()) {
    w.key("index").begin_array();
    for (const auto& r : b.index_reports) {
      w.begin_object();
      w.key("symbol").value(r.symbol);
      w.key("samples").value(r.result.samples);
      w.key("index").value(r.result.index);
      w.key("winding").value(r.result.winding);
      w.key("residual").value(r.result.residual);
      w.key("min_abs").value(r.result.min_abs);
      w.end_object();
    }
    w.end_array();
  }
  if (!b.model_rows.empty()) {
    w.key("models").begin_array();
    for (const auto& m : b.model_rows) {
      w.begin_object();
      w.key("name").value(m.name);
      w.key("af_filtration").value(m.meta.af_filtration);
      w.key("rfd").value(m.meta.rfd);
      w.key("known_non_qd").value(m.meta.known_non_qd);
      w.end_object();
    }
    w.end_array();
  }
  w.key("exit_code").value(b.exit_code);
  w.end_object();
  std::string out = w.str();
  out += '\n';
  return out;
}

inline std::string to_csv(const ReportBundle& b) {
  using rundetail::csv_escape;
  std::string out;
  out += "# version=" + b.version + "\n";
  out += "# config_hash=" + b.config_hash + "\n";
  if (!b.scans.empty()) {
    out += "# stability_window=" + format_double_csv(kStabilityWindow) + "\n";
    out += "# monotone_slack=" + format_double_csv(kMonotoneSlack) + "\n";
    out += "# zero_reference=" + format_double_csv(kZeroReference) + "\n";
    out += "element,scan,N,value,verdict\n";
    for (const auto& s : b.scans) {
      for (const auto& r : s.records) {
        out += csv_escape(s.element) + "," + s.scan + "," + std::to_string(r.dim) + "," +
               format_double_csv(r.value) + "," + to_string(s.verdict) + "\n";
      }
    }
  } else if (!b.summability.empty()) {
    out += "# convergence_window=" + format_double_csv(kConvergedWindow) + "\n";
    out += "# divergence_increment=" + format_double_csv(kDivergingIncrement) + "\n";
    out += "p,K,partial_sum,tail_bound,verdict\n";
    for (const auto& rep : b.summability) {
      for (const auto& cp : rep.checkpoints) {
        out += format_double_csv(rep.p) + "," + std::to_string(cp.K) + "," +
               format_double_csv(cp.partial_sum) + "," + format_double_csv(cp.tail_bound) + "," +
               to_string(rep.verdict) + "\n";
      }
    }
  } else if (b.certificate) {
    const auto& c = *b.certificate;
    out += "# status=selected\n";
    out += "# pre_activation_total=" + format_double_csv(c.pre_activation_total) + "\n";
    out += "# constrained_total=" + format_double_csv(c.constrained_total) + "\n";
    out += "# certified_total=" + format_double_csv(c.certified_total) + "\n";
    out += "step,chain_index,rank,envelope,element,comm_norm\n";
    for (const auto& st : c.steps) {
      for (std::size_t i = 0; i < c.element_labels.size(); ++i) {
        out += std::to_string(st.step) + "," + std::to_string(st.chain_index) + "," +
               std::to_string(st.rank) + "," + format_double_csv(st.envelope) + "," +
               csv_escape(c.element_labels[i]) + "," + format_double_csv(st.element_norms[i]) +
               "\n";
      }
    }
  } else if (b.select_failure) {
    const auto& f = *b.select_failure;
    out += "# status=no_progress\n";
    out += "# failed_step=" + std::to_string(f.failed_step) + "\n";
    out += "step,chain_index,rank,envelope,max_active_norm,accepted\n";
    for (const auto& p : f.probes) {
      out += std::to_string(p.step) + "," + std::to_string(p.chain_index) + "," +
             std::to_string(p.rank) + "," + format_double_csv(p.envelope) + "," +
             format_double_csv(p.max_active_norm) + "," + (p.accepted ? "true" : "false") + "\n";
    }
  } else if (b.qd) {
    const auto& t = *b.qd;
    const std::size_t L = t.element_labels.size();
    out += "# abs_threshold=" + format_double_csv(t.abs_threshold) + "\n";
    out += "# decay_factor=" + format_double_csv(t.decay_factor) + "\n";
    out += "# persistence_floor=" + format_double_csv(t.persistence_floor) + "\n";
    out += "# verdict=" + std::string(to_string(t.verdict)) + "\n";
    out += "n,rank,pair,mult_defect,norm_defect,comm_norm\n";
    for (const auto& rec : t.records) {
      for (std::size_t i = 0; i < L; ++i) {
        for (std::size_t j = 0; j < L; ++j) {
          out += std::to_string(rec.n) + "," + std::to_string(rec.rank) + "," +
                 std::to_string(i + 1) + "*" + std::to_string(j + 1) + "," +
                 format_double_csv(rec.mult_defects[i * L + j]) + ",";
          if (i == j) {
            out += format_double_csv(rec.norm_defects[i]) + "," +
                   format_double_csv(rec.comm_norms[i]);
          } else {
            out += ",";
          }
          out += "\n";
        }
      }
    }
  } else if (!b.index_reports.empty()) {
    out += "symbol,samples,index,winding,residual,min_abs\n";
    for (const auto& r : b.index_reports) {
      out += csv_escape(r.symbol) + "," + std::to_string(r.result.samples) + "," +
             std::to_string(r.result.index) + "," + std::to_string(r.result.winding) + "," +
             format_double_csv(r.result.residual) + "," + format_double_csv(r.result.min_abs) +
             "\n";
    }
  } else if (!b.model_rows.empty()) {
    out += "name,af_filtration,rfd,known_non_qd\n";
    for (const auto& m : b.model_rows) {
      out += m.name + "," + (m.meta.af_filtration ? "true" : "false") + "," +
             (m.meta.rfd ? "true" : "false") + "," + (m.meta.known_non_qd ? "true" : "false") +
             "\n";
    }
  }
  return out;
}

inline std::string render(const ReportBundle& b, const std::string& format) {
  return format == "csv" ? to_csv(b) : to_json(b);
}

}  // namespace ncglab
