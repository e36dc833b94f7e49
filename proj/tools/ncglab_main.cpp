// ncglab command line front end. Subcommands map onto the runner; all real
// work happens in the headers so the binary stays a thin shell.

#include <ncglab/runner.hpp>

#include <CLI11.hpp>

#include <ctime>
#include <fstream>
#include <iostream>
#include <string>

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void add_output_flags(CLI::App* sub, ncglab::CliOverrides& ov) {
  sub->add_option("--config", ov.config_path, "JSON config file; flags override its fields");
  sub->add_option("--out", ov.out, "write the report here instead of stdout");
  sub->add_option("--format", ov.format, "report format: json (default) or csv");
  sub->add_option("--assert", ov.assert_verdict,
                  "exit 1 unless every verdict in the report equals this string");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-dimensional spectral triple experiments"};
  app.require_subcommand(1);
  ncglab::CliOverrides ov;

  auto* verify = app.add_subcommand("verify", "boundedness and compactness scans");
  verify->add_option("--model", ov.model, "model: toeplitz | compacts_unit | diagonal[:seq] | rfd:blocks");
  verify->add_option("--elements", ov.elements, "comma-separated element descriptors, e.g. s,e(1,2)");
  verify->add_option("--alpha", ov.alpha, "alpha: harmonic | power:Q | geometric:R | custom:v1,v2,...");
  verify->add_option("--dims", ov.dims, "increasing truncation dims, e.g. 4,8,16");
  verify->add_option("--tail-index", ov.tail_index, "compactness tail index J (default 2)");
  add_output_flags(verify, ov);

  auto* summ = app.add_subcommand("summability", "partial sums of (1+alpha_k^2)^(-p/2)");
  summ->add_option("--alpha", ov.alpha, "alpha sequence");
  summ->add_option("--p", ov.p, "comma-separated exponents, e.g. 1,2,4");
  summ->add_option("--Kmax", ov.k_max, "summation horizon (default 2^20)");
  summ->add_option("--multiplicities", ov.multiplicities, "leading eigenvalue multiplicities");
  add_output_flags(summ, ov);

  auto* select = app.add_subcommand("select", "greedy subsequence selection with certificate");
  select->add_option("--model", ov.model, "model");
  select->add_option("--elements", ov.elements, "generator descriptors; *-algebra closure is applied");
  select->add_option("--closure-depth", ov.closure_depth, "product depth of the closure (default 3)");
  select->add_option("--alpha", ov.alpha, "alpha sequence");
  select->add_option("--chain", ov.chain, "projection chain: default | r1,r2,... | a..b");
  select->add_option("--dims", ov.dims, "ambient truncation dimension");
  select->add_option("--budget", ov.budget, "largest chain index the scan may visit (default: chain length)");
  add_output_flags(select, ov);

  auto* qd = app.add_subcommand("qd", "compression defect scan");
  qd->add_option("--model", ov.model, "model");
  qd->add_option("--elements", ov.elements, "element descriptors (used verbatim, no closure)");
  qd->add_option("--chain", ov.chain, "projection chain: default | r1,r2,... | a..b");
  qd->add_option("--dims", ov.dims, "ambient truncation dimension");
  qd->add_option("--n", ov.n, "chain indices to probe, e.g. 1,2,4,8 or 1..8");
  qd->add_option("--reference-dim", ov.reference_dim, "norm reference truncation (default 2x ambient)");
  add_output_flags(qd, ov);

  auto* index = app.add_subcommand("index", "winding number of circle symbols");
  index->add_option("--symbol", ov.symbol, "comma-separated Laurent polynomials, e.g. z,z^2,1");
  index->add_option("--samples", ov.samples, "circle sample count (default 4096)");
  add_output_flags(index, ov);

  auto* models = app.add_subcommand("models", "model catalogue");
  auto* models_list = models->add_subcommand("list", "list models and their metadata flags");
  add_output_flags(models_list, ov);
  models->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  std::string command;
  for (auto* sub : {verify, summ, select, qd, index, models}) {
    if (sub->parsed()) command = sub->get_name();
  }

  try {
    const ncglab::ExperimentConfig cfg = ncglab::load_config(command, ov);
    ncglab::ReportBundle bundle = ncglab::run(cfg);
    bundle.timestamp = utc_timestamp();

    const std::string payload = ncglab::render(bundle, cfg.format);
    if (cfg.out_path.empty()) {
      std::cout << payload;
    } else {
      std::ofstream out(cfg.out_path, std::ios::binary);
      if (!out) throw ncglab::UsageError("cannot open output file: " + cfg.out_path);
      out << payload;
    }
    // Timestamp stays out of the payload so identical configs stay
    // byte-identical; the log line carries it instead.
    std::cerr << "[ncglab] " << bundle.timestamp << " command=" << command
              << " config_hash=" << bundle.config_hash << "\n";

    int code = bundle.exit_code;
    if (code == 0 && !cfg.assert_verdict.empty()) {
      for (const auto& v : bundle.verdicts) {
        if (v != cfg.assert_verdict) {
          std::cerr << "[ncglab] assert failed: verdict \"" << v << "\" != \""
                    << cfg.assert_verdict << "\"\n";
          code = 1;
          break;
        }
      }
    }
    return code;
  } catch (const ncglab::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
}
