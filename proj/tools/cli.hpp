#pragma once

#include <cmath>
#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "infodensity/infodensity.hpp"
#include "json.hpp"
#include "model_io.hpp"

namespace infodensity::cli {

using json = nlohmann::json;

enum ExitCode : int { kPass = 0, kCheckFailed = 1, kInputInvalid = 2, kResourceOrDomain = 3 };

/// Numbers go out as JSON numbers (shortest round-trip form) or, with
/// --exact, as 17-significant-digit decimal strings. Non-finite values are
/// always strings ("inf", "-inf", "nan").
class NumberFormat {
 public:
  explicit NumberFormat(bool exact) : exact_(exact) {}

  [[nodiscard]] json operator()(double v) const {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (exact_) return text(v);
    return v;
  }

  [[nodiscard]] static std::string text(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
  }

 private:
  bool exact_;
};

struct TGrid {
  double from;
  double to;
  int steps;

  [[nodiscard]] std::vector<double> points() const {
    std::vector<double> ts;
    if (steps == 1) return {from};
    for (int k = 0; k < steps; ++k) ts.push_back(from + (to - from) * k / (steps - 1));
    return ts;
  }
};

[[nodiscard]] inline TGrid parse_t_grid(const std::string& spec) {
  std::stringstream ss(spec);
  std::string a, b, c;
  if (!std::getline(ss, a, ':') || !std::getline(ss, b, ':') || !std::getline(ss, c) ) {
    throw Error(ErrorCode::InvalidInput, "t-grid must look like a:b:steps, got \"" + spec + "\"");
  }
  try {
    std::size_t ua = 0, ub = 0, uc = 0;
    TGrid g{std::stod(a, &ua), std::stod(b, &ub), std::stoi(c, &uc)};
    if (ua != a.size() || ub != b.size() || uc != c.size() || g.steps < 1) throw std::invalid_argument("grid");
    return g;
  } catch (const std::exception&) {
    throw Error(ErrorCode::InvalidInput, "t-grid must look like a:b:steps, got \"" + spec + "\"");
  }
}

[[nodiscard]] inline int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfDomain:
    case ErrorCode::CombinatorialLimit:
    case ErrorCode::Overflow:
      return kResourceOrDomain;
    default:
      return kInputInvalid;
  }
}

/// Loop counts as JSON integers while they are exact in a double.
[[nodiscard]] inline json count_json(double count) {
  if (count <= 9007199254740992.0) return static_cast<std::uint64_t>(count);
  return count;
}

[[nodiscard]] inline json error_json(const Error& e) {
  json j{{"error", std::string(to_string(e.code()))}, {"message", e.what()}};
  const NumberFormat fmt(false);
  if (const auto* pd = dynamic_cast<const NotPositiveDefiniteError*>(&e)) {
    j["pivot"] = pd->pivot();
  } else if (const auto* od = dynamic_cast<const OutOfDomainError*>(&e)) {
    j["t"] = fmt(od->t());
    j["domain"] = {{"lower", fmt(od->lower())}, {"upper", fmt(od->upper())}};
  } else if (const auto* ov = dynamic_cast<const OverflowError*>(&e)) {
    j["order"] = ov->order();
  } else if (const auto* cl = dynamic_cast<const CombinatorialLimitError*>(&e)) {
    j["l"] = cl->length();
    j["loop_count"] = count_json(cl->count());
    j["cap"] = cl->cap();
  }
  return j;
}

struct ModelSource {
  std::string model_file;
  std::string matrix_csv;
  std::string partition;

  void attach(CLI::App* cmd) {
    cmd->add_option("model", model_file, "Model JSON file");
    cmd->add_option("--matrix-csv", matrix_csv, "Headerless d x d covariance CSV (zero mean)");
    cmd->add_option("--partition", partition, "Block sizes for --matrix-csv, e.g. \"1,2\"");
  }

  [[nodiscard]] GaussianModel load() const {
    if (!matrix_csv.empty()) {
      if (!model_file.empty()) throw Error(ErrorCode::InvalidInput, "give either a model file or --matrix-csv");
      if (partition.empty()) throw Error(ErrorCode::InvalidInput, "--matrix-csv needs --partition");
      return io::read_matrix_csv(matrix_csv, partition);
    }
    if (model_file.empty()) throw Error(ErrorCode::InvalidInput, "no model given");
    return io::read_model_file(model_file);
  }
};

inline constexpr double kMultiinformationAgreement = 1e-9;
inline constexpr double kOracleTolerance = 1e-9;

/// Rows l = 1..max_l of loop sum vs repeated-product trace.
[[nodiscard]] inline json oracle_section(const GammaMatrix& gamma, int max_l, std::uint64_t cap,
                                         bool list_loops, const NumberFormat& fmt, bool& passed) {
  json rows = json::array();
  passed = true;
  const Index nodes = gamma.partition().block_count();
  for (int l = 1; l <= max_l; ++l) {
    const double loop_sum = trace_via_loops(gamma, l, cap);
    const double direct = trace_of_power(gamma.matrix(), l);
    const double diff = std::abs(loop_sum - direct);
    const bool ok = diff <= kOracleTolerance * std::max(1.0, std::abs(direct));
    passed = passed && ok;
    json row{{"l", l},
             {"loop_count", count_json(rooted_loop_count(nodes, l))},
             {"loop_sum", fmt(loop_sum)},
             {"matrix_trace", fmt(direct)},
             {"abs_diff", fmt(diff)},
             {"pass", ok}};
    if (list_loops) {
      json loops = json::array();
      for (const auto& loop : enumerate_loops(nodes, l, cap)) {
        json seq = json::array();
        for (Index q : loop.nodes) seq.push_back(q + 1);
        loops.push_back(seq);
      }
      row["loops"] = loops;
    }
    rows.push_back(row);
  }
  return rows;
}

[[nodiscard]] inline json validation_json(const ValidationReport& report, const NumberFormat& fmt) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"order", r.order},
                    {"analytic", fmt(r.analytic)},
                    {"empirical", fmt(r.empirical)},
                    {"se", fmt(r.se)},
                    {"z", fmt(r.z)},
                    {"pass", r.pass}});
  }
  return {{"fingerprint", report.fingerprint},
          {"n", report.n},
          {"seed", report.seed},
          {"z_threshold", kZThreshold},
          {"rows", rows},
          {"passed", report.passed()}};
}

/// Runs one CLI invocation. `args` excludes the program name. Output goes to
/// `out`, structured errors to `err`; the return value is the exit code.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact cumulants and oracles for the Gaussian multiinformation density", "infodensity"};
  app.require_subcommand(1);
  bool exact = false;
  app.add_flag("--exact", exact, "Emit numbers as 17-significant-digit strings");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Multiinformation, variance, cumulants and CGF of a model");
  ModelSource analyze_src;
  analyze_src.attach(analyze);
  int order = 4;
  std::string t_grid;
  int oracle_max_l = 0;
  long long mc_n = 0;
  std::uint64_t mc_seed = 42;
  analyze->add_option("--cumulants,-L", order, "Highest cumulant order")->check(CLI::PositiveNumber);
  analyze->add_option("--t-grid", t_grid, "CGF samples on a:b:steps");
  analyze->add_option("--oracle", oracle_max_l, "Add a loop-oracle section up to this length");
  analyze->add_option("--mc", mc_n, "Add a Monte Carlo section with this many draws");
  analyze->add_option("--mc-seed", mc_seed, "Seed for the Monte Carlo section");

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo validation of the analytic cumulants");
  ModelSource sim_src;
  sim_src.attach(simulate);
  long long sim_n = 1'000'000;
  std::uint64_t seed = 42;
  int max_order = 4;
  unsigned threads = 0;
  int corrupt_order = 0;
  simulate->add_option("--n", sim_n, "Number of draws");
  simulate->add_option("--seed", seed, "Generator seed");
  simulate->add_option("--max-order", max_order, "Highest order to compare (1..4)");
  simulate->add_option("--threads", threads, "Worker threads (0: all cores); output does not depend on it");
  simulate->add_option("--corrupt-order", corrupt_order,
                       "Self-test: add 1 to the analytic cumulant of this order before comparing");

  // oracle-check
  auto* oracle = app.add_subcommand("oracle-check", "Loop enumeration vs matrix-power traces");
  ModelSource oracle_src;
  oracle_src.attach(oracle);
  int max_l = 6;
  bool list_loops = false;
  oracle->add_option("--max-l", max_l, "Largest loop length")->check(CLI::PositiveNumber);
  oracle->add_flag("--list-loops", list_loops, "Include the rooted loops (1-based nodes) in each row");

  // homogeneous
  auto* homog = app.add_subcommand("homogeneous", "Closed forms for the homogeneous correlation matrix");
  long long hd = 0;
  double rho = 0.0;
  int h_max_l = 4;
  std::string sweep;
  std::string format = "json";
  homog->add_option("--d", hd, "Dimension");
  homog->add_option("--rho", rho, "Common correlation")->required();
  homog->add_option("--max-l", h_max_l, "Highest cumulant order (>= 2)");
  homog->add_option("--sweep-d", sweep, "Comma-separated list of dimensions (replaces --d)");
  homog->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kPass;
  } catch (const CLI::ParseError& e) {
    err << json{{"error", "InvalidInput"}, {"message", e.what()}}.dump() << '\n';
    return kInputInvalid;
  }

  const NumberFormat fmt(exact);
  try {
    if (analyze->parsed()) {
      const GaussianModel model = analyze_src.load();
      const GammaMatrix gamma = compute_gamma(model);
      const double mi = multiinformation(model);
      const double mi_gamma = multiinformation_from_gamma(gamma);
      const double mi_diff = std::abs(mi - mi_gamma);
      const bool agree = mi_diff <= kMultiinformationAgreement;
      const CgfDomain dom = cgf_domain(gamma);

      json report;
      report["fingerprint"] = fingerprint(model);
      report["dimension"] = model.dimension();
      report["partition"] = model.partition().block_sizes();
      report["multiinformation"] = {{"log_det", fmt(mi)},
                                    {"gamma_spectrum", fmt(mi_gamma)},
                                    {"abs_diff", fmt(mi_diff)},
                                    {"agree", agree}};
      report["variance"] = fmt(variance(model));
      json kappa = json::array();
      for (double v : cumulants(gamma, mi, order).values) kappa.push_back(fmt(v));
      report["cumulants"] = kappa;
      report["cgf_domain"] = {{"lower", fmt(dom.lower)}, {"upper", fmt(dom.upper)}};

      if (!t_grid.empty()) {
        json grid = json::array();
        for (double t : parse_t_grid(t_grid).points()) grid.push_back({{"t", fmt(t)}, {"cgf", fmt(cgf(gamma, mi, t))}});
        report["cgf_grid"] = grid;
      }
      bool oracle_ok = true;
      if (oracle_max_l > 0) {
        report["oracle"] = oracle_section(gamma, oracle_max_l, loop_cap_from_env(), false, fmt, oracle_ok);
      }
      bool mc_ok = true;
      if (mc_n > 0) {
        const auto v = mc_validate(model, static_cast<Index>(mc_n), mc_seed, std::min(order, 4));
        report["monte_carlo"] = validation_json(v, fmt);
        mc_ok = v.passed();
      }
      out << report.dump(2) << '\n';
      return (agree && oracle_ok && mc_ok) ? kPass : kCheckFailed;
    }

    if (simulate->parsed()) {
      const GaussianModel model = sim_src.load();
      if (max_order < 1 || max_order > 4) {
        throw Error(ErrorCode::InvalidParameter, "--max-order must be in 1..4");
      }
      SamplingOptions options;
      options.threads = threads;
      const SampleBatch batch = sample_density(model, static_cast<Index>(sim_n), seed, options);
      const KStatistics ks = k_statistics(batch);
      CumulantSequence analytic = cumulants(model, max_order);
      if (corrupt_order >= 1 && corrupt_order <= max_order) {
        analytic.values[static_cast<std::size_t>(corrupt_order - 1)] += 1.0;
      }
      ValidationReport report;
      report.fingerprint = batch.fingerprint;
      report.n = batch.size();
      report.seed = seed;
      report.rows = compare_cumulants(analytic, ks, max_order);
      json doc = validation_json(report, fmt);
      doc["max_order"] = max_order;
      if (corrupt_order != 0) doc["corrupted_order"] = corrupt_order;
      out << doc.dump(2) << '\n';
      return report.passed() ? kPass : kCheckFailed;
    }

    if (oracle->parsed()) {
      const GaussianModel model = oracle_src.load();
      const GammaMatrix gamma = compute_gamma(model);
      const std::uint64_t cap = loop_cap_from_env();
      bool passed = true;
      json rows = oracle_section(gamma, max_l, cap, list_loops, fmt, passed);
      json doc{{"fingerprint", fingerprint(model)},
               {"blocks", model.block_count()},
               {"cap", cap},
               {"tolerance", kOracleTolerance},
               {"rows", rows},
               {"passed", passed}};
      out << doc.dump(2) << '\n';
      return passed ? kPass : kCheckFailed;
    }

    if (homog->parsed()) {
      std::vector<Index> dims;
      if (!sweep.empty()) {
        dims = io::parse_index_list(sweep);
      } else if (hd > 0) {
        dims = {static_cast<Index>(hd)};
      } else {
        throw Error(ErrorCode::InvalidInput, "homogeneous needs --d or --sweep-d");
      }
      if (h_max_l < 2) throw Error(ErrorCode::InvalidParameter, "--max-l must be >= 2");
      // Validate every dimension before producing output.
      std::vector<HomogeneousModel> models;
      for (Index d : dims) models.emplace_back(d, rho);

      struct Row {
        Index d;
        int order;
        double closed, general;
        std::optional<double> standardized, limit;
      };
      std::vector<Row> rows;
      for (const auto& hm : models) {
        const GaussianModel model = homogeneous_covariance(hm);
        const GammaMatrix gamma = compute_gamma(model);
        const CumulantSequence general = cumulants(gamma, multiinformation(model), h_max_l);
        rows.push_back({hm.dimension(), 1, homogeneous_mean(hm), general.at(1), std::nullopt, std::nullopt});
        for (int l = 2; l <= h_max_l; ++l) {
          Row r{hm.dimension(), l, homogeneous_cumulant(hm, l), general.at(l), std::nullopt, std::nullopt};
          if (hm.rho() != 0.0) {
            r.standardized = standardized_cumulant(hm, l);
            r.limit = standardized_cumulant_limit(l);
          }
          rows.push_back(r);
        }
      }

      if (format == "csv") {
        out << "d,rho,order,closed_form,general,standardized,limit\n";
        auto opt = [](const std::optional<double>& v) { return v ? NumberFormat::text(*v) : std::string(); };
        for (const auto& r : rows) {
          out << r.d << ',' << NumberFormat::text(rho) << ',' << r.order << ',' << NumberFormat::text(r.closed) << ','
              << NumberFormat::text(r.general) << ',' << opt(r.standardized) << ',' << opt(r.limit) << '\n';
        }
      } else {
        json arr = json::array();
        for (const auto& r : rows) {
          arr.push_back({{"d", r.d},
                         {"rho", fmt(rho)},
                         {"order", r.order},
                         {"closed_form", fmt(r.closed)},
                         {"general", fmt(r.general)},
                         {"standardized", r.standardized ? fmt(*r.standardized) : json(nullptr)},
                         {"limit", r.limit ? fmt(*r.limit) : json(nullptr)}});
        }
        out << json{{"rows", arr}}.dump(2) << '\n';
      }
      return kPass;
    }
  } catch (const Error& e) {
    err << error_json(e).dump() << '\n';
    return exit_code_for(e.code());
  }
  return kInputInvalid;
}

}  // namespace infodensity::cli
