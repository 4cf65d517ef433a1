// mdual: exact Möbius duality toolkit.
//
// Exit status: 0 success, 1 a verification failed, 2 invalid configuration
// or input, 3 a state-space size cap was exceeded.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>

#include "mdual/cannings.hpp"
#include "mdual/coarse_graining.hpp"
#include "mdual/duality.hpp"
#include "mdual/errors.hpp"
#include "mdual/io.hpp"
#include "mdual/lattices.hpp"
#include "mdual/poset.hpp"
#include "mdual/verification.hpp"
#include "reports.hpp"

namespace {

using namespace mdual;
using cli::Json;

enum Exit : int { kOk = 0, kVerificationFailed = 1, kInvalidConfig = 2, kSizeCap = 3 };

struct Output {
  std::string format = "json";
  std::string path;

  void write(const std::string& text) const {
    const std::string body = text.empty() || text.back() == '\n' ? text : text + "\n";
    if (path.empty()) {
      std::cout << body;
      return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot write " + path);
    out << body;
  }

  void matrix(const LabeledMatrix& m) const {
    if (format == "csv") write(to_csv(m));
    else if (format == "pretty") write(to_pretty(m));
    else write(to_json(m));
  }

  void report(const Json& j) const {
    if (format == "csv") throw ParseError("csv output applies to matrices; use json or pretty for reports");
    write(format == "pretty" ? cli::pretty_json(j) : j.dump(2));
  }
};

FinitePoset make_poset(const std::string& kind, int n, int types) {
  if (kind == "subsets") return subset_lattice(n).poset();
  if (kind == "partitions") return partition_lattice(n).poset();
  if (kind == "product") return product_set_lattice(n, types).poset();
  if (kind == "chain") return chain_poset(static_cast<std::size_t>(n));
  throw ParseError("unknown poset \"" + kind + "\"");
}

OffspringLaw make_law(const std::string& model, int n) {
  if (model == "wf") return wright_fisher_law(n);
  if (model == "moran") return moran_law(n);
  throw ParseError("unknown model \"" + model + "\"");
}

LabeledMatrix load_kernel(const std::string& path) {
  const auto text = read_file(path);
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  return csv ? matrix_from_csv(text) : matrix_from_json(text);
}

std::vector<std::string> subset_labels(const SubsetLattice& lat) {
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < lat.size(); ++i) labels.push_back(format_subset(lat.mask(i)));
  return labels;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact Möbius duality, coarse-graining and Cannings-model verification"};
  app.require_subcommand(1);
  app.fallthrough();
  Output out;
  app.add_option("--format", out.format, "Output format")
      ->check(CLI::IsMember({"json", "csv", "pretty"}))
      ->capture_default_str();
  app.add_option("--output,-o", out.path, "Write to this file instead of stdout");

  std::function<int()> action;

  // lattice
  auto* lattice = app.add_subcommand("lattice", "Emit the zeta or Möbius matrix of a lattice");
  std::string lattice_kind;
  int lattice_n = 3;
  int lattice_t = 2;
  std::string emit = "moebius";
  lattice->add_option("kind", lattice_kind, "subsets, partitions, product or chain")
      ->required()
      ->check(CLI::IsMember({"subsets", "partitions", "product", "chain"}));
  lattice->add_option("--n", lattice_n, "Ground-set size (chain length for chain)")->check(CLI::Range(0, 64));
  lattice->add_option("--T", lattice_t, "Number of copies for product")->check(CLI::Range(1, 64));
  lattice->add_option("--emit", emit, "zeta, moebius or elements")
      ->check(CLI::IsMember({"zeta", "moebius", "elements"}))
      ->capture_default_str();
  lattice->callback([&] {
    action = [&] {
      const auto poset = make_poset(lattice_kind, lattice_n, lattice_t);
      if (emit == "elements") {
        Json j;
        j["kind"] = lattice_kind;
        j["size"] = poset.size();
        j["elements"] = poset.labels();
        auto heights = Json::array();
        for (std::size_t i = 0; i < poset.size(); ++i) heights.push_back(poset.height(i));
        j["heights"] = std::move(heights);
        out.report(j);
        return kOk;
      }
      const auto zp = moebius_matrix(poset);
      out.matrix(with_labels(emit == "zeta" ? zp.zeta : zp.moebius, poset.labels()));
      return kOk;
    };
  });

  // duality
  auto* duality = app.add_subcommand("duality", "Positivity certificate for the dual of a kernel");
  std::string poset_kind = "subsets";
  int duality_n = 2;
  std::string variant_name = "zeta";
  std::string kernel_path;
  bool emit_q = false;
  duality->add_option("--poset", poset_kind, "subsets, partitions or chain")
      ->check(CLI::IsMember({"subsets", "partitions", "chain"}))
      ->capture_default_str();
  duality->add_option("--n", duality_n, "Poset size parameter")->check(CLI::Range(0, 64));
  duality->add_option("--variant", variant_name, "zeta, zeta-transpose, moebius or moebius-transpose")
      ->check(CLI::IsMember({"zeta", "zeta-transpose", "moebius", "moebius-transpose"}))
      ->capture_default_str();
  duality->add_option("--kernel", kernel_path, "Kernel P as JSON or CSV with \"p/q\" entries")->required();
  duality->add_flag("--emit-q", emit_q, "Include the dual kernel Q in the report");
  duality->callback([&] {
    action = [&] {
      const auto poset = make_poset(poset_kind, duality_n, 1);
      const auto zp = moebius_matrix(poset);
      const auto loaded = load_kernel(kernel_path);
      if (loaded.matrix.rows() != poset.size() || loaded.matrix.cols() != poset.size())
        throw DimensionMismatch("kernel is " + std::to_string(loaded.matrix.rows()) + "x" +
                                std::to_string(loaded.matrix.cols()) + " but the poset has " +
                                std::to_string(poset.size()) + " elements");
      if (!loaded.matrix.nonnegative()) throw ParseError("the kernel must be nonnegative");
      const Kernel p(loaded.matrix);
      const auto v = parse_variant(variant_name);
      const auto pos = positivity_certificate(p, zp, v);
      const auto strong = strong_condition_check(p, zp, v);
      Json j = cli::positivity_json(pos, poset);
      j["kernel_kind"] = to_string(p.kind);
      j["condition_ii"] = strong.condition_ii;
      j["strong"] = cli::strong_json(strong, poset);
      j["support_implication"] = support_implication_check(p.matrix, pos.q, poset, describe(v).support);
      if (emit_q) j["Q"] = cli::matrix_json(with_labels(pos.q, poset.labels()));
      out.report(j);
      // Consequences that must follow whenever their hypotheses hold.
      const bool consistent = pos.agreement && pos.images_match_q && strong.monotone.value_or(true) &&
                              strong.invariant_in_cone.value_or(true) &&
                              strong.dual_invariant_monotone.value_or(true) && j["support_implication"].get<bool>();
      return consistent ? kOk : kVerificationFailed;
    };
  });

  // coarsen
  auto* coarsen = app.add_subcommand("coarsen", "Coarse-grained zeta/Möbius matrices");
  std::string coarsen_kind;
  int coarsen_n = 3;
  std::string which = "zeta";
  coarsen->add_option("kind", coarsen_kind, "sets or partitions")->required()->check(CLI::IsMember({"sets", "partitions"}));
  coarsen->add_option("--n", coarsen_n, "Ground-set size")->check(CLI::Range(0, 64));
  coarsen->add_option("--matrix", which, "zeta, moebius, zeta-transpose or moebius-transpose")
      ->check(CLI::IsMember({"zeta", "moebius", "zeta-transpose", "moebius-transpose"}))
      ->capture_default_str();
  coarsen->callback([&] {
    action = [&] {
      if (coarsen_kind == "partitions") {
        if (which != "zeta" && which != "moebius") throw ParseError("partition skeletons support zeta and moebius");
        const auto m = coarse_partition_matrices(coarsen_n);
        std::vector<std::string> labels;
        for (const auto& s : m.skeletons) labels.push_back(s.to_string());
        out.matrix(with_labels(which == "zeta" ? m.zeta : m.moebius, labels));
        return kOk;
      }
      const auto closed = coarse_set_matrices(coarsen_n);
      auto pick = [&](const CoarseSetMatrices& s) -> const RationalMatrix& {
        if (which == "moebius") return s.moebius;
        if (which == "zeta-transpose") return s.zeta_transpose;
        if (which == "moebius-transpose") return s.moebius_transpose;
        return s.zeta;
      };
      bool ok = true;
      if (coarsen_n <= 12) ok = pick(coarse_set_matrices_by_enumeration(coarsen_n)) == pick(closed);
      std::vector<std::string> labels;
      for (int k = 0; k <= coarsen_n; ++k) labels.push_back(std::to_string(k));
      out.matrix(with_labels(pick(closed), labels));
      if (!ok) std::cerr << "closed form disagrees with the enumerated coarse-graining\n";
      return ok ? kOk : kVerificationFailed;
    };
  });

  // cannings
  auto* cannings = app.add_subcommand("cannings", "Set-valued Cannings chains and their coarse duality");
  std::string model = "wf";
  int population = 3;
  int types = 1;
  std::string verify = "all";
  std::string cannings_emit = "report";
  cannings->add_option("--model", model, "wf or moran")->check(CLI::IsMember({"wf", "moran"}))->capture_default_str();
  cannings->add_option("--N", population, "Population size")->check(CLI::Range(1, 30));
  cannings->add_option("--T", types, "Number of types; 1 is the haploid set model")->check(CLI::Range(1, 64));
  cannings->add_option("--verify", verify, "all or none")->check(CLI::IsMember({"all", "none"}))->capture_default_str();
  cannings->add_option("--emit", cannings_emit, "report, P, Q, P_coarse or Q_hat")
      ->check(CLI::IsMember({"report", "P", "Q", "P_coarse", "Q_hat"}))
      ->capture_default_str();
  cannings->callback([&] {
    action = [&] {
      const auto law = make_law(model, population);
      if (cannings_emit == "report") {
        if (verify == "none") {
          Json j{{"model", model}, {"N", population}, {"T", types}, {"atoms", law.atoms().size()},
                 {"exchangeable", law.exchangeable()}, {"parent_exchangeable", law.parent_exchangeable()}};
          out.report(j);
          return kOk;
        }
        const auto rep = cli::cannings_report(law, model, types);
        out.report(rep.json);
        return rep.passed ? kOk : kVerificationFailed;
      }
      if (types > 1) {
        const auto ma = multiallelic_kernels(law, types);
        std::vector<std::string> labels;
        for (std::size_t k = 0; k < ma.size(); ++k) labels.push_back(ma.label(k));
        if (cannings_emit == "P") out.matrix(with_labels(ma.p.dense(), labels));
        else if (cannings_emit == "Q") out.matrix(with_labels(ma.q.dense(), labels));
        else {
          const auto c = coarsen_multiallelic(law, ma);
          out.matrix(with_labels(cannings_emit == "P_coarse" ? c.p_coarse : c.q_hat.matrix, c.labels));
        }
        return kOk;
      }
      const auto fk = forward_kernel(law);
      const auto bk = backward_kernel(law);
      if (cannings_emit == "P") out.matrix(with_labels(fk.p.matrix, subset_labels(fk.lattice)));
      else if (cannings_emit == "Q") out.matrix(with_labels(bk.q.matrix, subset_labels(bk.lattice)));
      else {
        const auto c = coarsen_to_cannings(law, fk, bk);
        std::vector<std::string> labels;
        for (int k = 0; k <= population; ++k) labels.push_back(std::to_string(k));
        out.matrix(with_labels(cannings_emit == "P_coarse" ? c.pipeline.p_coarse : c.pipeline.q_hat.matrix, labels));
      }
      return kOk;
    };
  });

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo estimates of both sides of the Cannings duality");
  std::string sim_model = "wf";
  int sim_n = 4;
  MonteCarloOptions mc;
  mc.reps = 100000;
  int start = 2, dual_start = 1;
  simulate->add_option("--model", sim_model, "wf or moran")->check(CLI::IsMember({"wf", "moran"}))->capture_default_str();
  simulate->add_option("--N", sim_n, "Population size")->check(CLI::Range(1, 30));
  simulate->add_option("--steps", mc.steps, "Number of generations")->capture_default_str();
  simulate->add_option("--reps", mc.reps, "Replicas per chain")->check(CLI::Range(1, 100000000))->capture_default_str();
  simulate->add_option("--seed", mc.seed, "Generator seed")->capture_default_str();
  simulate->add_option("--start", start, "|a|, size of the forward starting set")->capture_default_str();
  simulate->add_option("--dual-start", dual_start, "|b|, size of the dual starting set")->capture_default_str();
  simulate->add_option("--threads", mc.threads, "Worker threads; 0 uses every core (output is unaffected)");
  simulate->callback([&] {
    action = [&] {
      const auto law = make_law(sim_model, sim_n);
      if (start < 0 || start > sim_n || dual_start < 0 || dual_start > sim_n)
        throw ParseError("--start and --dual-start must lie in 0..N");
      const auto j = cli::monte_carlo_json(monte_carlo_duality(law, start, dual_start, mc));
      Json full{{"model", sim_model}, {"N", sim_n}, {"seed", mc.seed}};
      full.update(j);
      out.report(full);
      return kOk;
    };
  });

  // verify-all
  auto* verify_all = app.add_subcommand("verify-all", "Run every acceptance check");
  VerifyOptions vo;
  verify_all->add_option("--max-n", vo.max_n, "Largest population or ground-set size")->check(CLI::Range(1, 12))->capture_default_str();
  verify_all->add_option("--seed", vo.seed, "Seed for random kernels and Monte Carlo")->capture_default_str();
  verify_all->add_option("--reps", vo.mc_reps, "Monte Carlo replicas")->check(CLI::Range(2, 100000000))->capture_default_str();
  verify_all->callback([&] {
    action = [&] {
      const auto results = run_all_criteria(vo);
      bool all = true;
      for (const auto& r : results) all = all && r.passed;
      if (out.format == "pretty") {
        std::string text;
        for (const auto& r : results)
          text += std::string(r.passed ? "PASS" : "FAIL") + " criterion " + std::to_string(r.id) + ": " + r.name + " -- " +
                  r.detail + "\n";
        out.write(text);
      } else {
        if (out.format == "csv") throw ParseError("csv output applies to matrices; use json or pretty for reports");
        out.write(criteria_report_json(vo, results));
      }
      return all ? kOk : kVerificationFailed;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInvalidConfig;
  }

  try {
    return action ? action() : kInvalidConfig;
  } catch (const SizeOverflow& e) {
    std::cerr << "size cap exceeded: " << e.what() << "\n";
    return kSizeCap;
  } catch (const Error& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kInvalidConfig;
  } catch (const std::logic_error& e) {
    std::cerr << "verification failed: " << e.what() << "\n";
    return kVerificationFailed;
  }
}
