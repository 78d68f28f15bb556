#include "unlinking/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <CLI11.hpp>

#include "unlinking/gauss.hpp"
#include "unlinking/parser.hpp"
#include "unlinking/report.hpp"
#include "unlinking/structure.hpp"
#include "unlinking/unlink.hpp"

namespace unlinking::cli {

namespace {

struct RunConfig {
  std::string u_path;
  std::string v_path;
  std::string p_path;
  std::string dir;
  std::string marginalize;
  std::string out_path;
  std::uint64_t seed = 42;
  std::uint64_t mc_samples = 1'000'000;
  std::uint64_t trials = 10'000;
  double tol_residual = 1e-9;
  double tol_ortho = 1e-10;
  bool mc = false;
};

Polynomial normalized(const Polynomial& p) { return p - Polynomial::constant(p.arity(), p.constant_term()); }

nlohmann::ordered_json estimate_json(const McEstimate& e) {
  nlohmann::ordered_json j;
  j["mean"] = e.mean;
  j["stderr"] = e.standard_error;
  j["samples"] = e.samples;
  j["seed"] = e.seed;
  return j;
}

std::vector<std::size_t> parse_index_list(const std::string& text, std::size_t arity) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(std::remove_if(item.begin(), item.end(), ::isspace), item.end());
    if (item.empty()) continue;
    if (item.find_first_not_of("0123456789") != std::string::npos) throw FormatError("bad index \"" + item + "\"");
    const std::size_t k = std::stoul(item);
    if (k < 1 || k > arity) throw DimensionError("index " + item + " out of range 1.." + std::to_string(arity));
    out.push_back(k - 1);
  }
  return out;
}

nlohmann::ordered_json verify_fixture(const Polynomial& p, const RunConfig& cfg, bool& pass, bool& hypotheses) {
  nlohmann::ordered_json checks;
  auto record = [&](const char* name, bool ok) {
    checks[name] = ok;
    pass = pass && ok;
  };
  record("round_trip_text", parse_expression(to_expression(p), p.arity()) == p);
  record("round_trip_json", polynomial_from_json(nlohmann::json::parse(to_json(p).dump())) == p);
  record("symmetry_parity", is_symmetric(p) == (p - reflect(p)).is_zero());

  const Polynomial q = normalized(p);
  const QcVerdict qc = qc_falsify(q, QcOptions{cfg.trials, cfg.seed});
  checks["qc_status"] = to_string(qc.status);
  hypotheses = is_symmetric(q) && qc.status != QcStatus::falsified;
  if (qc.witness) record("witness_reverified", witness_holds(q, *qc.witness));

  const Subspace s = invariance_subspace(q);
  checks["invariance_dim"] = s.dimension();
  bool basis_in_rays = true;
  bool translation = true;
  for (const auto& b : s.basis()) {
    basis_in_rays = basis_in_rays && ray_constant(q, b);
    translation = translation && check_translation_invariance(q, b, 20, cfg.seed);
  }
  record("kernel_in_ray_set", basis_in_rays);
  record("translation_invariance", translation);

  if (qc.status != QcStatus::falsified) {
    RationalSampler sampler(cfg.seed);
    bool law = true;
    for (int k = 0; k < 20 && !s.is_zero(); ++k) {
      RationalVector combo(q.arity(), Rational(0));
      for (const auto& b : s.basis()) {
        const Rational c = sampler.coordinate();
        for (std::size_t i = 0; i < combo.size(); ++i) combo[i] += c * b[i];
      }
      law = law && ray_constant(q, combo);
    }
    record("subspace_law", law);
    if (is_symmetric(q)) {
      bool minimum = true;
      for (int k = 0; k < 1000; ++k) minimum = minimum && sgn(evaluate(q, sampler.point(q.arity()))) >= 0;
      record("minimum_at_origin", minimum);
    }
  }
  return checks;
}

int emit(const nlohmann::ordered_json& report, const RunConfig& cfg, std::ostream& out) {
  const std::string text = dump_report(report) + "\n";
  if (cfg.out_path.empty()) {
    out << text;
  } else {
    std::ofstream f(cfg.out_path, std::ios::binary);
    if (!f) throw FormatError("cannot write " + cfg.out_path);
    f << text;
  }
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact Gaussian covariance, invariance subspaces and unlinking transforms for polynomials"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", cfg.seed, "Random seed (env UNLINK_SEED)")->envname("UNLINK_SEED")->check(CLI::PositiveNumber);
    sub->add_option("--trials", cfg.trials, "Falsifier trials")->check(CLI::PositiveNumber);
    sub->add_option("--mc-samples", cfg.mc_samples, "Monte Carlo samples")->check(CLI::PositiveNumber);
    sub->add_option("--out", cfg.out_path, "Write the report here instead of stdout");
    sub->add_option("--tol-residual", cfg.tol_residual, "Forbidden-coefficient tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--tol-ortho", cfg.tol_ortho, "Orthogonality tolerance")->check(CLI::PositiveNumber);
  };
  auto add_p = [&](CLI::App* sub) { sub->add_option("--p", cfg.p_path, "Polynomial file")->required(); };
  auto add_uv = [&](CLI::App* sub) {
    sub->add_option("--u", cfg.u_path, "First polynomial file")->required();
    sub->add_option("--v", cfg.v_path, "Second polynomial file")->required();
  };

  auto* check = app.add_subcommand("check", "Symmetry and quasi-convexity falsification");
  add_p(check);
  auto* invariance = app.add_subcommand("invariance", "Invariance subspace S_p of p - p(0)");
  add_p(invariance);
  auto* conc = app.add_subcommand("concordance", "Concordance order r, t, m");
  add_uv(conc);
  auto* cov = app.add_subcommand("cov", "Exact covariance, optionally with a Monte Carlo cross-check");
  add_uv(cov);
  cov->add_flag("--mc", cfg.mc, "Also estimate E[u v] by Monte Carlo");
  auto* marginal = app.add_subcommand("marginal", "Partial Gaussian expectation");
  add_p(marginal);
  marginal->add_option("--marginalize", cfg.marginalize, "Comma-separated 1-based variables to integrate out")->required();
  auto* unlink = app.add_subcommand("unlink", "Full unlinking pipeline");
  add_uv(unlink);
  auto* verify = app.add_subcommand("verify", "Run the property suite over a fixture directory");
  verify->add_option("--dir", cfg.dir, "Directory of .poly/.json fixtures")->required()->check(CLI::ExistingDirectory);
  for (auto* sub : {check, invariance, conc, cov, marginal, unlink, verify}) add_common(sub);

  std::vector<std::string> reversed;
  if (!args.empty()) reversed.assign(args.rbegin(), args.rend() - 1);
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsageError;
  }

  try {
    if (check->parsed()) {
      const Polynomial p = read_polynomial_file(cfg.p_path);
      const bool symmetric = is_symmetric(p);
      const QcVerdict qc = qc_falsify(normalized(p), QcOptions{cfg.trials, cfg.seed});
      nlohmann::ordered_json j;
      j["command"] = "check";
      j["expression"] = to_expression(p);
      j["symmetric"] = symmetric;
      j["qc"] = to_json(qc);
      j["seed"] = cfg.seed;
      emit(j, cfg, out);
      return symmetric && qc.status != QcStatus::falsified ? kSuccess : kHypothesisFalsified;
    }
    if (invariance->parsed()) {
      const Polynomial p = read_polynomial_file(cfg.p_path);
      nlohmann::ordered_json j;
      j["command"] = "invariance";
      j["constant_removed"] = to_string(p.constant_term());
      j["subspace"] = to_json(invariance_subspace(normalized(p)));
      return emit(j, cfg, out);
    }
    if (conc->parsed()) {
      const Polynomial u = read_polynomial_file(cfg.u_path);
      const Polynomial v = read_polynomial_file(cfg.v_path);
      nlohmann::ordered_json j;
      j["command"] = "concordance";
      j["report"] = to_json(concordance(normalized(u), normalized(v)));
      return emit(j, cfg, out);
    }
    if (cov->parsed()) {
      const Polynomial u = read_polynomial_file(cfg.u_path);
      const Polynomial v = read_polynomial_file(cfg.v_path);
      nlohmann::ordered_json j;
      j["command"] = "cov";
      j["cov_exact"] = to_string(covariance(u, v));
      j["e_u"] = to_string(expectation(u));
      j["e_v"] = to_string(expectation(v));
      j["e_uv"] = to_string(expectation(u * v));
      if (cfg.mc) {
        McOptions mc;
        mc.samples = cfg.mc_samples;
        mc.seed = cfg.seed;
        j["mc_e_uv"] = estimate_json(mc_estimate_product(to_real(u), to_real(v), mc));
      }
      j["seed"] = cfg.seed;
      return emit(j, cfg, out);
    }
    if (marginal->parsed()) {
      const Polynomial p = read_polynomial_file(cfg.p_path);
      const auto idx = parse_index_list(cfg.marginalize, p.arity());
      const Polynomial r = partial_expectation(p, idx);
      nlohmann::ordered_json j;
      j["command"] = "marginal";
      auto one_based = nlohmann::ordered_json::array();
      for (std::size_t i : idx) one_based.push_back(i + 1);
      j["marginalized"] = std::move(one_based);
      j["expression"] = to_expression(r);
      j["polynomial"] = to_json(r);
      return emit(j, cfg, out);
    }
    if (unlink->parsed()) {
      const Polynomial u = read_polynomial_file(cfg.u_path);
      const Polynomial v = read_polynomial_file(cfg.v_path);
      UnlinkConfig uc{cfg.seed, cfg.trials, cfg.tol_residual, cfg.tol_ortho};
      try {
        const UnlinkResult result = unlink_decision(u, v, uc);
        nlohmann::ordered_json j = to_json(result);
        j["seed"] = cfg.seed;
        emit(j, cfg, out);
        return result.verdict == Verdict::hypothesis_failed ? kHypothesisFailed : kSuccess;
      } catch (const HypothesisFalsified& e) {
        nlohmann::ordered_json j;
        j["verdict"] = "hypothesis_falsified";
        j["input"] = e.input();
        j["hypothesis"] = e.hypothesis();
        j["evidence"] = e.evidence();
        j["seed"] = cfg.seed;
        emit(j, cfg, out);
        return kHypothesisFalsified;
      }
    }
    if (verify->parsed()) {
      std::vector<std::filesystem::path> files;
      for (const auto& entry : std::filesystem::directory_iterator(cfg.dir)) {
        const auto ext = entry.path().extension();
        if (entry.is_regular_file() && (ext == ".poly" || ext == ".json")) files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      bool all_pass = true;
      bool all_hypotheses = true;
      auto fixtures = nlohmann::ordered_json::array();
      std::vector<Polynomial> polys;
      for (const auto& f : files) {
        const Polynomial p = read_polynomial_file(f);
        bool pass = true;
        bool hypotheses = true;
        nlohmann::ordered_json entry;
        entry["name"] = f.filename().string();
        entry["checks"] = verify_fixture(p, cfg, pass, hypotheses);
        entry["hypotheses"] = hypotheses;
        entry["pass"] = pass;
        all_pass = all_pass && pass;
        all_hypotheses = all_hypotheses && hypotheses;
        fixtures.push_back(std::move(entry));
        polys.push_back(normalized(p));
      }
      std::size_t pairs = 0;
      bool symmetric_order = true;
      for (std::size_t a = 0; a < polys.size(); ++a)
        for (std::size_t b = a + 1; b < polys.size(); ++b) {
          if (polys[a].arity() != polys[b].arity()) continue;
          ++pairs;
          try {
            const auto rep = concordance(polys[a], polys[b]);
            symmetric_order = symmetric_order && rep.r == rep.r_reverse;
          } catch (const InvariantViolation&) {
            symmetric_order = false;
          }
        }
      all_pass = all_pass && symmetric_order;
      nlohmann::ordered_json j;
      j["command"] = "verify";
      j["fixtures"] = std::move(fixtures);
      j["pairs_checked"] = pairs;
      j["concordance_symmetry"] = symmetric_order;
      j["hypotheses"] = all_hypotheses;
      j["pass"] = all_pass;
      j["seed"] = cfg.seed;
      emit(j, cfg, out);
      if (!all_pass) return kInternalError;
      return all_hypotheses ? kSuccess : kHypothesisFalsified;
    }
  } catch (const InvariantViolation& e) {
    err << "internal invariant violation: " << e.what() << "\n";
    return kInternalError;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kUsageError;
}

}  // namespace unlinking::cli
