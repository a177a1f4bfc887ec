#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "document.hpp"
#include "impactfrac/cli.hpp"
#include "impactfrac/distributions.hpp"
#include "impactfrac/error.hpp"
#include "impactfrac/estimators.hpp"
#include "impactfrac/simulation.hpp"

namespace impactfrac::cli {

namespace {

// Thrown for flag combinations CLI11 cannot express.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

[[noreturn]] void usage(const std::string& msg) { throw UsageError(msg); }

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(format_number(v)); }

// ---------------------------------------------------------------------------
// Options shared by every subcommand
// ---------------------------------------------------------------------------

struct OutputOptions {
  bool json = false;
  bool csv = false;
  std::string output;
  std::uint64_t seed = 1;

  Format format() const {
    if (json && csv) usage("--json and --csv are mutually exclusive");
    return json ? Format::Json : (csv ? Format::Csv : Format::Text);
  }
};

void add_output_options(CLI::App* sub, OutputOptions& o, bool seed_required = false) {
  sub->add_flag("--json", o.json, "Emit a JSON document");
  sub->add_flag("--csv", o.csv, "Emit CSV rows");
  sub->add_option("-o,--output", o.output,
                  "Write to this file (relative paths resolve against $" +
                      std::string(kOutputDirEnv) + ")");
  auto* seed = sub->add_option("--seed", o.seed, "Random seed (recorded in every output)");
  if (seed_required) seed->required();
  sub->add_option("--config", "Key-value or JSON config file; flags given later override it");
}

// Options that describe how to render, not what to compute.
bool is_presentation_option(const std::string& name) {
  return name == "json" || name == "csv" || name == "output" || name == "config" ||
         name == "help" || name == "threads";
}

Json effective_config(const CLI::App* sub) {
  Json cfg = Json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_lnames().empty()) continue;
    const std::string name = opt->get_lnames().front();
    if (is_presentation_option(name)) continue;
    if (opt->count() > 0) {
      const auto& results = opt->results();
      if (opt->get_type_size() == 0) {
        cfg[name] = opt->as<bool>();
      } else if (opt->get_multi_option_policy() == CLI::MultiOptionPolicy::TakeAll) {
        cfg[name] = results;
      } else if (!results.empty()) {
        cfg[name] = results.back();
      }
    } else if (!opt->get_default_str().empty() && opt->get_type_size() != 0) {
      cfg[name] = opt->get_default_str();
    }
  }
  return cfg;
}

Json base_header(const std::string& command, std::uint64_t seed) {
  Json h = Json::object();
  h["tool"] = "impactfrac";
  h["version"] = std::string(kVersion);
  h["command"] = command;
  h["seed"] = seed;
  return h;
}

// ---------------------------------------------------------------------------
// Relative-risk model flags
// ---------------------------------------------------------------------------

struct ModelOptions {
  std::optional<double> rr;
  std::string rr_ci;
  double rr_level = 0.95;
  std::string beta;
  std::string beta_se;
  std::string form = "exponential";
};

void add_model_options(CLI::App* sub, ModelOptions& m) {
  sub->add_option("--rr", m.rr, "Relative risk per unit exposure (exponential form)");
  sub->add_option("--rr-ci", m.rr_ci, "Confidence bounds of --rr as lo,hi");
  sub->add_option("--rr-level", m.rr_level, "Confidence level of --rr-ci")->capture_default_str();
  sub->add_option("--beta", m.beta, "Coefficient(s), comma separated");
  sub->add_option("--beta-se", m.beta_se, "Standard error(s) of --beta, comma separated");
  sub->add_option("--form", m.form, "exponential or linear")
      ->capture_default_str()
      ->check(CLI::IsMember({"exponential", "linear"}, CLI::ignore_case));
}

RiskForm parse_form(const std::string& form) {
  std::string f = form;
  std::transform(f.begin(), f.end(), f.begin(), [](unsigned char c) { return std::tolower(c); });
  return f == "linear" ? RiskForm::Linear : RiskForm::Exponential;
}

RelativeRiskModel build_model(const ModelOptions& m, bool require_se = true) {
  const bool have_rr = m.rr.has_value();
  const bool have_beta = !m.beta.empty();
  if (have_rr && have_beta) usage("give either --rr/--rr-ci or --beta/--beta-se, not both");
  if (!have_rr && !have_beta) usage("a relative risk is required: --rr with --rr-ci or --beta-se, or --beta");
  if (have_rr) {
    if (parse_form(m.form) != RiskForm::Exponential) usage("--rr implies the exponential form");
    if (!(*m.rr > 0.0)) usage("--rr must be positive");
    if (m.rr_ci.empty()) {
      if (!m.beta_se.empty()) {
        const auto se = parse_list(m.beta_se);
        if (se.size() != 1 || !(se[0] >= 0.0)) usage("--beta-se with --rr takes one value >= 0");
        return RelativeRiskModel::scalar(RiskForm::Exponential, std::log(*m.rr), se[0]);
      }
      if (require_se) usage("--rr needs --rr-ci lo,hi or --beta-se");
      return RelativeRiskModel::scalar(RiskForm::Exponential, std::log(*m.rr), 0.0);
    }
    if (!m.beta_se.empty()) usage("give --rr-ci or --beta-se, not both");
    const auto ci = parse_list(m.rr_ci);
    if (ci.size() != 2) usage("--rr-ci takes two values: lo,hi");
    return RelativeRiskModel::from_relative_risk(*m.rr, ci[0], ci[1], m.rr_level);
  }
  const auto beta = parse_list(m.beta);
  std::vector<double> se;
  if (!m.beta_se.empty()) {
    se = parse_list(m.beta_se);
  } else if (require_se) {
    usage("--beta needs --beta-se");
  } else {
    se.assign(beta.size(), 0.0);
  }
  if (se.size() != beta.size()) usage("--beta and --beta-se must have the same length");
  const auto k = static_cast<Eigen::Index>(beta.size());
  Eigen::VectorXd b(k);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    b[i] = beta[static_cast<std::size_t>(i)];
    const double s = se[static_cast<std::size_t>(i)];
    if (!(s >= 0.0)) usage("--beta-se entries must be >= 0");
    cov(i, i) = s * s;
  }
  return RelativeRiskModel(parse_form(m.form), b, cov);
}

Json model_json(const RelativeRiskModel& model) {
  Json j = Json::object();
  j["form"] = model.form() == RiskForm::Exponential ? "exponential" : "linear";
  Json beta = Json::array();
  Json se = Json::array();
  for (Eigen::Index i = 0; i < model.dimension(); ++i) {
    beta.push_back(model.beta()[i]);
    se.push_back(std::sqrt(model.beta_cov()(i, i)));
  }
  j["beta"] = beta;
  j["beta_se"] = se;
  return j;
}

// ---------------------------------------------------------------------------
// paf / pif
// ---------------------------------------------------------------------------

struct EstimateCommand {
  OutputOptions out;
  ModelOptions model;
  std::string data;
  std::optional<double> mean;
  std::optional<double> sd;
  std::optional<double> n;
  double level = 0.95;
  std::string mode = "taylor-variance";
  std::string method = "auto";
  std::string family;
  std::string params;
  std::optional<double> p0;
  std::optional<double> upper;
  std::string truncation = "renormalized";
  bool clamp_ci = false;
  std::string cft = "zero";
};

void add_estimate_options(CLI::App* sub, EstimateCommand& c, bool pif) {
  add_output_options(sub, c.out);
  add_model_options(sub, c.model);
  sub->add_option("--data", c.data, "CSV of individual exposures (empirical path)");
  sub->add_option("--mean", c.mean, "Exposure mean (summary path)");
  sub->add_option("--sd", c.sd, "Exposure standard deviation (summary path)");
  sub->add_option("--n", c.n, "Sample size (summary path)");
  sub->add_option("--level", c.level, "Confidence level")->capture_default_str();
  sub->add_option("--mode", c.mode, "Approximate variance mode: taylor-variance or paper-sd")
      ->capture_default_str();
  sub->add_option("--method", c.method, "auto, empirical, approximate, standard or mixture")
      ->capture_default_str()
      ->check(CLI::IsMember({"auto", "empirical", "approximate", "standard", "mixture"},
                            CLI::ignore_case));
  sub->add_option("--family", c.family, "Parametric family for standard / mixture");
  sub->add_option("--params", c.params, "Family parameters a,b for the mixture method");
  sub->add_option("--p0", c.p0, "Point mass at zero for the mixture method");
  sub->add_option("--upper", c.upper, "Truncation bound M for the mixture method");
  sub->add_option("--truncation", c.truncation,
                  "Normal exposure convention: renormalized or discard")
      ->capture_default_str();
  sub->add_flag("--clamp-ci", c.clamp_ci, "Clamp the interval's upper bound at 1");
  auto* cft = sub->add_option("--cft", c.cft, "zero | identity | scale:<a> | shift:<d> [+clamp]");
  if (pif) {
    cft->required();
  } else {
    cft->capture_default_str();
  }
}

Json estimate_json(const EstimateResult& r) {
  Json j = Json::object();
  j["quantity"] = std::string(to_string(r.quantity));
  j["point"] = number(r.point);
  j["se"] = r.se ? number(*r.se) : Json(nullptr);
  if (r.ci) {
    j["ci"] = Json{{"lower", number(r.ci->lower)}, {"upper", number(r.ci->upper)}};
  } else {
    j["ci"] = nullptr;
  }
  j["level"] = r.level;
  j["method"] = std::string(to_string(r.method));
  Json d = Json::object();
  d["mu_obs"] = number(r.diagnostics.mu_obs);
  d["mu_cft"] = number(r.diagnostics.mu_cft);
  d["divergent"] = r.diagnostics.divergent;
  d["notes"] = r.diagnostics.notes;
  j["diagnostics"] = d;
  return j;
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

FittedDistribution exposure_model(FittedDistribution d, TruncationConvention convention) {
  if (d.family() == Family::Normal && !d.folded() && !d.lower()) {
    return d.truncated(0.0, d.upper(), convention == TruncationConvention::Renormalized);
  }
  return d;
}

Document run_estimate(const std::string& command, const EstimateCommand& c,
                      const CLI::App* sub) {
  const RelativeRiskModel model = build_model(c.model);
  const Eigen::Index k = model.dimension();
  const Counterfactual cft = parse_counterfactual(c.cft, k);
  if (command == "paf" && cft.kind() != CounterfactualKind::Zero) {
    usage("paf uses the zero counterfactual; use the pif command for --cft " + c.cft);
  }
  const bool have_data = !c.data.empty();
  const bool have_summary = c.mean || c.sd || c.n;
  if (have_data && have_summary) usage("give either --data or --mean/--sd/--n, not both");

  std::string method = lowercase(c.method);
  if (method == "auto") {
    if (!c.family.empty()) {
      method = (c.p0 || !c.params.empty() || c.upper) ? "mixture" : "standard";
    } else {
      method = have_data ? "empirical" : "approximate";
    }
  }
  const ApproximateMode mode = parse_approximate_mode(c.mode);
  const TruncationConvention convention = parse_convention(c.truncation);
  EstimateOptions opt;
  opt.level = c.level;
  opt.clamp_ci_upper = c.clamp_ci;

  std::optional<CsvData> csv;
  if (have_data) csv = read_exposure_csv_file(c.data);
  auto summary = [&]() -> SummaryStats {
    if (csv) return SummaryStats::from_sample(ExposureSample(csv->values, csv->weights));
    if (!(c.mean && c.sd && c.n)) usage("the summary path needs --mean, --sd and --n");
    return SummaryStats::scalar(*c.mean, *c.sd, *c.n);
  };

  Document doc;
  doc.header = base_header(command, c.out.seed);
  Json extra = Json::object();
  EstimateResult r;
  if (method == "empirical") {
    if (!csv) usage("the empirical method needs --data");
    const ExposureSample sample(csv->values, csv->weights);
    r = empirical_estimate(sample, model, cft, opt);
    extra["n"] = sample.size();
    extra["columns"] = csv->columns;
  } else if (method == "approximate") {
    const SummaryStats s = summary();
    r = approximate_estimate(s, model, cft, mode, opt);
    extra["n"] = s.n;
  } else {
    if (c.family.empty()) usage("the " + method + " method needs --family");
    if (k != 1) usage("parametric methods take a scalar exposure");
    const Family family = parse_family(c.family);
    if (method == "standard") {
      // Moment matching needs no sample size.
      double mean = 0.0, variance = 0.0;
      if (csv) {
        const SummaryStats s = summary();
        mean = s.mean[0];
        variance = s.cov(0, 0);
      } else {
        if (!(c.mean && c.sd)) usage("the standard method needs --data or --mean and --sd");
        mean = *c.mean;
        variance = *c.sd * *c.sd;
      }
      const auto dist = exposure_model(fit_moments(family, mean, variance), convention);
      r = standard_estimate(dist, model, cft);
      extra["distribution"] = dist.describe();
    } else {
      FittedDistribution dist = FittedDistribution::gamma(1.0, 1.0);
      double p0 = c.p0.value_or(0.0);
      if (!c.params.empty()) {
        const auto p = parse_list(c.params);
        if (p.size() != 2) usage("--params takes two values");
        dist = FittedDistribution::make(family, p[0], p[1]);
      } else if (csv) {
        std::vector<double> positives;
        const auto col = csv->values.col(0);
        for (Eigen::Index i = 0; i < col.size(); ++i) {
          if (col[i] > 0.0) positives.push_back(col[i]);
        }
        if (!c.p0) p0 = 1.0 - static_cast<double>(positives.size()) / static_cast<double>(col.size());
        dist = fit_mle(family, positives);
      } else {
        usage("the mixture method needs --params or --data");
      }
      dist = exposure_model(dist, convention);
      r = mixture_estimate(p0, dist, model, c.upper, cft);
      extra["distribution"] = dist.describe();
      extra["p0"] = p0;
      extra["upper"] = c.upper ? Json(*c.upper) : Json(nullptr);
    }
  }

  doc.header["method"] = std::string(to_string(r.method));
  doc.header["conventions"] = Json{{"truncation", std::string(to_string(convention))},
                                   {"variance_mode", std::string(to_string(mode))},
                                   {"clamp_ci_upper", c.clamp_ci}};
  doc.result = estimate_json(r);
  doc.result["counterfactual"] = cft.describe();
  doc.result["model"] = model_json(model);
  for (auto& [key, value] : extra.items()) doc.result[key] = value;
  doc.config = effective_config(sub);
  return doc;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitCommand {
  OutputOptions out;
  std::string data;
  std::string family;
  std::string method = "mle";
  bool split_zeros = false;
  std::string column;
  int points = 101;
};

std::array<const char*, 2> parameter_names(Family f) {
  switch (f) {
    case Family::Gamma: return {"shape", "scale"};
    case Family::Lognormal: return {"log_mean", "log_sd"};
    case Family::Normal: return {"mean", "sd"};
    case Family::Weibull: return {"shape", "scale"};
  }
  return {"first", "second"};
}

Document run_fit(const FitCommand& c, const CLI::App* sub) {
  const Family family = parse_family(c.family);
  const std::string method = lowercase(c.method);
  const CsvData csv = read_exposure_csv_file(c.data);
  Eigen::Index col = 0;
  if (!c.column.empty()) {
    const auto it = std::find(csv.columns.begin(), csv.columns.end(), c.column);
    if (it == csv.columns.end()) usage("no column named '" + c.column + "'");
    col = it - csv.columns.begin();
  } else if (csv.columns.size() != 1) {
    usage("data has several columns; choose one with --column");
  }

  std::vector<double> values;
  std::size_t zeros = 0;
  for (Eigen::Index i = 0; i < csv.values.rows(); ++i) {
    const double v = csv.values(i, col);
    if (c.split_zeros && v == 0.0) {
      ++zeros;
    } else {
      values.push_back(v);
    }
  }
  const std::size_t total = static_cast<std::size_t>(csv.values.rows());
  const double p0 = c.split_zeros ? static_cast<double>(zeros) / static_cast<double>(total) : 0.0;

  FittedDistribution dist = FittedDistribution::gamma(1.0, 1.0);
  if (method == "mom") {
    if (values.size() < 2) fail(ErrorCode::DegenerateSample, "need at least two values to fit");
    const auto s = SummaryStats::from_sample(ExposureSample::scalar(values));
    dist = fit_moments(family, s.mean[0], s.cov(0, 0));
  } else {
    dist = fit_mle(family, values);
  }

  Document doc;
  doc.header = base_header("fit", c.out.seed);
  doc.header["method"] = method;
  doc.header["conventions"] = Json{{"split_zeros", c.split_zeros}};
  doc.result["family"] = std::string(to_string(family));
  doc.result["fit_method"] = std::string(to_string(dist.fit_method()));
  const auto names = parameter_names(family);
  const auto params = dist.parameters();
  doc.result["parameters"] = Json{{names[0], params[0]}, {names[1], params[1]}};
  doc.result["n"] = total;
  doc.result["n_fitted"] = values.size();
  if (c.split_zeros) doc.result["p0"] = p0;
  doc.result["mean"] = dist.parent_mean();
  doc.result["variance"] = dist.parent_variance();
  if (method == "mle") doc.result["log_likelihood"] = log_likelihood(dist, values);

  // Density of the fitted model (with the zero mass) on [0, max(data)].
  const double hi = *std::max_element(values.begin(), values.end());
  const double lo = family == Family::Normal ? std::min(0.0, *std::min_element(values.begin(), values.end())) : 0.0;
  const FittedDistribution shown = dist.with_zero_mass(p0);
  Table density{"density", {"x", "pdf", "cdf"}, {}};
  const int pts = std::max(2, c.points);
  for (int i = 0; i < pts; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(pts - 1);
    density.rows.push_back({x, number(shown.pdf(x)), shown.cdf(x)});
  }
  doc.tables.push_back(std::move(density));
  doc.config = effective_config(sub);
  return doc;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateCommand {
  OutputOptions out;
  std::string family = "lognormal";
  std::string params;
  double p0 = 0.0;
  std::size_t n = 1000;
  std::size_t replications = 1000;
  double upper = 12.0;
  double rr = 1.27;
  double sigma2_numerator = BetaVarianceRule{}.numerator;
  std::string cft = "zero";
  std::string mode = "paper-sd";
  double level = 0.95;
  unsigned threads = 0;
};

Json method_row_values(const MethodReport& m) {
  return Json::array({std::string(to_string(m.method)), number(m.mean_estimate),
                      number(m.mean_rel_bias), number(m.mean_se), number(m.sd_of_estimates),
                      m.coverage, m.successes, m.failures});
}

Document run_simulate(const SimulateCommand& c, const CLI::App* sub) {
  const Family family = parse_family(c.family);
  Scenario s;
  if (!c.params.empty()) {
    const auto p = parse_list(c.params);
    if (p.size() != 2) usage("--params takes two values");
    auto base = FittedDistribution::make(family, p[0], p[1]);
    if (family == Family::Normal) base = base.with_folding();
    s.generator = base.truncated(0.0, c.upper);
  } else {
    s.generator = coverage_generator(family, c.upper);
  }
  s.label = std::string(to_string(family));
  s.p0 = c.p0;
  s.n = c.n;
  s.replications = c.replications;
  if (!(c.rr > 0.0)) usage("--rr must be positive");
  s.beta0 = std::log(c.rr);
  s.beta_variance.numerator = c.sigma2_numerator;
  s.seed = c.out.seed;
  s.cft = parse_counterfactual(c.cft);
  s.approximate_mode = parse_approximate_mode(c.mode);
  s.level = c.level;

  const ScenarioReport rep = run_scenario(s, c.threads);

  Document doc;
  doc.header = base_header("simulate", c.out.seed);
  doc.header["method"] = "empirical+approximate";
  doc.header["conventions"] = Json{{"truncation", "renormalized"},
                                   {"variance_mode", std::string(to_string(s.approximate_mode))},
                                   {"zero_draw", "bernoulli(p0)"}};
  doc.result["generator"] = s.generator.describe();
  doc.result["quantity"] = std::string(to_string(rep.quantity));
  doc.result["true_value"] = rep.true_value;
  doc.result["sigma2"] = s.beta_variance.variance(s.n);
  Json failures = Json::array();
  for (const auto* m : {&rep.empirical, &rep.approximate}) {
    for (const auto& msg : m->failure_messages) failures.push_back(std::string(to_string(m->method)) + ": " + msg);
  }
  if (!failures.empty()) doc.result["failure_messages"] = failures;

  Table t{"report",
          {"family", "p0", "n", "B", "seed", "true_value", "method", "mean_estimate",
           "mean_rel_bias", "mean_se", "sd_of_estimates", "coverage", "successes", "failures"},
          {}};
  for (const auto* m : {&rep.empirical, &rep.approximate}) {
    std::vector<Json> row{s.label, s.p0, s.n, s.replications, s.seed, rep.true_value};
    for (const auto& v : method_row_values(*m)) row.push_back(v);
    t.rows.push_back(std::move(row));
  }
  doc.tables.push_back(std::move(t));
  doc.config = effective_config(sub);
  return doc;
}

// ---------------------------------------------------------------------------
// curve
// ---------------------------------------------------------------------------

struct CurveCommand {
  OutputOptions out;
  ModelOptions model;
  std::string family = "lognormal";
  std::string params;
  std::optional<double> logmu;
  std::optional<double> logsigma;
  std::vector<std::string> cfts;
  std::string m_grid = "1:60:1";
  double p0 = 0.0;
  std::string truncation = "renormalized";
};

Document run_curve(const CurveCommand& c, const CLI::App* sub) {
  const Family family = parse_family(c.family);
  double a = 0.05, b = 0.98;
  if (!c.params.empty()) {
    if (c.logmu || c.logsigma) usage("give either --params or --logmu/--logsigma");
    const auto p = parse_list(c.params);
    if (p.size() != 2) usage("--params takes two values");
    a = p[0];
    b = p[1];
  } else if (c.logmu || c.logsigma) {
    if (family != Family::Lognormal) usage("--logmu/--logsigma apply to the lognormal family");
    a = c.logmu.value_or(a);
    b = c.logsigma.value_or(b);
  } else if (family != Family::Lognormal) {
    usage("--params is required for the " + c.family + " family");
  }
  const auto dist = exposure_model(FittedDistribution::make(family, a, b),
                                   parse_convention(c.truncation));
  ModelOptions mopt = c.model;
  if (!mopt.rr && mopt.beta.empty()) mopt.rr = 1.27;
  const RelativeRiskModel model = build_model(mopt, false);
  std::vector<Counterfactual> cfts;
  for (const auto& spec : c.cfts) cfts.push_back(parse_counterfactual(spec));
  if (cfts.empty()) cfts.push_back(Counterfactual::zero());
  const auto grid = parse_grid(c.m_grid);
  const auto points = truncation_curve(dist, model, cfts, grid, c.p0);

  Document doc;
  doc.header = base_header("curve", c.out.seed);
  doc.header["method"] = std::string(to_string(Method::Mixture));
  doc.header["conventions"] = Json{{"truncation", "renormalized"}};
  doc.result["distribution"] = dist.describe();
  doc.result["p0"] = c.p0;
  doc.result["model"] = model_json(model);
  Table t{"curve", {"M", "cft", "quantity", "value"}, {}};
  for (const auto& p : points) {
    t.rows.push_back({p.upper, p.cft, std::string(to_string(p.quantity)), number(p.value)});
  }
  doc.tables.push_back(std::move(t));
  doc.config = effective_config(sub);
  return doc;
}

// ---------------------------------------------------------------------------
// biasgrid
// ---------------------------------------------------------------------------

struct BiasGridCommand {
  OutputOptions out;
  ModelOptions model;
  bool defaults = false;
  std::string convention = "both";
};

Document run_biasgrid(const BiasGridCommand& c, const CLI::App* sub) {
  ModelOptions mopt = c.model;
  if (!mopt.rr && mopt.beta.empty()) mopt.rr = 1.27;
  const RelativeRiskModel model = build_model(mopt, false);
  std::vector<TruncationConvention> conventions;
  const std::string conv = lowercase(c.convention);
  if (conv == "both") {
    conventions = {TruncationConvention::Renormalized, TruncationConvention::Discard};
  } else {
    conventions = {parse_convention(conv)};
  }

  Document doc;
  doc.header = base_header("biasgrid", c.out.seed);
  doc.header["method"] = std::string(to_string(Method::Standard));
  Json conv_names = Json::array();
  for (auto cv : conventions) conv_names.push_back(std::string(to_string(cv)));
  doc.header["conventions"] = Json{{"truncation", conv_names}, {"fit", "mom"}};
  doc.result["model"] = model_json(model);

  const auto truths = default_true_specs();
  const auto assumed = default_assumed_families();
  Table cells{"cells",
              {"convention", "true", "assumed", "paf_true", "paf_assumed", "bias_percent",
               "divergent"},
              {}};
  std::vector<Table> grids;
  for (auto cv : conventions) {
    const BiasGrid g = bias_grid(truths, assumed, model, cv);
    Table grid{"grid_" + std::string(to_string(cv)), {"true"}, {}};
    for (Family f : g.columns) grid.columns.push_back(std::string(to_string(f)));
    for (std::size_t r = 0; r < g.rows.size(); ++r) {
      std::vector<Json> row{g.rows[r]};
      for (std::size_t col = 0; col < g.columns.size(); ++col) {
        const BiasCell& cell = g.at(r, col);
        row.push_back(std::round(cell.bias_percent * 10.0) / 10.0);
        cells.rows.push_back({std::string(to_string(cv)), cell.true_label,
                              std::string(to_string(cell.assumed)), cell.paf_true,
                              cell.paf_assumed, cell.bias_percent, cell.divergent});
      }
      grid.rows.push_back(std::move(row));
    }
    grids.push_back(std::move(grid));
  }
  for (auto& g : grids) doc.tables.push_back(std::move(g));
  doc.tables.push_back(std::move(cells));
  doc.config = effective_config(sub);
  return doc;
}

// ---------------------------------------------------------------------------

// Moves "--config X" / "--config=X" out of the argument list and splices the
// file's options in right after the subcommand, so later flags override.
std::vector<std::string> expand_config(const std::vector<std::string>& args) {
  std::vector<std::string> rest;
  std::vector<std::string> injected;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& a = args[i];
    std::string path;
    if (a == "--config") {
      if (i + 1 >= args.size()) usage("--config needs a file path");
      path = args[++i];
    } else if (a.rfind("--config=", 0) == 0) {
      path = a.substr(9);
    } else {
      rest.push_back(a);
      continue;
    }
    const auto tokens = read_config_tokens(path);
    injected.insert(injected.end(), tokens.begin(), tokens.end());
  }
  if (injected.empty()) return rest;
  auto sub = std::find_if(rest.begin(), rest.end(), [](const std::string& s) {
    return !s.empty() && s.front() != '-';
  });
  if (sub == rest.end()) usage("--config must accompany a subcommand");
  // A "command" key in the config names the subcommand it was written for.
  std::vector<std::string> filtered;
  for (const auto& t : injected) {
    if (t.rfind("--command=", 0) == 0) {
      if (t.substr(10) != *sub) usage("config was written for '" + t.substr(10) + "'");
      continue;
    }
    filtered.push_back(t);
  }
  const auto pos = static_cast<std::size_t>(sub - rest.begin()) + 1;
  rest.insert(rest.begin() + static_cast<std::ptrdiff_t>(pos), filtered.begin(), filtered.end());
  return rest;
}

void emit(const Document& doc, const OutputOptions& o, std::ostream& out) {
  const Format format = o.format();
  if (o.output.empty()) {
    render(doc, format, out);
    return;
  }
  std::filesystem::path path(o.output);
  if (path.is_relative()) {
    if (const char* dir = std::getenv(std::string(kOutputDirEnv).c_str()); dir && *dir) {
      path = std::filesystem::path(dir) / path;
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream file(path);
  if (!file) usage("cannot write output file '" + path.string() + "'");
  render(doc, format, file);
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::UnsupportedMode:
    case ErrorCode::InvalidPmf:
    case ErrorCode::NonPositiveData:
      return kUsage;
    default:
      return kNumerical;
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Potential impact fractions and population attributable fractions", "impactfrac"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

  EstimateCommand paf, pif;
  auto* paf_cmd = app.add_subcommand("paf", "Population attributable fraction");
  add_estimate_options(paf_cmd, paf, false);
  auto* pif_cmd = app.add_subcommand("pif", "Potential impact fraction for a counterfactual");
  add_estimate_options(pif_cmd, pif, true);

  FitCommand fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit an exposure distribution");
  add_output_options(fit_cmd, fit.out);
  fit_cmd->add_option("--data", fit.data, "CSV of exposures")->required();
  fit_cmd->add_option("--family", fit.family, "gamma, lognormal, normal or weibull")->required();
  fit_cmd->add_option("--method", fit.method, "mom or mle")
      ->capture_default_str()
      ->check(CLI::IsMember({"mom", "mle"}, CLI::ignore_case));
  fit_cmd->add_flag("--split-zeros", fit.split_zeros, "Fit positives only and report p0");
  fit_cmd->add_option("--column", fit.column, "Column to fit when the CSV has several");
  fit_cmd->add_option("--points", fit.points, "Points in the density table")->capture_default_str();

  SimulateCommand sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo bias and coverage study");
  add_output_options(sim_cmd, sim.out, true);
  sim_cmd->add_option("--family", sim.family, "lognormal, normal, weibull or gamma")
      ->capture_default_str();
  sim_cmd->add_option("--params", sim.params, "Generator parameters a,b (family defaults otherwise)");
  sim_cmd->add_option("--p0", sim.p0, "Probability of a zero exposure")->capture_default_str();
  sim_cmd->add_option("--n", sim.n, "Sample size per replication")->capture_default_str();
  sim_cmd->add_option("-B,--B,--replications", sim.replications, "Replications")
      ->capture_default_str();
  sim_cmd->add_option("--upper", sim.upper, "Truncation bound M")->capture_default_str();
  sim_cmd->add_option("--rr", sim.rr, "True relative risk per unit")->capture_default_str();
  sim_cmd->add_option("--sigma2-numerator", sim.sigma2_numerator,
                      "Coefficient variance is this divided by n")
      ->capture_default_str();
  sim_cmd->add_option("--cft", sim.cft, "Counterfactual")->capture_default_str();
  sim_cmd->add_option("--mode", sim.mode, "Approximate variance mode")->capture_default_str();
  sim_cmd->add_option("--level", sim.level, "Confidence level")->capture_default_str();
  sim_cmd->add_option("--threads", sim.threads, "Worker threads (0 = all cores)");

  CurveCommand curve;
  auto* curve_cmd = app.add_subcommand("curve", "Fraction as a function of the truncation bound");
  add_output_options(curve_cmd, curve.out);
  add_model_options(curve_cmd, curve.model);
  curve_cmd->add_option("--family", curve.family, "Exposure family")->capture_default_str();
  curve_cmd->add_option("--params", curve.params, "Family parameters a,b");
  curve_cmd->add_option("--logmu", curve.logmu, "Lognormal log-mean");
  curve_cmd->add_option("--logsigma", curve.logsigma, "Lognormal log-sd");
  curve_cmd->add_option("--cft", curve.cfts, "Counterfactual (repeatable)")
      ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
  curve_cmd->add_option("--m-grid", curve.m_grid, "Bounds as start:stop:step or a list")
      ->capture_default_str();
  curve_cmd->add_option("--p0", curve.p0, "Point mass at zero")->capture_default_str();
  curve_cmd->add_option("--truncation", curve.truncation, "Normal exposure convention")
      ->capture_default_str();

  BiasGridCommand grid;
  auto* grid_cmd = app.add_subcommand("biasgrid", "Relative bias of the standard method");
  add_output_options(grid_cmd, grid.out);
  add_model_options(grid_cmd, grid.model);
  grid_cmd->add_flag("--defaults", grid.defaults, "Use the built-in truths and families");
  grid_cmd->add_option("--convention", grid.convention, "renormalized, discard or both")
      ->capture_default_str();

  try {
    std::vector<std::string> argv = expand_config(args);
    std::reverse(argv.begin(), argv.end());
    app.parse(argv);

    Document doc;
    const OutputOptions* output = nullptr;
    if (*paf_cmd) {
      doc = run_estimate("paf", paf, paf_cmd);
      output = &paf.out;
    } else if (*pif_cmd) {
      doc = run_estimate("pif", pif, pif_cmd);
      output = &pif.out;
    } else if (*fit_cmd) {
      doc = run_fit(fit, fit_cmd);
      output = &fit.out;
    } else if (*sim_cmd) {
      doc = run_simulate(sim, sim_cmd);
      output = &sim.out;
    } else if (*curve_cmd) {
      doc = run_curve(curve, curve_cmd);
      output = &curve.out;
    } else {
      doc = run_biasgrid(grid, grid_cmd);
      output = &grid.out;
    }
    emit(doc, *output, out);
    return kOk;
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace impactfrac::cli
