#include "mgbench/problem_io.hpp"

#include "mgbench/experiments.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace mgbench {

using mgps::Matrix;
using mgps::ParameterError;
using mgps::Vector;
using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ParameterError(where + ": " + what); }

void only(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  std::set<std::string> keys(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!keys.count(it.key())) fail(where + "." + it.key(), "unknown key");
}

const json& field(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) fail(where + "." + key, "missing");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  return j.get<double>();
}

Vector vector_of(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number(j[i], where + "[" + std::to_string(i) + "]");
  return v;
}

/// Nested rows, or a flat row-major array with `cols` columns when cols > 0.
Matrix matrix_of(const json& j, const std::string& where, Eigen::Index cols = 0) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array");
  if (!j[0].is_array()) {
    if (cols <= 0) fail(where, "expected an array of rows");
    const Vector flat = vector_of(j, where);
    if (flat.size() % cols != 0) fail(where, "flat length " + std::to_string(flat.size()) + " is not a multiple of " + std::to_string(cols));
    const Eigen::Index rows = flat.size() / cols;
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r)
      for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[r * cols + c];
    return m;
  }
  const std::size_t width = j[0].size();
  Matrix m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(width));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const std::string row_where = where + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != width) fail(row_where, "expected a row of length " + std::to_string(width));
    for (std::size_t c = 0; c < width; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], row_where + "[" + std::to_string(c) + "]");
  }
  return m;
}

template <class F>
auto checked(const std::string& where, F&& make) {
  try {
    return make();
  } catch (const ParameterError& e) {
    fail(where, e.what());
  }
}

json to_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(Vector(m.row(r).transpose())));
  return rows;
}

json likelihood_json(const mgps::Likelihood& lik) {
  return {{"kind", std::string(lik.kind())}, {"A", to_json(lik.A())}, {"y", to_json(lik.y())}, {"sigma_y", lik.sigma_y()}};
}

}  // namespace

Eigen::Index Problem::dim() const {
  return std::visit([](const auto& p) { return p.dim(); }, prior);
}

Problem parse_problem(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParameterError(std::string("problem is not valid JSON: ") + e.what());
  }
  only(j, "problem", {"prior", "likelihood"});
  const json& pj = field(j, "problem", "prior");
  if (!pj.is_object()) fail("prior", "expected an object");
  const json& type = field(pj, "prior", "type");
  if (!type.is_string()) fail("prior.type", "expected a string");

  std::optional<std::variant<mgps::GaussianPrior, mgps::GaussianMixturePrior>> prior;
  if (type == "gaussian") {
    only(pj, "prior", {"type", "mean", "cov"});
    Vector mean = vector_of(field(pj, "prior", "mean"), "prior.mean");
    Matrix cov = matrix_of(field(pj, "prior", "cov"), "prior.cov", mean.size());
    prior = checked("prior", [&] { return mgps::GaussianPrior(mean, cov); });
  } else if (type == "gmm") {
    only(pj, "prior", {"type", "weights", "means", "sigmas"});
    Vector weights = vector_of(field(pj, "prior", "weights"), "prior.weights");
    Matrix means_rows = matrix_of(field(pj, "prior", "means"), "prior.means");
    Vector sigmas = vector_of(field(pj, "prior", "sigmas"), "prior.sigmas");
    if (means_rows.rows() != weights.size()) fail("prior.means", "expected one mean per weight");
    prior = checked("prior", [&] { return mgps::GaussianMixturePrior(weights, means_rows.transpose(), sigmas); });
  } else {
    fail("prior.type", "expected \"gaussian\" or \"gmm\"");
  }
  const Eigen::Index d = std::visit([](const auto& p) { return p.dim(); }, *prior);

  const json& lj = field(j, "problem", "likelihood");
  only(lj, "likelihood", {"kind", "A", "y", "sigma_y"});
  const json& kind = field(lj, "likelihood", "kind");
  if (!kind.is_string()) fail("likelihood.kind", "expected a string");
  Matrix A = matrix_of(field(lj, "likelihood", "A"), "likelihood.A", d);
  Vector y = vector_of(field(lj, "likelihood", "y"), "likelihood.y");
  const double sigma_y = number(field(lj, "likelihood", "sigma_y"), "likelihood.sigma_y");
  if (A.cols() != d) fail("likelihood.A", "expected " + std::to_string(d) + " columns");
  if (A.rows() != y.size()) fail("likelihood.y", "length must equal the number of rows of A");

  std::unique_ptr<mgps::Likelihood> lik;
  if (kind == "linear") {
    lik = checked("likelihood", [&] { return std::make_unique<mgps::LinearGaussianLikelihood>(A, y, sigma_y); });
  } else if (kind == "magnitude") {
    lik = checked("likelihood", [&] { return std::make_unique<mgps::MagnitudeLikelihood>(A, y, sigma_y); });
  } else {
    fail("likelihood.kind", "expected \"linear\" or \"magnitude\"");
  }
  return Problem{std::move(*prior), std::move(lik)};
}

Problem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open problem file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str());
}

std::string problem_to_json(const mgps::GaussianPrior& prior, const mgps::Likelihood& lik) {
  json j = {{"prior", {{"type", "gaussian"}, {"mean", to_json(prior.mean())}, {"cov", to_json(prior.cov())}}},
            {"likelihood", likelihood_json(lik)}};
  return j.dump(2);
}

std::string problem_to_json(const mgps::GaussianMixturePrior& prior, const mgps::Likelihood& lik) {
  json j = {{"prior",
             {{"type", "gmm"},
              {"weights", to_json(prior.weights())},
              {"means", to_json(Matrix(prior.means().transpose()))},
              {"sigmas", to_json(prior.sigmas())}}},
            {"likelihood", likelihood_json(lik)}};
  return j.dump(2);
}

}  // namespace mgbench
