#include "casclab/coefficient.hpp"

#include <algorithm>
#include <cmath>

namespace casclab {

namespace {

double exp_ramp(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double f0 = std::exp(-1.0 / t);
  const double f1 = std::exp(-1.0 / (1.0 - t));
  return f0 / (f0 + f1);
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r *= static_cast<double>(n - k + i) / i;
  return r;
}

}  // namespace

double smoothstep(double t, int order) {
  if (order <= 0) return exp_ramp(t);
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  // Generalized smoothstep: C^order polynomial ramp.
  const int p = order;
  double acc = 0.0;
  for (int k = 0; k <= p; ++k) {
    acc += binomial(p + k, k) * binomial(2 * p + 1, p - k) * std::pow(-t, k);
  }
  return std::pow(t, p + 1) * acc;
}

double Coefficient::operator()(double x) const {
  double v = 0.0;
  switch (kind) {
    case Kind::constant:
      v = value;
      break;
    case Kind::bump: {
      if (delta <= 0.0) throw InvalidCoefficient("bump transition width must be positive");
      const double up = smoothstep((x - (a - delta)) / delta, order);
      const double down = smoothstep(((b + delta) - x) / delta, order);
      v = amplitude * up * down;
      break;
    }
    case Kind::cosine:
      v = amplitude * std::cos(freq * x + phase) + offset;
      break;
    case Kind::piecewise: {
      if (xs.size() != ys.size() + 1) throw InvalidCoefficient("piecewise needs #edges = #values+1");
      if (x <= xs.front() || x >= xs.back()) {
        v = 0.0;
      } else {
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        v = ys[static_cast<std::size_t>(it - xs.begin()) - 1];
      }
      break;
    }
    case Kind::samples: {
      if (xs.size() != ys.size() || xs.size() < 2) throw InvalidCoefficient("samples need matching x/y, size >= 2");
      if (x <= xs.front()) {
        v = ys.front();
      } else if (x >= xs.back()) {
        v = ys.back();
      } else {
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - xs.begin());
        const double t = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
        v = (1.0 - t) * ys[i - 1] + t * ys[i];
      }
      break;
    }
  }
  v *= scale;
  if (!std::isfinite(v)) throw InvalidCoefficient("coefficient evaluated to a non-finite value");
  return v;
}

std::vector<double> Coefficient::breakpoints(double L) const {
  std::vector<double> pts;
  switch (kind) {
    case Kind::bump:
      pts = {a - delta, a, b, b + delta};
      break;
    case Kind::piecewise:
    case Kind::samples:
      pts = xs;
      break;
    default:
      break;
  }
  std::vector<double> inside;
  for (double x : pts) {
    if (x > 0.0 && x < L) inside.push_back(x);
  }
  return inside;
}

Coefficient Coefficient::constant(double v) {
  Coefficient c;
  c.kind = Kind::constant;
  c.value = v;
  return c;
}

Coefficient Coefficient::cosine(double amplitude, double freq, double phase, double offset) {
  Coefficient c;
  c.kind = Kind::cosine;
  c.amplitude = amplitude;
  c.freq = freq;
  c.phase = phase;
  c.offset = offset;
  return c;
}

Coefficient Coefficient::from_samples(std::vector<double> xs, std::vector<double> ys) {
  Coefficient c;
  c.kind = Kind::samples;
  c.xs = std::move(xs);
  c.ys = std::move(ys);
  if (c.xs.size() != c.ys.size() || c.xs.size() < 2) {
    throw InvalidCoefficient("samples need matching x/y arrays of size >= 2");
  }
  if (!std::is_sorted(c.xs.begin(), c.xs.end())) {
    throw InvalidCoefficient("sample abscissae must be increasing");
  }
  return c;
}

nlohmann::json Coefficient::to_json() const {
  nlohmann::json j;
  switch (kind) {
    case Kind::constant:
      j = {{"kind", "expr"}, {"name", "constant"}, {"params", {{"value", value}}}};
      break;
    case Kind::bump:
      j = {{"kind", "expr"},
           {"name", "bump"},
           {"params",
            {{"a", a}, {"b", b}, {"amplitude", amplitude}, {"delta", delta}, {"order", order}}}};
      break;
    case Kind::cosine:
      j = {{"kind", "expr"},
           {"name", "cosine"},
           {"params", {{"amplitude", amplitude}, {"freq", freq}, {"phase", phase}, {"offset", offset}}}};
      break;
    case Kind::piecewise:
      j = {{"kind", "expr"}, {"name", "piecewise"}, {"params", {{"edges", xs}, {"values", ys}}}};
      break;
    case Kind::samples:
      j = {{"kind", "samples"}, {"x", xs}, {"y", ys}};
      break;
  }
  if (scale != 1.0) j["scale"] = scale;
  return j;
}

Coefficient Coefficient::from_json(const nlohmann::json& j) {
  Coefficient c;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "samples") {
    c = from_samples(j.at("x").get<std::vector<double>>(), j.at("y").get<std::vector<double>>());
  } else if (kind == "expr") {
    const std::string name = j.at("name").get<std::string>();
    const nlohmann::json& p = j.at("params");
    if (name == "constant") {
      c = constant(p.at("value").get<double>());
    } else if (name == "bump") {
      c.kind = Kind::bump;
      c.a = p.at("a").get<double>();
      c.b = p.at("b").get<double>();
      c.amplitude = p.at("amplitude").get<double>();
      c.delta = p.at("delta").get<double>();
      c.order = p.value("order", 0);
    } else if (name == "cosine") {
      c = cosine(p.at("amplitude").get<double>(), p.at("freq").get<double>(),
                 p.value("phase", 0.0), p.value("offset", 0.0));
    } else if (name == "piecewise") {
      c.kind = Kind::piecewise;
      c.xs = p.at("edges").get<std::vector<double>>();
      c.ys = p.at("values").get<std::vector<double>>();
      if (c.xs.size() != c.ys.size() + 1) {
        throw InvalidCoefficient("piecewise needs #edges = #values+1");
      }
    } else {
      throw InvalidCoefficient("unknown expr coefficient: " + name);
    }
  } else {
    throw InvalidCoefficient("unknown coefficient kind: " + kind);
  }
  c.scale = j.value("scale", 1.0);
  return c;
}

}  // namespace casclab
