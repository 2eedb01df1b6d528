#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

#include "fedleak/infotheory.hpp"

namespace fedleak::infotheory {

namespace {

// Neumaier-compensated running sum.
class Accumulator {
 public:
  void add(double v) {
    const double t = sum_ + v;
    comp_ += std::abs(sum_) >= std::abs(v) ? (sum_ - t) + v : (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    std::string_view cell = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.remove_prefix(1);
    while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r'))
      cell.remove_suffix(1);
    out.push_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

VarList merged(const VarList& a, const VarList& b) {
  VarList out = a;
  for (const auto& v : b)
    if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
  return out;
}

}  // namespace

DiscreteJoint::DiscreteJoint(VarList variables) : variables_(std::move(variables)) {
  require(!variables_.empty(), "DiscreteJoint: at least one variable is needed");
  std::set<std::string> seen(variables_.begin(), variables_.end());
  require(seen.size() == variables_.size(), "DiscreteJoint: duplicate variable name");
}

void DiscreteJoint::add(const Key& values, double p) {
  require(values.size() == variables_.size(), "DiscreteJoint: atom has the wrong arity");
  require(std::isfinite(p) && p >= 0.0, "DiscreteJoint: probabilities must be non-negative");
  if (p == 0.0) return;
  atoms_[values] += p;
}

int DiscreteJoint::index_of(std::string_view name) const {
  for (size_t k = 0; k < variables_.size(); ++k)
    if (variables_[k] == name) return static_cast<int>(k);
  throw Error("unknown variable '" + std::string(name) + "'");
}

double DiscreteJoint::total() const {
  Accumulator acc;
  for (const auto& [key, p] : atoms_) acc.add(p);
  return acc.value();
}

void DiscreteJoint::check_normalized(double tol) const {
  const double t = total();
  if (std::abs(t - 1.0) > tol) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "DiscreteJoint: probabilities sum to %.17g", t);
    throw Error(buf);
  }
}

std::map<DiscreteJoint::Key, double> DiscreteJoint::marginal(const VarList& vars) const {
  std::vector<int> cols;
  for (const auto& v : vars) cols.push_back(index_of(v));
  std::map<Key, double> out;
  Key key(cols.size());
  for (const auto& [atom, p] : atoms_) {
    for (size_t k = 0; k < cols.size(); ++k) key[k] = atom[cols[k]];
    out[key] += p;
  }
  return out;
}

DiscreteJoint DiscreteJoint::from_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start <= text.size()) {
    size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty() && line.front() != '#') lines.push_back(line);
    start = nl + 1;
  }
  if (lines.empty()) throw Error("joint csv: missing header");
  const auto header = split_line(lines[0]);
  if (header.size() < 2) throw Error("joint csv: need at least one variable and a probability column");

  VarList names;
  for (size_t k = 0; k + 1 < header.size(); ++k) names.emplace_back(header[k]);
  DiscreteJoint joint(names);
  joint.alphabets_.assign(names.size(), {});
  std::vector<std::map<std::string, std::int64_t, std::less<>>> codes(names.size());

  for (size_t row = 1; row < lines.size(); ++row) {
    const auto cells = split_line(lines[row]);
    if (cells.size() != header.size())
      throw Error("joint csv: line " + std::to_string(row + 1) + " has " +
                  std::to_string(cells.size()) + " cells, expected " +
                  std::to_string(header.size()));
    Key key(names.size());
    for (size_t k = 0; k < names.size(); ++k) {
      auto it = codes[k].find(cells[k]);
      if (it == codes[k].end()) {
        it = codes[k].emplace(std::string(cells[k]), static_cast<std::int64_t>(codes[k].size())).first;
        joint.alphabets_[k].emplace_back(cells[k]);
      }
      key[k] = it->second;
    }
    double p = 0.0;
    const auto cell = cells.back();
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), p);
    if (res.ec != std::errc{} || res.ptr != cell.data() + cell.size())
      throw Error("joint csv: line " + std::to_string(row + 1) + ": bad probability '" +
                  std::string(cell) + "'");
    joint.add(key, p);
  }
  joint.check_normalized();
  return joint;
}

double entropy(const DiscreteJoint& joint, const VarList& vars) {
  require(!vars.empty(), "entropy: variable list is empty");
  joint.check_normalized();
  Accumulator acc;
  for (const auto& [key, p] : joint.marginal(vars))
    if (p > 0.0) acc.add(-p * std::log2(p));
  return acc.value();
}

double mutual_information(const DiscreteJoint& joint, const VarList& a, const VarList& b) {
  return entropy(joint, a) + entropy(joint, b) - entropy(joint, merged(a, b));
}

double conditional_mutual_information(const DiscreteJoint& joint, const VarList& a,
                                      const VarList& b, const VarList& c) {
  if (c.empty()) return mutual_information(joint, a, b);
  const VarList ac = merged(a, c);
  const VarList bc = merged(b, c);
  return entropy(joint, ac) + entropy(joint, bc) - entropy(joint, merged(ac, b)) -
         entropy(joint, c);
}

}  // namespace fedleak::infotheory
