#include <array>
#include <charconv>
#include <cstdio>
#include <sstream>

#include "fedleak/protocols.hpp"

namespace fedleak::protocols {

namespace {

constexpr std::array<std::pair<PayloadKind, std::string_view>, 5> kKindNames{{
    {PayloadKind::InitZ, "InitZ"},
    {PayloadKind::DeltaZ, "DeltaZ"},
    {PayloadKind::Gradient, "Gradient"},
    {PayloadKind::GlobalModel, "GlobalModel"},
    {PayloadKind::GossipGradient, "GossipGradient"},
}};

long parse_int(std::string_view field, int lineno) {
  long v = 0;
  auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || p != field.data() + field.size())
    throw Error("transcript line " + std::to_string(lineno) + ": bad integer '" +
                std::string(field) + "'");
  return v;
}

}  // namespace

std::string_view to_string(PayloadKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "?";
}

PayloadKind payload_kind_from_string(std::string_view name) {
  for (const auto& [k, n] : kKindNames)
    if (n == name) return k;
  throw Error("unknown payload kind '" + std::string(name) + "'");
}

void Transcript::append(Message msg) { records_.push_back(std::move(msg)); }

std::string Transcript::to_text() const {
  std::string out;
  char buf[40];
  for (const auto& m : records_) {
    out += std::to_string(m.t);
    out += ',';
    out += std::to_string(m.sender);
    out += ',';
    out += std::to_string(m.receiver);
    out += ',';
    out += to_string(m.kind);
    out += m.secure ? ",1" : ",0";
    for (Eigen::Index k = 0; k < m.payload.size(); ++k) {
      std::snprintf(buf, sizeof buf, ",%.17g", m.payload[k]);
      out += buf;
    }
    out += '\n';
  }
  return out;
}

Transcript Transcript::from_text(std::string_view text) {
  Transcript tr;
  int lineno = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++lineno;
    if (line.empty()) continue;

    std::vector<std::string_view> fields;
    size_t f = 0;
    while (true) {
      size_t comma = line.find(',', f);
      fields.push_back(line.substr(f, comma == std::string_view::npos ? comma : comma - f));
      if (comma == std::string_view::npos) break;
      f = comma + 1;
    }
    if (fields.size() < 5)
      throw Error("transcript line " + std::to_string(lineno) + ": expected at least 5 fields");
    Message m;
    m.t = static_cast<int>(parse_int(fields[0], lineno));
    m.sender = static_cast<NodeId>(parse_int(fields[1], lineno));
    m.receiver = static_cast<NodeId>(parse_int(fields[2], lineno));
    m.kind = payload_kind_from_string(fields[3]);
    const long secure = parse_int(fields[4], lineno);
    if (secure != 0 && secure != 1)
      throw Error("transcript line " + std::to_string(lineno) + ": secure flag must be 0 or 1");
    m.secure = secure == 1;
    m.payload.resize(static_cast<Eigen::Index>(fields.size() - 5));
    for (size_t k = 5; k < fields.size(); ++k) {
      // strtod round-trips %.17g exactly
      std::string cell(fields[k]);
      char* stop = nullptr;
      m.payload[static_cast<Eigen::Index>(k - 5)] = std::strtod(cell.c_str(), &stop);
      if (stop == cell.c_str() || *stop != '\0')
        throw Error("transcript line " + std::to_string(lineno) + ": bad number '" + cell + "'");
    }
    tr.append(std::move(m));
  }
  return tr;
}

}  // namespace fedleak::protocols
