#include "semcom/eval/records.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "semcom/errors.hpp"

namespace semcom::eval {

namespace {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw FormatError("records line " + std::to_string(line) + ": bad number '" + s + "'");
}

std::uint64_t parse_u64(const std::string& s, std::size_t line) {
    try {
        std::size_t pos = 0;
        auto v = std::stoull(s, &pos);
        if (pos == s.size() && !s.empty() && s[0] != '-') return v;
    } catch (const std::exception&) {
    }
    throw FormatError("records line " + std::to_string(line) + ": bad integer '" + s + "'");
}

}  // namespace

bool is_grid_snr(double snr_db) {
    for (double g : kSnrGrid)
        if (snr_db == g) return true;
    return false;
}

void EvalRecord::validate() const {
    record_framework(framework);
    if (!std::isfinite(value)) throw DomainError("record value must be finite (" + framework + " " + metric + ")");
    if (!is_grid_snr(snr_db)) throw RangeError("snr_db " + format_double(snr_db) + " is not on the 0..24 dB grid");
    bool known = false;
    for (const auto& m : kMetricNames) known = known || m == metric;
    if (!known) throw ConfigError("unknown metric '" + metric + "'");
}

Framework record_framework(const std::string& id) {
    std::size_t best_len = 0;
    Framework best{};
    for (auto f : all_frameworks()) {
        const auto s = to_string(f);
        if (id.size() >= s.size() && id.compare(0, s.size(), s) == 0 &&
            (id.size() == s.size() || id[s.size()] == '-') && s.size() > best_len) {
            best = f;
            best_len = s.size();
        }
    }
    if (best_len == 0) throw ConfigError("record framework '" + id + "' matches no known framework");
    return best;
}

std::string imperfect_csi_id(double error_var) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "sc-imperfect-csi-v%g", error_var);
    return buf;
}

std::string to_csv(const std::vector<EvalRecord>& records) {
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const auto& r : records) {
        r.validate();
        if (r.framework.find(',') != std::string::npos) throw FormatError("framework id contains a comma");
        os << r.framework << ',' << channel::to_string(r.channel) << ',' << format_double(r.snr_db) << ','
           << r.seed << ',' << r.metric << ',' << format_double(r.value) << ',' << r.n_sentences << '\n';
    }
    return os.str();
}

void write_csv(const std::filesystem::path& path, const std::vector<EvalRecord>& records) {
    const auto text = to_csv(records);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
    if (!out) throw IoError("write failed: " + path.string());
}

std::vector<EvalRecord> parse_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw FormatError("records file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kCsvHeader) throw FormatError("unexpected records header: " + line);
    std::vector<EvalRecord> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto f = split_fields(line);
        if (f.size() != 7) throw FormatError("records line " + std::to_string(lineno) + ": expected 7 fields");
        EvalRecord r;
        r.framework = f[0];
        r.channel = channel::parse_kind(f[1]);
        r.snr_db = parse_double(f[2], lineno);
        r.seed = parse_u64(f[3], lineno);
        r.metric = f[4];
        r.value = parse_double(f[5], lineno);
        r.n_sentences = static_cast<std::size_t>(parse_u64(f[6], lineno));
        r.validate();
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<EvalRecord> read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

std::vector<EvalRecord> time_discount(const std::vector<EvalRecord>& records, double rho) {
    if (!std::isfinite(rho) || rho < 0.0 || rho >= 1.0)
        throw ConfigError("rho must lie in [0, 1), got " + format_double(rho));
    if (rho == 0.0) return records;
    std::vector<EvalRecord> out = records;
    for (auto& r : out) {
        if (r.discounted) throw ConfigError("records are already time-discounted");
        if (uses_csi(record_framework(r.framework)) && r.metric.rfind("bleu", 0) == 0) r.value *= 1.0 - rho;
        r.discounted = true;
    }
    return out;
}

}  // namespace semcom::eval
