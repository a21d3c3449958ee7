#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "semcom/channel.hpp"
#include "semcom/framework.hpp"

namespace semcom::eval {

// One measurement of one grid cell.
struct EvalRecord {
    std::string framework;  // framework id, optionally suffixed (e.g. "sc-imperfect-csi-v0.02")
    channel::ChannelKind channel = channel::ChannelKind::awgn;
    double snr_db = 0.0;
    std::uint64_t seed = 0;
    std::string metric;  // bleu1..bleu4, nmse, ber
    double value = 0.0;
    std::size_t n_sentences = 0;
    bool discounted = false;  // in-memory only; the CSV keeps the seven schema columns

    void validate() const;
    bool operator==(const EvalRecord& o) const = default;
};

inline const std::vector<std::string> kMetricNames = {"bleu1", "bleu2", "bleu3", "bleu4", "nmse", "ber"};
inline const std::vector<double> kSnrGrid = {0, 3, 6, 9, 12, 15, 18, 21, 24};
inline const std::string kCsvHeader = "framework,channel,snr_db,seed,metric,value,n_sentences";

bool is_grid_snr(double snr_db);

// Base framework of a (possibly suffixed) record id: the longest known framework id
// that prefixes it. Throws ConfigError when none does.
Framework record_framework(const std::string& id);
std::string imperfect_csi_id(double error_var);

void write_csv(const std::filesystem::path& path, const std::vector<EvalRecord>& records);
std::string to_csv(const std::vector<EvalRecord>& records);
std::vector<EvalRecord> read_csv(const std::filesystem::path& path);
std::vector<EvalRecord> parse_csv(const std::string& text);

// BLEU records of CSI-using frameworks are scaled by (1 - rho); everything else is
// unchanged. rho must lie in [0, 1). With rho > 0 every returned record is marked
// discounted and already-discounted input is rejected.
std::vector<EvalRecord> time_discount(const std::vector<EvalRecord>& records, double rho);

}  // namespace semcom::eval
