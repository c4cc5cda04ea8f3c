#include "mcbf/backhaul.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>

#include "mcbf/errors.hpp"

namespace mcbf {

const char* ToString(MessageTag tag) {
  switch (tag) {
    case MessageTag::kDualLambda: return "dual-lambda";
    case MessageTag::kDualMu: return "dual-mu";
    case MessageTag::kLocalCopy: return "local-copy";
    case MessageTag::kRankBit: return "rank-bit";
    case MessageTag::kGrPower: return "gr-power";
    case MessageTag::kControl: return "control";
  }
  return "unknown";
}

namespace {

bool Selected(MessageTag tag, const std::vector<MessageTag>& tags) {
  return tags.empty() || std::find(tags.begin(), tags.end(), tag) != tags.end();
}

}  // namespace

void MessageLog::Append(const MessageRecord& record) {
  if (record.count < 0) throw StateError("negative scalar count");
  if (!records_.empty() && record.round < records_.back().round) {
    throw StateError("message rounds must not decrease");
  }
  records_.push_back(record);
}

long long MessageLog::RoundTotal(int round, const std::vector<MessageTag>& tags) const {
  long long total = 0;
  for (const auto& r : records_) {
    if (r.round == round && Selected(r.tag, tags)) total += r.count;
  }
  return total;
}

long long MessageLog::Total(const std::vector<MessageTag>& tags) const {
  long long total = 0;
  for (const auto& r : records_) {
    if (Selected(r.tag, tags)) total += r.count;
  }
  return total;
}

void MessageLog::WriteCsv(std::ostream& out) const {
  out << "round,sender,receiver,tag,count\n";
  for (const auto& r : records_) {
    out << r.round << ',' << r.sender << ',';
    if (r.receiver == kBroadcast) {
      out << '*';
    } else {
      out << r.receiver;
    }
    out << ',' << ToString(r.tag) << ',' << r.count << '\n';
  }
}

std::vector<std::vector<ScalarMessage>> Backhaul::RunRound(const std::vector<ScalarMessage>& plan) {
  for (const auto& m : plan) {
    const bool bad_sender = m.sender < 0 || m.sender >= num_bs_;
    const bool bad_receiver =
        m.receiver != kBroadcast && (m.receiver < 0 || m.receiver >= num_bs_ || m.receiver == m.sender);
    if (bad_sender || bad_receiver) {
      std::ostringstream os;
      os << "exchange plan references unknown BS (" << m.sender << " -> " << m.receiver << ")";
      throw ConfigError(os.str());
    }
  }
  const int round = next_round_++;
  std::vector<std::vector<ScalarMessage>> inbox(static_cast<std::size_t>(num_bs_));
  for (const auto& m : plan) {
    log_.Append({round, m.sender, m.receiver, m.tag, static_cast<int>(m.values.size())});
    if (m.receiver == kBroadcast) {
      for (int b = 0; b < num_bs_; ++b) {
        if (b != m.sender) inbox[b].push_back(m);
      }
    } else {
      inbox[m.receiver].push_back(m);
    }
  }
  return inbox;
}

long long CentralizedSignalingLoad(int B, int U, int A) {
  return 2LL * A * U * (B - 1) * B;
}

long long PerIterationSignalingLoad(int B, int U) {
  if (B < 1 || U % B != 0) {
    std::ostringstream os;
    os << "U=" << U << " is not divisible by B=" << B;
    throw ConfigError(os.str());
  }
  return 2LL * B * (B - 1) * (U / B);
}

bool VerifyExchangeCount(const MessageLog& log, int round, long long expected,
                         const std::vector<MessageTag>& tags) {
  return log.RoundTotal(round, tags) == expected;
}

}  // namespace mcbf
